"""key = value run configuration; every key mirrors a command-line flag."""

from __future__ import annotations

import configparser
from pathlib import Path

SECTION = "run"

# key -> converter
KEYS = {
    "family": str,
    "b": float,
    "n": int,
    "s_end": float,
    "rel_tol": float,
    "abs_tol": float,
    "sample_interval": float,
    "out": str,
    "blo": float,
    "bhi": float,
    "eps": float,
    "x_exp": float,
    "energy_window": float,
    "energy_gap": float,
    "window": str,
    "N": int,
    "t_start": float,
    "t_end": float,
    "c": float,
    "samples": int,
    "init": str,
}


def _convert(key: str, raw: str):
    try:
        return KEYS[key](raw)
    except ValueError as exc:
        raise ValueError(f"config key {key!r}: cannot parse {raw!r}") from exc


def load_config(path) -> dict:
    """Read a key = value file.  A leading [section] header is optional."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep N distinct from n
    if not text.lstrip().startswith("["):
        text = f"[{SECTION}]\n" + text
    parser.read_string(text)
    out = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in KEYS:
                raise ValueError(f"unknown config key {key!r} in {path}")
            out[key] = _convert(key, raw)
    return out


def merge(flags: dict, config: dict, defaults: dict) -> dict:
    """Flags (non-None) win over the config file, which wins over defaults."""
    merged = dict(defaults)
    merged.update({k: v for k, v in config.items() if k in defaults})
    merged.update({k: v for k, v in flags.items() if v is not None and k in defaults})
    return merged


def parse_window(text: str | None) -> tuple[float, float] | None:
    if text is None or text == "":
        return None
    parts = [p for p in text.replace(":", ",").split(",") if p.strip()]
    if len(parts) != 2:
        raise ValueError(f"window must be 't_min,t_max', got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not lo < hi:
        raise ValueError(f"window bounds must increase, got {text!r}")
    return lo, hi
