"""Command-line entry point: evolve, bisect, fit, ode-integrate, ode-series, report."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .ode_models import (SeriesParams, asymptotic_solution, exact_solution, series_tau,
                         time_of_tau)
from .config import load_config, merge, parse_window
from .diagnostics import NotSettledError, compute_records, final_energy_quantum
from .evolve import IntegratorConfig, IntegrationError, chain_config, evolve_chain, evolve_field
from .fitting import FitError, WindowError, fit_records
from .spectral import make_grid
from .threshold import (BisectionError, ClassifierConfig, chain_size, classify, bisect,
                        run_probe)
from .wavemap_core import Parity, initial_data

log = logging.getLogger("wormhole_wavemaps")

PDE_DEFAULTS = {"family": "even", "b": 3.8, "n": 129, "s_end": 80.0, "rel_tol": 1e-9,
                "abs_tol": 1e-9, "sample_interval": 0.5, "out": "runs",
                "x_exp": 12.0, "energy_window": 0.5, "energy_gap": 1e-8}
BISECT_DEFAULTS = {**PDE_DEFAULTS, "blo": 3.0, "bhi": 4.5, "eps": 1e-4}
FIT_DEFAULTS = {"family": "even", "window": None, "out": "runs"}
ODE_DEFAULTS = {"N": 3, "t_start": 1.0, "t_end": 100.0, "rel_tol": 1e-12, "abs_tol": 1e-12,
                "sample_interval": 1.0, "out": "runs", "c": 0.0, "init": "exact"}
# series range defaults to tau in [4, 16], where the expansion is reliable
SERIES_DEFAULTS = {"N": 5, "c": 0.0, "t_start": None, "t_end": None, "samples": 50, "out": "runs"}


class CliError(Exception):
    pass


def _settings(args, defaults) -> dict:
    cfg = load_config(args.config) if args.config else {}
    return merge(vars(args), cfg, defaults)


def _integrator(st) -> IntegratorConfig:
    return IntegratorConfig(rel_tol=st["rel_tol"], abs_tol=st["abs_tol"], s_end=st["s_end"],
                            sample_interval=st["sample_interval"])


def _classifier(st) -> ClassifierConfig:
    return ClassifierConfig(x_exp=st["x_exp"], energy_window=st["energy_window"],
                            energy_gap=st["energy_gap"])


def _out(st, name: str) -> Path:
    path = Path(st["out"]) / name
    path.mkdir(parents=True, exist_ok=True)
    return path


def _stem(st) -> str:
    return f"{Parity.parse(st['family']).value}_b{st['b']!r}_n{st['n']}"


# -- subcommands ------------------------------------------------------------------------

def cmd_evolve(args) -> int:
    st = _settings(args, PDE_DEFAULTS)
    family = Parity.parse(st["family"])
    grid = make_grid(st["n"])
    cfg = _integrator(st)
    try:
        traj = evolve_field(initial_data(family, st["b"], grid), grid, cfg)
    except IntegrationError as exc:
        raise CliError(f"integration failed: {exc}") from exc
    records = compute_records(traj, grid)
    out = _out(st, "evolve")
    stem = _stem(st)
    io.write_trajectory_csv(out / f"{stem}.csv", records)
    io.save_field_state(traj.final, grid.nodes, out / f"{stem}_final.csv", out / f"{stem}_final.json")
    try:
        q = final_energy_quantum(records)
        quantum = {"N": q.N, "energy": q.energy, "settled": True}
    except (NotSettledError, ValueError) as exc:
        quantum = {"N": None, "energy": records[-1].bondi, "settled": False, "detail": str(exc)}
    label = classify(records, family, _classifier(st))
    summary = io.manifest(command="evolve", config=cfg.to_dict(), family=family.value, b=st["b"],
                          grid_size=grid.n, termination=traj.reason.value, detail=traj.detail,
                          classification=label.value, final_energy=quantum,
                          fit_inputs={"N": chain_size(family), "samples": len(records)})
    io.write_json(out / f"{stem}.json", summary)
    print(f"{stem}: {label.value}, E_final={records[-1].bondi:.10g}, samples={len(records)}")
    return 0


def cmd_bisect(args) -> int:
    st = _settings(args, BISECT_DEFAULTS)
    family = Parity.parse(st["family"])
    grid = make_grid(st["n"])
    cfg = _integrator(st)
    clf = _classifier(st)
    out = _out(st, "bisect")
    probes = []

    def prober(b, s_end):
        res = run_probe(family, b, grid, replace(cfg, s_end=s_end), clf)
        idx = len(probes)
        probes.append(res)
        io.write_trajectory_csv(out / f"{family.value}_n{grid.n}_probe{idx:03d}.csv", res.records)
        log.info("probe %d: b=%r -> %s (%s)", idx, b, res.label.value, res.reason)
        return res

    try:
        result = bisect(family, st["blo"], st["bhi"], st["eps"], cfg, grid, clf, prober=prober)
    except BisectionError as exc:
        io.write_json(out / f"{family.value}_n{grid.n}_failed.json",
                      io.manifest(command="bisect", error=str(exc), probe_log=exc.probe_log))
        raise CliError(str(exc)) from exc
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    payload = io.manifest(command="bisect", family=family.value, grid_size=grid.n,
                          config=cfg.to_dict(), classifier=clf.to_dict(), eps_b=st["eps"],
                          **result.to_dict())
    io.write_json(out / f"{family.value}_n{grid.n}.json", payload)
    print(f"b* = {result.b_star!r} (bracket width {result.bracket_width:.3g}, "
          f"{result.bisection_probes} probes)")
    if result.violations:
        print(f"warning: probe log not monotone at b = {result.violations}")
    return 0


def cmd_fit(args) -> int:
    st = _settings(args, FIT_DEFAULTS)
    family = Parity.parse(st["family"])
    records = io.read_trajectory_csv(args.csv)
    window = parse_window(st["window"])
    try:
        result = fit_records(records, chain_size(family), window=window)
    except (WindowError, FitError) as exc:
        raise CliError(str(exc)) from exc
    out = _out(st, "fit")
    path = out / (Path(args.csv).stem + "_fit.json")
    io.write_json(path, io.manifest(command="fit", source=str(args.csv), family=family.value,
                                    **result.to_dict()))
    print(f"A = {result.A:.6g} (predicted {result.A_predicted:.6g}, deviation "
          f"{100 * result.rel_deviation:.2f}%), t0 = {result.t0:.4g}, window = "
          f"[{result.window[0]:.4g}, {result.window[1]:.4g}]")
    return 0


def cmd_ode_integrate(args) -> int:
    st = _settings(args, ODE_DEFAULTS)
    N = st["N"]
    if st["init"] == "exact":
        state0 = exact_solution(N, st["t_start"])
    elif st["init"] == "series":
        state0 = asymptotic_solution(SeriesParams(N, st["c"]), st["t_start"])
    else:
        raise CliError(f"unknown init {st['init']!r} (exact or series)")
    cfg = chain_config(st["t_end"], st["rel_tol"], st["abs_tol"], st["sample_interval"])
    try:
        traj = evolve_chain(state0, cfg)
    except IntegrationError as exc:
        raise CliError(str(exc)) from exc
    out = _out(st, "ode")
    stem = f"ode_N{N}_{st['init']}"
    io.write_ode_csv(out / f"{stem}.csv", traj.states)
    io.write_json(out / f"{stem}.json", io.manifest(command="ode-integrate", N=N, config=cfg.to_dict(),
                                                    init=st["init"], c=st["c"],
                                                    termination=traj.reason.value, detail=traj.detail,
                                                    samples=len(traj)))
    print(f"{stem}: {len(traj)} samples, stopped: {traj.reason.value} {traj.detail}".rstrip())
    return 0


def cmd_ode_series(args) -> int:
    st = _settings(args, SERIES_DEFAULTS)
    params = SeriesParams(st["N"], st["c"])
    t_start = st["t_start"] if st["t_start"] is not None else time_of_tau(params, 4.0)
    t_end = st["t_end"] if st["t_end"] is not None else time_of_tau(params, 16.0)
    times = np.linspace(t_start, t_end, st["samples"])
    states = [asymptotic_solution(params, float(t)) for t in times]
    out = _out(st, "ode")
    stem = f"series_N{params.N}"
    io.write_ode_csv(out / f"{stem}.csv", states)
    io.write_json(out / f"{stem}.json", io.manifest(command="ode-series", N=params.N, c=params.c,
                                                    t_start=t_start, t_end=t_end,
                                                    samples=st["samples"],
                                                    tau_range=[series_tau(params, t_start), series_tau(params, t_end)]))
    print(f"{stem}: {len(states)} samples")
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.inputs:
        data = io.read_json(path)
        cmd = data.get("command", "?")
        if cmd == "fit":
            rows.append((Path(path).name, "A_fit", f"{data['A']:.6g}",
                         f"pred {data['A_predicted']:.6g} ({100 * data['rel_deviation']:.2f}%)"))
        elif cmd == "bisect":
            rows.append((Path(path).name, "b*", f"{data['b_star']:.8g}",
                         f"width {data['bracket_width']:.2g}, n={data['grid_size']}"))
        elif cmd == "evolve":
            q = data.get("final_energy", {})
            n_val = q.get("N")
            rows.append((Path(path).name, "E_inf", f"{q.get('energy', math.nan):.6g}",
                         f"quantum {4 * n_val if n_val is not None else 'unsettled'}"))
        elif cmd != "?":
            rows.append((Path(path).name, cmd, "", ""))
    if not rows:
        raise CliError("no run summaries among the inputs")
    widths = [max(len(str(r[i])) for r in rows + [("file", "quantity", "value", "reference")])
              for i in range(4)]
    header = ("file", "quantity", "value", "reference")
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)) for r in rows]
    text = "\n".join(lines)
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n")
    return 0


# -- argument parsing ----------------------------------------------------------------------

def _pde_flags(p):
    p.add_argument("--family", help="even or odd")
    p.add_argument("--n", type=int, help="number of grid nodes")
    p.add_argument("--send", dest="s_end", type=float, help="final hyperboloidal time")
    p.add_argument("--rtol", dest="rel_tol", type=float)
    p.add_argument("--atol", dest="abs_tol", type=float)
    p.add_argument("--sample", dest="sample_interval", type=float, help="diagnostic cadence in s")
    p.add_argument("--x-exp", dest="x_exp", type=float)
    p.add_argument("--energy-window", dest="energy_window", type=float)
    p.add_argument("--energy-gap", dest="energy_gap", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wormhole-wavemaps", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--out", help="output directory")
        p.set_defaults(func=func)
        return p

    p = add("evolve", cmd_evolve, "one PDE run with diagnostics CSV")
    _pde_flags(p)
    p.add_argument("--b", type=float, help="initial-data amplitude")

    p = add("bisect", cmd_bisect, "bisect for the critical amplitude")
    _pde_flags(p)
    p.add_argument("--blo", type=float)
    p.add_argument("--bhi", type=float)
    p.add_argument("--eps", type=float, help="target bracket width")

    p = add("fit", cmd_fit, "fit the log law to a trajectory CSV")
    p.add_argument("csv")
    p.add_argument("--family")
    p.add_argument("--window", help="t_min,t_max override")

    for name, func, text in (("ode-integrate", cmd_ode_integrate, "integrate the reduced model"),
                             ("ode-series", cmd_ode_series, "tabulate the asymptotic series")):
        p = add(name, func, text)
        p.add_argument("--N", type=int)
        p.add_argument("--c", type=float, help="series parameter c")
        p.add_argument("--t-start", dest="t_start", type=float, help="rescaled start time")
        p.add_argument("--t-end", dest="t_end", type=float)
        if name == "ode-integrate":
            p.add_argument("--init", help="exact or series")
            p.add_argument("--rtol", dest="rel_tol", type=float)
            p.add_argument("--atol", dest="abs_tol", type=float)
            p.add_argument("--sample", dest="sample_interval", type=float)
        else:
            p.add_argument("--samples", type=int)

    p = sub.add_parser("report", help="tabulate JSON summaries")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--output", help="also write the table here")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
