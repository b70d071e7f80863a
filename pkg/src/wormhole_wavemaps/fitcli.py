"""Fitting and the command-line shell in one namespace.

The implementation lives in :mod:`.fitting` (log-law fits), :mod:`.config`
(key = value files), :mod:`.io` (CSV/JSON) and :mod:`.cli` (argparse).
"""

from .cli import build_parser, main
from .config import load_config, merge, parse_window
from .fitting import (FitError, FitResult, WindowError, fit_log_law, fit_records, local_slopes,
                      select_fit_window)
from .io import (manifest, read_ode_csv, read_trajectory_csv, write_ode_csv,
                 write_trajectory_csv)

__all__ = ["build_parser", "main", "load_config", "merge", "parse_window", "FitError",
           "FitResult", "WindowError", "fit_log_law", "fit_records", "local_slopes",
           "select_fit_window", "manifest", "read_ode_csv", "read_trajectory_csv",
           "write_ode_csv", "write_trajectory_csv"]
