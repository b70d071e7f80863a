"""Sub/supercritical classification and bisection on the initial-data amplitude."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .ode_models import c1_exponent, physical_rate
from .diagnostics import DiagnosticsRecord, compute_records, record
from .evolve import IntegratorConfig, evolve_field
from .spectral import Grid
from .wavemap_core import Parity, initial_data


class Classification(enum.Enum):
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"
    UNDECIDED = "undecided"


def quanta(family) -> tuple[float, float]:
    """(lower, upper) endstate energies of a family: (0, 8) even, (4, 12) odd."""
    return (0.0, 8.0) if Parity.parse(family) is Parity.EVEN else (4.0, 12.0)


def chain_size(family) -> int:
    return 2 if Parity.parse(family) is Parity.EVEN else 3


@dataclass(frozen=True)
class ClassifierConfig:
    """Cutoffs for deciding the fate of a run.

    Subcritical: E drops below the upper quantum by more than ``energy_gap``
    (the Bondi energy never increases and a supercritical run settles at the
    upper quantum from above), the tracked crossings disappear after having
    existed, or E comes within ``energy_window`` of the lower quantum.

    Supercritical: the chain exists with E >= upper - energy_window and either
    c1 > x_exp, or the energy excess E - upper exceeds ``tail_safety`` times the
    projected remaining loss s |dE/ds| (measured over ``rate_window``), once
    s >= min_s.

    ``law_margin`` and ``turnaround`` enable two optional kinematic rules:
    c1 running ahead of p log(A t) by the margin (supercritical) and c1 falling
    back from its maximum by the given amount (subcritical).
    """

    x_exp: float = 12.0
    energy_window: float = 0.5
    energy_gap: float = 1e-8
    tail_safety: float = 1.0
    rate_window: float = 5.0
    min_s: float = 10.0
    law_margin: float | None = None
    turnaround: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class Classifier:
    """Incremental classifier fed one DiagnosticsRecord at a time.

    The first decision sticks; ``reason`` says which rule fired.
    """

    def __init__(self, family, config: ClassifierConfig | None = None):
        self.family = Parity.parse(family)
        self.config = config or ClassifierConfig()
        self.lower, self.upper = quanta(self.family)
        N = chain_size(self.family)
        self.exponent = c1_exponent(N)
        self.rate = physical_rate(N)
        # the odd family always has the centred crossing; only outer ones count
        self._min_crossings = 1 if self.family is Parity.EVEN else 2
        self.label = Classification.UNDECIDED
        self.reason = ""
        self.seen_chain = False
        self.c1_max = -math.inf
        self._history: list[tuple[float, float]] = []

    def law(self, t: float) -> float:
        return self.exponent * math.log(self.rate * t)

    def _decide(self, label: Classification, reason: str) -> Classification:
        self.label, self.reason = label, reason
        return label

    def _loss_rate(self, s: float) -> float | None:
        """Mean -dE/ds over the last rate_window, None until the window is covered."""
        hist = self._history
        if hist[0][0] > s - self.config.rate_window:
            return None
        for s0, E0 in reversed(hist):
            if s0 <= s - self.config.rate_window:
                return (E0 - hist[-1][1]) / (s - s0)
        return None

    def update(self, rec: DiagnosticsRecord) -> Classification:
        if self.label is not Classification.UNDECIDED:
            return self.label
        cfg = self.config
        E, s = rec.bondi, rec.s
        self._history.append((s, E))
        if abs(E - self.lower) < cfg.energy_window:
            return self._decide(Classification.SUBCRITICAL, f"energy {E:.6g} near {self.lower:g} at s={s:g}")
        if E < self.upper - cfg.energy_gap:
            return self._decide(Classification.SUBCRITICAL,
                                f"energy {E:.10g} below {self.upper:g} at s={s:g}")
        has_chain = len(rec.positions) >= self._min_crossings
        if self.seen_chain and not has_chain:
            return self._decide(Classification.SUBCRITICAL, f"crossings vanished at s={s:g}")
        if not has_chain:
            return self.label
        self.seen_chain = True
        c1 = rec.c1
        self.c1_max = max(self.c1_max, c1)
        if c1 > cfg.x_exp:
            return self._decide(Classification.SUPERCRITICAL, f"c1={c1:.4g} > {cfg.x_exp:g} at s={s:g}")
        excess = E - self.upper
        loss = self._loss_rate(s)
        if s >= cfg.min_s and loss is not None and excess > cfg.energy_gap:
            projected = s * max(loss, 0.0)
            if excess > cfg.tail_safety * projected:
                return self._decide(Classification.SUPERCRITICAL,
                                    f"energy excess {excess:.3g} exceeds projected loss "
                                    f"{projected:.3g} at s={s:g}")
        if (cfg.law_margin is not None and rec.t_inferred > 0
                and c1 > self.law(rec.t_inferred) + cfg.law_margin):
            return self._decide(Classification.SUPERCRITICAL,
                                f"c1={c1:.4g} ahead of the expansion law at s={s:g}")
        if cfg.turnaround is not None and c1 < self.c1_max - cfg.turnaround:
            return self._decide(Classification.SUBCRITICAL,
                                f"c1 fell to {c1:.4g} from {self.c1_max:.4g} at s={s:g}")
        return self.label


def classify(records: Sequence[DiagnosticsRecord], family, config: ClassifierConfig | None = None
             ) -> Classification:
    clf = Classifier(family, config)
    for rec in records:
        if clf.update(rec) is not Classification.UNDECIDED:
            break
    return clf.label


# -- single probes ---------------------------------------------------------------

@dataclass
class ProbeResult:
    b: float
    label: Classification
    energy: float
    s_end: float
    reason: str = ""
    records: list[DiagnosticsRecord] = field(default_factory=list, repr=False)

    def log_entry(self) -> tuple[float, str, float]:
        return (self.b, self.label.value, self.energy)


def run_probe(family, b: float, grid: Grid, cfg: IntegratorConfig,
              classifier: ClassifierConfig | None = None, stop_on_decision: bool = True
              ) -> ProbeResult:
    """Evolve one member of a family and classify it on the fly."""
    clf = Classifier(family, classifier)
    records: list[DiagnosticsRecord] = []

    def watch(state) -> bool:
        rec = record(state, grid)
        records.append(rec)
        decided = clf.update(rec) is not Classification.UNDECIDED
        return decided and stop_on_decision

    evolve_field(initial_data(family, b, grid), grid, cfg, events=(watch,))
    energy = records[-1].bondi if records else math.nan
    return ProbeResult(b, clf.label, energy, cfg.s_end, clf.reason, records)


# -- bisection ---------------------------------------------------------------------

class BisectionError(RuntimeError):
    def __init__(self, message: str, probe_log: list):
        super().__init__(message)
        self.probe_log = probe_log


@dataclass
class BisectionResult:
    b_star: float
    b_lo: float
    b_hi: float
    label_lo: Classification
    label_hi: Classification
    probe_log: list[tuple[float, str, float]]
    bisection_probes: int
    violations: list[float] = field(default_factory=list)
    probes: dict[str, ProbeResult] = field(default_factory=dict, repr=False)

    @property
    def bracket_width(self) -> float:
        return abs(self.b_hi - self.b_lo)

    def to_dict(self) -> dict:
        return {"b_star": self.b_star, "b_lo": self.b_lo, "b_hi": self.b_hi,
                "bracket_width": self.bracket_width, "label_lo": self.label_lo.value,
                "label_hi": self.label_hi.value, "bisection_probes": self.bisection_probes,
                "probe_log": [list(p) for p in self.probe_log], "violations": self.violations}


Prober = Callable[[float, float], ProbeResult]


def monotonicity_violations(probe_log: Sequence[tuple[float, str, float]]) -> list[float]:
    """Amplitudes whose label disagrees with a single threshold separating the log."""
    decided = sorted((b, lab) for b, lab, _ in probe_log if lab != Classification.UNDECIDED.value)
    if not decided:
        return []
    labels = [lab for _, lab in decided]
    first = labels[0]
    best, best_cut = None, 0
    # choose the cut that explains the log with the fewest disagreements
    for cut in range(len(labels) + 1):
        bad = sum(lab != first for lab in labels[:cut]) + sum(lab == first for lab in labels[cut:])
        if best is None or bad < best:
            best, best_cut = bad, cut
    return [b for i, (b, lab) in enumerate(decided)
            if (i < best_cut and lab != first) or (i >= best_cut and lab == first)]


def bisect(family, b_lo: float, b_hi: float, eps_b: float, cfg: IntegratorConfig | None = None,
           grid: Grid | None = None, classifier: ClassifierConfig | None = None,
           prober: Prober | None = None, max_probes: int = 200) -> BisectionResult:
    """Bisect on the amplitude until the bracket is at most ``eps_b`` wide.

    ``prober(b, s_end)`` replaces the PDE evolution (useful for tests).  An
    Undecided probe is repeated once with s_end doubled.
    """
    if not (b_lo < b_hi) or not (eps_b > 0) or not all(map(math.isfinite, (b_lo, b_hi, eps_b))):
        raise ValueError(f"invalid bracket [{b_lo}, {b_hi}] / eps_b={eps_b}")
    if eps_b < 1e-15:
        raise ValueError("eps_b below 1e-15 is not resolvable in double precision")
    if prober is None:
        if cfg is None or grid is None:
            raise ValueError("cfg and grid are required for PDE probes")

        def prober(b, s_end):
            return run_probe(family, b, grid, replace(cfg, s_end=s_end), classifier)

    s_end = cfg.s_end if cfg is not None else math.inf
    log: list[tuple[float, str, float]] = []

    def probe(b: float) -> ProbeResult:
        res = prober(b, s_end)
        log.append(res.log_entry())
        if res.label is Classification.UNDECIDED:
            res = prober(b, 2 * s_end)
            log.append(res.log_entry())
            if res.label is Classification.UNDECIDED:
                raise BisectionError(f"probe b={b!r} undecided even with s_end={2 * s_end:g}", log)
        return res

    lo_res, hi_res = probe(b_lo), probe(b_hi)
    if lo_res.label is hi_res.label:
        raise ValueError(f"bracket endpoints share the label {lo_res.label.value}")
    count = 0
    while abs(b_hi - b_lo) > eps_b:
        if count >= max_probes:
            raise BisectionError("probe budget exhausted", log)
        mid = 0.5 * (b_lo + b_hi)
        if mid in (b_lo, b_hi):
            break  # bracket at floating-point resolution
        res = probe(mid)
        count += 1
        if res.label is lo_res.label:
            b_lo, lo_res = mid, res
        else:
            b_hi, hi_res = mid, res
    return BisectionResult(0.5 * (b_lo + b_hi), b_lo, b_hi, lo_res.label, hi_res.label, log, count,
                           monotonicity_violations(log), {"lo": lo_res, "hi": hi_res})


def records_for(family, b: float, grid: Grid, cfg: IntegratorConfig) -> list[DiagnosticsRecord]:
    """Diagnostics along a full run, without early stopping."""
    return compute_records(evolve_field(initial_data(family, b, grid), grid, cfg), grid)
