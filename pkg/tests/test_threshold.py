import math

import pytest
from hypothesis import given, settings, strategies as st

from wormhole_wavemaps.diagnostics import DiagnosticsRecord
from wormhole_wavemaps.evolve import IntegratorConfig
from wormhole_wavemaps.threshold import (BisectionError, Classification, Classifier,
                                         ClassifierConfig, ProbeResult, bisect, chain_size,
                                         classify, monotonicity_violations, quanta, run_probe)

SUB, SUPER, UND = Classification.SUBCRITICAL, Classification.SUPERCRITICAL, Classification.UNDECIDED


def step_prober(threshold, calls=None):
    def prober(b, s_end):
        if calls is not None:
            calls.append(b)
        return ProbeResult(b, SUPER if b > threshold else SUB, math.nan, s_end)
    return prober


def test_quanta_and_sizes():
    assert quanta("even") == (0.0, 8.0) and quanta("odd") == (4.0, 12.0)
    assert chain_size("even") == 2 and chain_size("odd") == 3


def test_synthetic_bisection_probe_count():
    calls = []
    res = bisect("even", 0.0, 3.0, 1e-4, prober=step_prober(1.0, calls))
    assert abs(res.b_star - 1.0) <= 1e-4
    assert res.bisection_probes == math.ceil(math.log2(3.0 / 1e-4))
    assert len(calls) == res.bisection_probes + 2
    assert res.label_lo is SUB and res.label_hi is SUPER and res.violations == []


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(1e-9, 1e-2))
def test_bisection_brackets_threshold(thr, eps):
    res = bisect("odd", 0.0, 1.0, eps, prober=step_prober(thr))
    assert res.b_lo <= thr <= res.b_hi
    assert res.bracket_width <= eps
    assert res.bisection_probes == math.ceil(math.log2(1.0 / eps))


def test_bisection_down_to_machine_width():
    res = bisect("even", 0.0, 2.0, 1e-15, prober=step_prober(1.0 + 1e-12))
    assert abs(res.b_star - (1.0 + 1e-12)) <= 1e-15


@pytest.mark.parametrize("lo,hi,eps", [(1.0, 0.5, 1e-3), (0.0, 1.0, 0.0), (0.0, 1.0, 1e-16),
                                       (0.0, math.inf, 1e-3)])
def test_bisection_input_validation(lo, hi, eps):
    with pytest.raises(ValueError):
        bisect("even", lo, hi, eps, prober=step_prober(0.5))


def test_bisection_needs_differing_labels():
    with pytest.raises(ValueError, match="share"):
        bisect("even", 2.0, 3.0, 1e-3, prober=step_prober(1.0))


def test_bisection_requires_cfg_for_pde():
    with pytest.raises(ValueError):
        bisect("even", 0.0, 1.0, 1e-3)


def test_undecided_probe_retried_with_longer_run():
    seen = []

    def prober(b, s_end):
        seen.append(s_end)
        if s_end < 200:
            return ProbeResult(b, UND, math.nan, s_end)
        return ProbeResult(b, SUPER if b > 0.5 else SUB, math.nan, s_end)

    res = bisect("even", 0.0, 1.0, 0.3, IntegratorConfig(s_end=100.0), prober=prober)
    assert abs(res.b_star - 0.5) <= 0.3
    assert seen[:2] == [100.0, 200.0]


def test_persistently_undecided_probe_fails():
    def prober(b, s_end):
        return ProbeResult(b, UND, math.nan, s_end)

    with pytest.raises(BisectionError) as info:
        bisect("even", 0.0, 1.0, 0.1, IntegratorConfig(s_end=50.0), prober=prober)
    assert len(info.value.probe_log) == 2


def test_probe_log_monotonicity():
    log = [(0.1, "subcritical", 0), (0.9, "supercritical", 0), (0.5, "supercritical", 0),
           (0.3, "subcritical", 0)]
    assert monotonicity_violations(log) == []
    log.append((0.7, "subcritical", 0))
    assert monotonicity_violations(log) == [0.7]


def test_violations_reported_by_bisect():
    # a retried probe that flips its label leaves an inconsistent log
    def flaky(b, s_end):
        if s_end < 100:
            return ProbeResult(b, UND, math.nan, s_end)
        return ProbeResult(b, SUPER if b > 0.3 else SUB, math.nan, s_end)

    res = bisect("even", 0.0, 1.0, 0.1, IntegratorConfig(s_end=50.0), prober=flaky)
    assert res.violations == []
    log = res.probe_log + [(0.9, "subcritical", math.nan)]
    assert monotonicity_violations(log) == [0.9]
    assert res.to_dict()["violations"] == []


def _rec(s, E, pos=()):
    return DiagnosticsRecord(s, E, 0.0, 0.0, tuple(pos), s + math.cosh(pos[-1]) if pos else math.nan)


def test_classifier_low_energy_is_subcritical():
    assert classify([_rec(0, 9.0), _rec(1, 5.0), _rec(2, 0.1)], "even") is SUB


def test_classifier_energy_below_upper_quantum():
    clf = Classifier("odd")
    clf.update(_rec(0, 13.0, [0.0, 2.0]))
    assert clf.update(_rec(1, 11.5, [0.0])) is SUB
    assert "below" in clf.reason


def test_classifier_crossings_vanish():
    recs = [_rec(0, 9.0, [2.0]), _rec(1, 8.9, [2.5]), _rec(2, 8.8)]
    assert classify(recs, "even") is SUB


def test_classifier_far_kink_is_supercritical():
    assert classify([_rec(0, 9.0, [5.0]), _rec(1, 8.9, [13.0])], "even") is SUPER


def test_classifier_energy_excess_rule():
    recs = [_rec(s, 8.5 - 1e-4 * s, [2.0 + 0.01 * s]) for s in range(0, 20)]
    clf = Classifier("even")
    for r in recs:
        clf.update(r)
    assert clf.label is SUPER and "projected" in clf.reason


def test_classifier_undecided_while_draining_fast():
    # excess stays below the projected remaining loss s |dE/ds|
    recs = [_rec(s, 8.5 - 0.04 * s, [2.0]) for s in range(0, 12)]
    assert classify(recs, "even") is UND


def test_classifier_labels_stick():
    clf = Classifier("even")
    clf.update(_rec(0, 0.1))
    assert clf.update(_rec(1, 9.0, [20.0])) is SUB


def test_classifier_optional_rules():
    cfg = ClassifierConfig(law_margin=0.5)
    assert classify([_rec(0, 9.0, [8.0])], "even", cfg) is SUPER
    cfg = ClassifierConfig(turnaround=0.5)
    assert classify([_rec(0, 9.0, [3.0]), _rec(1, 9.0, [2.0])], "even", cfg) is SUB


def test_config_serialises():
    d = ClassifierConfig().to_dict()
    assert d["x_exp"] == 12.0 and d["energy_window"] == 0.5


@pytest.mark.slow
@pytest.mark.parametrize("family,b,expected", [("even", 5.0, SUPER), ("even", 1.0, SUB), ("odd", 0.0, SUB)])
def test_pde_classification(grid65, family, b, expected):
    res = run_probe(family, b, grid65, IntegratorConfig(s_end=100.0, sample_interval=0.5))
    assert res.label is expected, res.reason
    if expected is SUB:
        # the energy starts below the upper quantum and can only decrease
        assert res.energy < quanta(family)[1]


@pytest.mark.slow
def test_run_probe_without_early_stop(grid33):
    res = run_probe("even", 1.0, grid33, IntegratorConfig(s_end=5.0, sample_interval=1.0),
                    stop_on_decision=False)
    assert res.records[-1].s == 5.0
