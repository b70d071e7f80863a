import math

import numpy as np
import pytest

from wormhole_wavemaps.diagnostics import compute_records
from wormhole_wavemaps.evolve import (DormandPrince, IntegrationError, IntegratorConfig,
                                      Termination, Trajectory, chain_config, evolve_chain,
                                      evolve_field)
from wormhole_wavemaps.spectral import make_grid
from wormhole_wavemaps.ode_models import ChainState, effective_energy, exact_solution
from wormhole_wavemaps.wavemap_core import initial_data, static_state


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(sample_interval=-1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")


def test_config_roundtrips_to_dict():
    cfg = IntegratorConfig(rel_tol=1e-8, s_end=3.0)
    assert IntegratorConfig(**cfg.to_dict()) == cfg


def test_trajectory_ignores_stale_samples():
    tr = Trajectory()
    tr.append(0.0, "a")
    tr.append(1.0, "b")
    tr.append(0.5, "c")
    assert tr.times == [0.0, 1.0] and tr.final == "b"


@pytest.mark.parametrize("rtol", [1e-6, 1e-9])
def test_dopri_exponential(rtol):
    st = DormandPrince(lambda t, y: -y, 0.0, np.array([1.0]), 2.0, rtol, rtol)
    while not st.done:
        st.step()
    assert st.t == 2.0
    assert abs(st.y[0] - math.exp(-2.0)) <= 50 * rtol


def test_dopri_lands_on_requested_times():
    st = DormandPrince(lambda t, y: np.cos(t) * np.ones(1), 0.0, np.zeros(1), 3.0, 1e-10, 1e-10)
    st.step(stop_at=0.3)
    while st.t < 0.3:
        st.step(stop_at=0.3)
    assert st.t == 0.3
    assert abs(st.y[0] - math.sin(0.3)) <= 1e-9


def test_vacuum_trajectory_is_constant(grid33):
    tr = evolve_field(static_state("even", grid33), grid33, IntegratorConfig(s_end=5.0, sample_interval=1.0))
    assert tr.reason is Termination.REACHED_END
    assert tr.times == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    for st in tr.states:
        assert np.all(st.u == 0.0) and np.all(st.v == 0.0)


def test_static_kink_stays_put(grid65):
    st0 = static_state("odd", grid65)
    tr = evolve_field(st0, grid65, IntegratorConfig(s_end=10.0, sample_interval=1.0))
    assert max(np.max(np.abs(st.u - st0.u)) for st in tr.states) <= 1e-5


def test_explicit_method_agrees_with_radau():
    # the explicit stability guard makes this slow beyond small grids
    grid = make_grid(17)
    st0 = initial_data("odd", 0.2, grid)
    kw = dict(s_end=0.5, sample_interval=0.5, rel_tol=1e-10, abs_tol=1e-10)
    a = evolve_field(st0, grid, IntegratorConfig(**kw))
    b = evolve_field(st0, grid, IntegratorConfig(method="dopri5", **kw))
    assert np.max(np.abs(a.final.u - b.final.u)) <= 1e-7


def test_tolerance_self_consistency(grid33):
    st0 = initial_data("even", 3.0, grid33)
    loose = evolve_field(st0, grid33, IntegratorConfig(s_end=5.0, sample_interval=5.0, rel_tol=1e-7, abs_tol=1e-7))
    tight = evolve_field(st0, grid33, IntegratorConfig(s_end=5.0, sample_interval=5.0, rel_tol=1e-10, abs_tol=1e-10))
    assert np.max(np.abs(loose.final.u - tight.final.u)) <= 1e-4


def test_event_stops_run(grid33):
    tr = evolve_field(initial_data("even", 3.0, grid33), grid33,
                      IntegratorConfig(s_end=20.0, sample_interval=0.5), events=(lambda st: st.s >= 2.0,))
    assert tr.reason is Termination.EVENT and tr.event_index == 0
    assert tr.times[-1] == 2.0


def test_step_failure_raises_with_partial_trajectory(grid33):
    cfg = IntegratorConfig(s_end=1.0, sample_interval=0.1, method="dopri5", max_step=1e-13)
    with pytest.raises(IntegrationError) as info:
        evolve_field(initial_data("even", 1.0, grid33), grid33, cfg)
    assert info.value.trajectory.reason is Termination.STEP_FAILURE
    assert info.value.last_state.s == 0.0


@pytest.mark.slow
def test_pair_forms_and_separates(grid129):
    tr = evolve_field(initial_data("even", 3.8, grid129), grid129, IntegratorConfig(s_end=50.0, sample_interval=0.5))
    recs = [r for r in compute_records(tr, grid129) if r.positions]
    assert recs, "no kink-antikink pair formed"
    late = [r.c1 for r in recs if r.s > 10.0]
    assert np.all(np.diff(late) > 0)


@pytest.mark.parametrize("N", [2, 3])
def test_chain_exact_solution_tracked(N):
    tr = evolve_chain(exact_solution(N, 1.0), chain_config(100.0, 1e-12, sample_interval=1.0))
    assert tr.reason is Termination.REACHED_END and tr.times[-1] == 100.0
    for st in tr.states:
        ref = exact_solution(N, st.t)
        assert abs(st.r[0] / ref.r[0] - 1.0) <= 1e-6


@pytest.mark.parametrize("N", [2, 3])
def test_chain_energy_conserved(N):
    rtol = 1e-10
    s0 = ChainState("even" if N == 2 else "odd", [2.0], [0.6], 1.0)
    e0 = effective_energy(s0)
    tr = evolve_chain(s0, chain_config(50.0, rtol))
    drift = max(abs(effective_energy(st) - e0) for st in tr.states)
    assert drift <= 10 * rtol * (1 + abs(e0))


def test_chain_time_reversal():
    rtol = 1e-10
    s0 = exact_solution(3, 1.0)
    fwd = evolve_chain(s0, chain_config(10.0, rtol)).final
    flipped = ChainState(fwd.parity, fwd.r, -fwd.rdot, fwd.t)
    back = evolve_chain(flipped, chain_config(19.0, rtol)).final
    assert abs(back.r[0] - s0.r[0]) <= 100 * rtol
    assert abs(back.rdot[0] + s0.rdot[0]) <= 100 * rtol


def test_chain_backward_integration():
    tr = evolve_chain(exact_solution(3, 10.0), chain_config(1.0, 1e-11))
    assert tr.times[-1] == 1.0 and len(tr) == 10
    assert abs(tr.final.r[0] - math.sqrt(2.0)) <= 1e-8


def test_chain_from_rest_falls_inward():
    tr = evolve_chain(ChainState("even", [1.0], [0.0], 0.0), chain_config(5.0, 1e-10, sample_interval=0.1))
    assert tr.states[1].r[0] < 1.0
    assert tr.reason is Termination.EVENT and "collapse" in tr.detail


def test_chain_ordering_guard():
    tr = evolve_chain(ChainState("odd", [2.0, 2.1], [0.0, -1.0], 0.0), chain_config(5.0, 1e-10, sample_interval=0.1))
    assert tr.reason is Termination.EVENT and "ordering" in tr.detail


def test_chain_rejects_bad_ordering():
    with pytest.raises(ValueError):
        evolve_chain(ChainState("odd", [3.0, 2.0], [0.0, 0.0]), chain_config(1.0))
