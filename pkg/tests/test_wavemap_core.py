import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wormhole_wavemaps.evolve import IntegratorConfig, evolve_field
from wormhole_wavemaps.spectral import interpolate_many, make_grid
from wormhole_wavemaps.wavemap_core import (FieldState, HyperboloidalSystem, ModelParams,
                                            NonFiniteStateError, Parity, chain_profile,
                                            enforce_boundary, initial_data, initial_data_even,
                                            initial_data_odd, kink, kink_in_y, odd_profile,
                                            potential_energy, rhs, static_state, x_of_y,
                                            y_of_x)


def _x(grid):
    y = np.clip(grid.nodes, -1 + 1e-16, 1 - 1e-16)
    return x_of_y(y)


def test_kink_centre_value():
    assert kink(0.0, 0.0, 2) == pytest.approx(math.pi / 2, abs=1e-15)


def test_kink_limits():
    assert kink(60.0) == pytest.approx(math.pi, abs=1e-15)
    assert kink(-60.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("x", [-1.0, 0.3, 2.0])
def test_kink_static_equation(x):
    # Q'' = (k^2/2) sin 2Q, with Q' = k sin Q so Q'' = k^2 sin Q cos Q
    q = kink(x)
    qp = 2.0 * math.sin(q)
    qpp = 2.0 * math.cos(q) * qp
    assert abs(qpp - 2.0 * math.sin(2 * q)) <= 1e-12
    # compare the closed form against a finite-difference second derivative
    h = 1e-4
    fd = (kink(x + h) - 2 * kink(x) + kink(x - h)) / h**2
    assert abs(fd - 2.0 * math.sin(2 * q)) <= 1e-6


def test_kink_in_y_matches_kink():
    y = np.linspace(-0.95, 0.95, 41)
    np.testing.assert_allclose(kink_in_y(y), kink(x_of_y(y)), atol=1e-13)
    assert kink_in_y(np.array([1.0]))[0] == math.pi


@given(st.floats(-30, 30))
def test_coordinate_roundtrip(x):
    assert float(x_of_y(y_of_x(x))) == pytest.approx(x, rel=1e-9, abs=1e-9)


def test_chain2_centre_value():
    expected = 2 * math.atan(math.exp(10)) - 2 * math.atan(math.exp(-10))
    assert abs(chain_profile(2, [5.0], 0.0) - expected) <= 1e-14
    assert abs(expected - (math.pi - 4 * math.exp(-10))) <= 1e-12


def test_chain3_literal_centre_value():
    expected = 2 * math.atan(1) - 2 * math.atan(math.exp(12)) - 2 * math.atan(math.exp(-12))
    assert abs(chain_profile(3, [6.0], 0.0, literal=True) - expected) <= 1e-14
    assert abs(chain_profile(3, [6.0], 0.0) + expected) <= 1e-14


def test_chain_orientation_limits():
    for N, centers, far in ((2, [3.0], 0.0), (3, [3.0], math.pi), (4, [2.0, 6.0], 0.0),
                            (5, [2.0, 6.0], math.pi)):
        assert chain_profile(N, centers, 40.0) == pytest.approx(far, abs=1e-12)
        assert chain_profile(N, centers, -40.0) == pytest.approx(0.0, abs=1e-12)


def test_chain2_crossings_near_centres():
    from scipy.optimize import brentq

    f = lambda x: chain_profile(2, [5.0], x) - math.pi / 2  # noqa: E731
    for guess in (5.0, -5.0):
        root = brentq(f, guess - 1, guess + 1, xtol=1e-14)
        assert abs(abs(root) - 5.0) <= 2 * math.exp(-10)


@pytest.mark.parametrize("N,centers", [(1, []), (3, [1.0, 2.0]), (2, [-1.0]), (4, [3.0, 2.0])])
def test_chain_profile_rejects_bad_input(N, centers):
    with pytest.raises(ValueError):
        chain_profile(N, centers, 0.0)


def test_potential_vacuum(grid65):
    st0 = static_state("even", grid65)
    assert potential_energy(st0, grid65) == 0.0


def test_potential_kink_full_line():
    g = make_grid(129, full_line=True)
    st0 = FieldState(0.0, kink_in_y(g.nodes), np.zeros(g.n), Parity.ODD)
    assert abs(potential_energy(st0, g) - 4.0) <= 1e-8


def test_potential_kink_half_domain(grid129):
    assert abs(potential_energy(static_state("odd", grid129), grid129) - 4.0) <= 1e-8


def test_potential_chain2(grid129):
    u = chain_profile(2, [4.0], _x(grid129))
    u[-1] = 0.0
    st0 = FieldState(0.0, u, np.zeros_like(u), Parity.EVEN)
    assert abs(potential_energy(st0, grid129) - (8 - 16 * math.exp(-16))) <= 1e-6


def test_rhs_vacuum_exact(grid65):
    du, dv = rhs(static_state("even", grid65), grid65)
    assert np.all(du == 0.0) and np.all(dv == 0.0)


def test_rhs_kink_static_residual(grid65):
    du, dv = rhs(static_state("odd", grid65), grid65)
    assert np.max(np.abs(du)) == 0.0
    assert np.max(np.abs(dv)) <= 1e-6


def _kink_residual(n):
    g = make_grid(n)
    return float(np.max(np.abs(rhs(static_state("odd", g), g)[1])))


def test_kink_residual_decays_spectrally():
    # 33 -> 49 shows the spectral decay; beyond that the residual sits on the
    # round-off floor of the differentiation matrices
    assert _kink_residual(49) <= 1e-3 * _kink_residual(33)
    assert _kink_residual(97) <= 1e-8


def test_rhs_rejects_nan(grid33):
    st0 = static_state("odd", grid33)
    u = st0.u.copy()
    u[4] = np.nan
    with pytest.raises(NonFiniteStateError):
        rhs(st0.with_values(0.0, u, st0.v), grid33)


def test_only_k2_supported(grid33):
    with pytest.raises(NotImplementedError):
        HyperboloidalSystem(grid33, Parity.ODD, ModelParams(k=3))


@pytest.mark.parametrize("k", [1, 2.5])
def test_model_params_validation(k):
    with pytest.raises(ValueError):
        ModelParams(k=k)


def test_enforce_boundary_pins_values(grid33):
    st0 = initial_data("odd", 0.3, grid33)
    u = st0.u + 0.1
    fixed = enforce_boundary(st0.with_values(0.0, u, st0.v + 0.2), grid33)
    assert fixed.u[-1] == math.pi and fixed.v[-1] == 0.0
    assert fixed.u[0] == math.pi / 2


def test_initial_even_zero_amplitude_is_vacuum(grid33):
    st0 = initial_data_even(0.0, grid33)
    assert np.all(st0.u == 0) and np.all(st0.v == 0)


@given(st.floats(0.0, 10.0))
def test_initial_even_peak(b):
    g = make_grid(17)
    st0 = initial_data_even(b, g)
    assert st0.v[0] == pytest.approx(b, rel=1e-15, abs=0)
    assert st0.v[-1] == 0.0 and np.all(st0.u == 0.0)


def test_initial_even_negative_amplitude(grid33):
    with pytest.raises(ValueError):
        initial_data_even(-1.0, grid33)


@given(st.floats(-2.0, 2.0))
def test_initial_odd_boundary_values(b):
    g = make_grid(17)
    st0 = initial_data_odd(b, g)
    assert st0.u[0] == math.pi / 2 and st0.u[-1] == math.pi
    assert np.all(st0.v == 0.0)


def test_initial_odd_zero_amplitude_monotone():
    y = np.linspace(0, 1, 200)
    assert np.all(np.diff(odd_profile(0.0, y)) > 0)


def test_parity_parse():
    assert Parity.parse("OddCentered") is Parity.ODD
    assert Parity.parse("even") is Parity.EVEN
    with pytest.raises(ValueError):
        Parity.parse("sideways")


def test_degree_conserved_during_evolution(grid65):
    tr = evolve_field(initial_data("odd", 0.3, grid65), grid65,
                      IntegratorConfig(s_end=10.0, sample_interval=0.5))
    for st0 in tr.states:
        assert abs(st0.u[-1] - math.pi) <= 1e-8 and abs(st0.v[-1]) <= 1e-8


@pytest.mark.slow
def test_half_domain_matches_full_line():
    n = 33
    half, full = make_grid(n), make_grid(2 * n - 1, full_line=True)
    cfg = IntegratorConfig(s_end=5.0, sample_interval=5.0, rel_tol=1e-12, abs_tol=1e-12)
    uh = evolve_field(initial_data("even", 2.0, half), half, cfg).final.u
    uf = evolve_field(initial_data("even", 2.0, full), full, cfg).final.u
    pts = np.linspace(0, 1, 50)
    assert np.max(np.abs(interpolate_many(full, uf, pts) - interpolate_many(half, uh, pts))) <= 1e-8


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 0.45))
def test_bogomolnyi_bound_for_degree_one_states(b):
    g = make_grid(65)
    assert potential_energy(initial_data_odd(b, g), g) >= 4.0 - 1e-6
