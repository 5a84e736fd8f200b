import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import exp1

from polaron.model import ModelConfig, build_discrete_bath
from polaron.static_polaron import (SCALING_P, ConvergenceError, _energy_and_gradient,
                                    delta_r_continuum_implicit, delta_r_scaling_limit,
                                    effective_spin_hamiltonian, fixed_point_residual,
                                    groundstate_polarization, ising_parameters,
                                    renormalization_integral, solve_single_qubit_fixed_point,
                                    solve_variational, spin_operators)

# reference values of the default line (N = 301, L = 10 lambda0, Delta = 1)
FROZEN_DR = {0.1: 0.8028296543444604, 0.3: 0.4321545779209082, 0.6: 0.06528807323174746}


@pytest.mark.parametrize("alpha", sorted(FROZEN_DR))
def test_fixed_point_frozen(alpha):
    sol = solve_single_qubit_fixed_point(build_discrete_bath(ModelConfig(alpha=alpha)), 1.0)
    assert sol.delta_r == pytest.approx(FROZEN_DR[alpha], rel=1e-9)


def test_fixed_point_alpha_zero(default_bath):
    b = build_discrete_bath(ModelConfig(alpha=0.0))
    sol = solve_single_qubit_fixed_point(b, 1.0)
    assert sol.delta_r == 1.0
    assert np.all(sol.displacements == 0)
    assert groundstate_polarization(sol)[0] == -1.0
    assert sol.groundstate_energy == -0.5


def test_fixed_point_solution_structure(default_bath):
    sol = solve_single_qubit_fixed_point(default_bath, 1.0)
    b = default_bath
    m = b.frequencies > 0
    np.testing.assert_allclose(sol.displacements[0, m], b.couplings[0, m] / (b.frequencies[m] + sol.delta_r),
                               rtol=1e-9)
    assert fixed_point_residual(sol.displacements, b, 1.0) < 1e-8 * np.abs(b.couplings).max()
    np.testing.assert_allclose(np.abs(sol.spin_state), [0, 1])
    assert groundstate_polarization(sol)[0] == pytest.approx(-sol.delta_r, abs=1e-14)
    xi, J = ising_parameters(sol.displacements, b)
    assert sol.groundstate_energy == pytest.approx(J[0, 0] - 0.5 * sol.delta_r, abs=1e-13)


def test_fixed_point_zero_gap_is_lang_firsov(default_bath):
    sol = solve_single_qubit_fixed_point(default_bath, 0.0)
    b = default_bath
    m = b.frequencies > 0
    assert sol.degenerate
    assert sol.delta_r == 0.0
    np.testing.assert_allclose(sol.spin_state, [0, 1])
    exact = -np.sum(np.abs(b.couplings[0, m]) ** 2 / b.frequencies[m])
    assert sol.groundstate_energy == pytest.approx(exact, rel=1e-13)


def test_fixed_point_convergence_error(default_bath):
    with pytest.raises(ConvergenceError) as info:
        solve_single_qubit_fixed_point(default_bath, 1.0, max_iter=2)
    assert info.value.last is not None and info.value.residual > 0


def test_sweep_monotone():
    alphas = np.linspace(0, 0.9, 10)
    drs = [solve_single_qubit_fixed_point(build_discrete_bath(ModelConfig(alpha=a)), 1.0).delta_r
           for a in alphas]
    assert np.all(np.diff(drs) < 0)


@pytest.mark.parametrize("alpha", [0.05, 0.3])
def test_variational_matches_fixed_point(alpha):
    b = build_discrete_bath(ModelConfig(alpha=alpha, num_segments=101))
    fp = solve_single_qubit_fixed_point(b, 1.0)
    var = solve_variational(b, [1.0])
    assert var.certified
    assert var.groundstate_energy == pytest.approx(fp.groundstate_energy, abs=1e-10)
    assert var.delta_r == pytest.approx(fp.delta_r, rel=1e-6)


def test_two_emitter_variational_symmetric():
    cfg = ModelConfig(alpha=0.1, qubit_gaps=(1.0, 1.0), qubit_positions=(4.5, 5.5), num_segments=101)
    b = build_discrete_bath(cfg)
    sol = solve_variational(b, cfg.qubit_gaps)
    assert sol.certified
    assert sol.renormalized_gaps[0] == pytest.approx(sol.renormalized_gaps[1], rel=1e-6)
    assert sol.ising_couplings[0, 1] == pytest.approx(sol.ising_couplings[1, 0])
    # ferromagnetic virtual-photon coupling between the emitters
    assert sol.ising_couplings[0, 1] < 0


def test_gradient_matches_finite_differences(mini_bath, rng):
    b = mini_bath(0.2, gaps=(1.0, 1.3), positions=(0.3, 0.55))
    gaps = np.array([1.0, 1.3])
    ops = spin_operators(2)
    f = 0.15 * (rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3)))
    _, grad = _energy_and_gradient(f, b, gaps, ops)
    h = 1e-6
    for i, k in [(0, 0), (0, 2), (1, 1)]:
        for d in (1.0, 1j):
            fp, fm = f.copy(), f.copy()
            fp[i, k] += h * d
            fm[i, k] -= h * d
            num = (_energy_and_gradient(fp, b, gaps, ops)[0]
                   - _energy_and_gradient(fm, b, gaps, ops)[0]) / (2 * h)
            assert num == pytest.approx((2 * grad[i, k] * np.conj(d)).real, abs=1e-8)


def test_spin_hamiltonian_hermitian_and_single_qubit_form(default_bath, rng):
    f = 0.02 * (rng.normal(size=(1, 301)) + 1j * rng.normal(size=(1, 301)))
    H = effective_spin_hamiltonian(f, default_bath, [1.0])
    np.testing.assert_allclose(H, H.conj().T)
    xi, J = ising_parameters(f, default_bath)
    assert H[0, 0].real == pytest.approx(0.5 * math.exp(-xi[0]) + J[0, 0])
    assert H[1, 1].real == pytest.approx(-0.5 * math.exp(-xi[0]) + J[0, 0])
    assert H[0, 1] == 0


def test_dimension_guards(default_bath):
    with pytest.raises(ValueError):
        effective_spin_hamiltonian(np.zeros((2, 301)), default_bath, [1.0, 1.0])
    with pytest.raises(ValueError):
        solve_variational(default_bath, [1.0, 1.0])


# -- continuum ---------------------------------------------------------------------

def closed_form_integral(dr, alpha, wc):
    x = dr / wc
    return alpha * ((1 + x) * math.exp(x) * exp1(x) - 1)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 10.0), st.floats(0.0, 1.0), st.floats(1.0, 1e4))
def test_renormalization_integral_closed_form(dr, alpha, wc):
    assert renormalization_integral(dr, alpha, wc) == pytest.approx(
        closed_form_integral(dr, alpha, wc), rel=1e-8, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.05, 0.2, 0.4, 0.6])
def test_implicit_close_to_scaling(alpha):
    dr = delta_r_continuum_implicit(alpha, 1.0, 1e4)
    assert dr == pytest.approx(delta_r_scaling_limit(alpha, 1.0, 1e4), rel=1e-3)
    # self-consistency of the returned value
    assert dr == pytest.approx(math.exp(-closed_form_integral(dr, alpha, 1e4)), rel=1e-8)


def test_implicit_frozen_value():
    assert delta_r_continuum_implicit(0.5, 1.0, 100.0) == pytest.approx(0.04806371912906827, rel=1e-7)


def test_scaling_limit_edges():
    assert delta_r_scaling_limit(0.0, 1.0, 100.0) == 1.0
    assert delta_r_scaling_limit(1.0, 1.0, 100.0) == 0.0
    assert delta_r_continuum_implicit(1.2, 1.0, 100.0) == 0.0
    assert delta_r_scaling_limit(0.5, 1.0, 100.0) == pytest.approx(SCALING_P / 100)
    with pytest.raises(ValueError):
        delta_r_scaling_limit(-0.1)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 0.95), st.floats(0.0, 0.94))
def test_scaling_limit_monotone_in_alpha(a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-6:
        return
    assert delta_r_scaling_limit(hi, 1.0, 100.0) < delta_r_scaling_limit(lo, 1.0, 100.0)
