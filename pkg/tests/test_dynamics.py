import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from polaron.dynamics import (EffectiveHamiltonian, ExcitationVector, assemble_hp,
                              coherent_incoherent_boundary, diagonalize_mode_mixing, evolve,
                              evolve_series, fit_decay_rate, markovian_rate_lamb, memory_kernel,
                              photon_density, pole_energy, resolvent, resolvent_shift,
                              resolvent_width, spontaneous_emission_run, ww_couplings)
from polaron.model import ModelConfig, build_discrete_bath
from polaron.oracle import FockBasis, build_hamiltonian, exact_evolve, excitation_to_lab
from polaron.static_polaron import (_solution_from_f, solve_single_qubit_fixed_point,
                                    solve_variational)


@pytest.fixture(scope="module")
def single():
    b = build_discrete_bath(ModelConfig(alpha=0.1))
    sol = solve_single_qubit_fixed_point(b, 1.0)
    return b, sol, assemble_hp(sol, b)


def test_single_emitter_couplings(single):
    b, sol, _ = single
    gaps, G, F = ww_couplings(sol, b)
    dr = sol.delta_r
    assert gaps[0] == pytest.approx(dr, rel=1e-12)
    np.testing.assert_allclose(G[:, 0], 2 * dr * b.couplings[0] / (b.frequencies + dr), atol=1e-15)
    f = sol.displacements[0]
    # groundstate has <sigma_z> = -1, so F = +2 Delta_r f f^*
    np.testing.assert_allclose(F, 2 * dr * np.outer(f, f.conj()), atol=1e-15)


def test_mode_mixing_rank_and_trace(single):
    b, sol, _ = single
    F = ww_couplings(sol, b)[2]
    shifts, modes = diagonalize_mode_mixing(F)
    assert np.sum(np.abs(shifts) > 1e-12 * np.abs(shifts).max()) == 1
    assert shifts.sum() == pytest.approx(np.trace(F).real, abs=1e-13)
    np.testing.assert_allclose(modes.conj().T @ F @ modes, np.diag(shifts), atol=1e-13)
    with pytest.raises(ValueError):
        diagonalize_mode_mixing(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("nq", [1, 2])
def test_hp_matches_oracle_projection(mini_bath, rng, nq):
    gaps = (1.0, 1.3)[:nq]
    b = mini_bath(0.2, gaps=gaps, positions=(0.3, 0.55)[:nq], modes=(4, 5))
    basis = FockBasis(2, 12, nq)
    H = build_hamiltonian(basis, b, gaps)
    f = 0.15 * (rng.normal(size=(nq, 2)) + 1j * rng.normal(size=(nq, 2)))
    sol = _solution_from_f(f, b, gaps)
    hp = assemble_hp(sol, b)
    n = 1 + hp.dim
    lab = np.column_stack([excitation_to_lab(basis, sol, np.eye(n)[j]) for j in range(n)])
    proj = lab.conj().T @ (H @ lab)
    assert proj[0, 0].real == pytest.approx(sol.groundstate_energy, abs=1e-10)
    np.testing.assert_allclose(proj[1:, 1:] - sol.groundstate_energy * np.eye(n - 1), hp.matrix,
                               atol=1e-10)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        EffectiveHamiltonian.from_matrix(np.array([[0, 1], [0.5, 0]]), 1)


def test_alpha_zero_survival_constant():
    s = spontaneous_emission_run(ModelConfig(alpha=0.0), t_max=20.0, dt=1.0)
    np.testing.assert_allclose(s.survival, 1.0, atol=1e-14)
    assert not s.revival_warning


def test_revival_warning():
    with pytest.warns(RuntimeWarning):
        s = spontaneous_emission_run(ModelConfig(alpha=0.1, num_segments=51, line_length=2.0),
                                     t_max=20.0)
    assert s.revival_warning


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(-200.0, 200.0))
def test_norm_conserved(single, seed, t):
    b, sol, hp = single
    r = np.random.default_rng(seed)
    v = r.normal(size=hp.dim) + 1j * r.normal(size=hp.dim)
    v /= np.linalg.norm(v)
    state = ExcitationVector(0.0, v[:1], v[1:])
    out = evolve(state, hp, t)
    assert out.norm() == pytest.approx(1.0, abs=1e-10)
    back = evolve(out, hp, -t)
    np.testing.assert_allclose(back.excited_block(), v, atol=1e-9)
    assert out.time == pytest.approx(t)


def test_evolve_series_matches_evolve(single):
    b, sol, hp = single
    psi = ExcitationVector.excited_emitter(sol, b.num_modes)
    amps = evolve_series(psi, hp, [0.0, 3.0])
    np.testing.assert_allclose(amps[1], evolve(psi, hp, 3.0).excited_block(), atol=1e-12)


@pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2])
def test_survival_matches_oracle(mini_bath, alpha):
    b = mini_bath(alpha)
    sol = solve_single_qubit_fixed_point(b, 1.0)
    hp = assemble_hp(sol, b)
    basis = FockBasis(3, 6)
    H = build_hamiltonian(basis, b, [1.0])
    ts = np.linspace(0, 20, 41)
    psi0 = ExcitationVector.excited_emitter(sol, 3)
    p_pol = np.abs(evolve_series(psi0, hp, ts)[:, 0]) ** 2
    lab0 = excitation_to_lab(basis, sol, psi0.as_array())
    p_ex = np.abs(exact_evolve(H, lab0, ts) @ lab0.conj()) ** 2
    assert np.abs(p_pol - p_ex).max() < 0.05


def test_two_emitter_hp_dimensions():
    cfg = ModelConfig(alpha=0.05, qubit_gaps=(1.0, 1.0), qubit_positions=(4.5, 5.5), num_segments=51)
    b = build_discrete_bath(cfg)
    sol = solve_variational(b, cfg.qubit_gaps)
    hp = assemble_hp(sol, b)
    assert hp.num_spin == 3 and hp.dim == 3 + 51
    shifts, _ = diagonalize_mode_mixing(ww_couplings(sol, b)[2])
    assert np.sum(np.abs(shifts) > 1e-10) <= 2


# -- decay fits ----------------------------------------------------------------------

def test_fit_exact_exponential():
    t = np.linspace(0, 50, 501)
    fit = fit_decay_rate(t, np.exp(-0.3 * t))
    assert fit.rate == pytest.approx(0.3, rel=1e-10)
    assert fit.ok
    assert fit.window[1] == pytest.approx(t[np.argmax(np.exp(-0.3 * t) < 1e-3)])


def test_fit_flags():
    t = np.linspace(0, 50, 501)
    wobbly = np.exp(-0.2 * t) * (1 + 0.5 * np.sin(2 * t) ** 2)
    assert "non-monotone" in fit_decay_rate(t, wobbly).flags
    assert "few-points" in fit_decay_rate(t[:40], np.exp(-0.3 * t[:40])).flags
    const = fit_decay_rate(t, np.ones_like(t))
    assert const.rate == pytest.approx(0.0, abs=1e-12) and const.ok


def test_small_alpha_rate_is_fermi_golden_rule():
    s = spontaneous_emission_run(ModelConfig(alpha=0.05))
    fit = fit_decay_rate(s.times, s.survival)
    assert fit.ok
    assert fit.rate == pytest.approx(math.pi * 0.05 * s.solution.delta_r, rel=0.02)


# -- continuum analytics ----------------------------------------------------------------

def test_markov_rate_and_shift():
    g, d = markovian_rate_lamb(0.2, 1.0, 100.0)
    dr = (math.exp(1 + 0.5772156649015329) / 100) ** 0.25
    assert g == pytest.approx(math.pi * 0.2 * dr, rel=1e-12)
    assert d == pytest.approx(-0.2 * dr, rel=1e-12)
    assert markovian_rate_lamb(0.0) == (0.0, -0.0)


def test_memory_kernel_zero_time():
    a, dr, wc = 0.1, 0.5, 10.0
    k0 = memory_kernel(0.0, a, dr, wc)
    ref, _ = integrate.quad(lambda w: 0.5 * a * w * math.exp(-w / wc) * (2 * dr / (w + dr)) ** 2,
                            0, np.inf)
    assert k0.imag == 0.0
    assert k0.real == pytest.approx(ref, rel=1e-8)


def test_memory_kernel_markov_limit():
    # int_0^inf e^{-eta t} K(t) dt against the Lorentzian-smoothed weight, then eta -> 0
    a, dr, wc = 0.1, 0.5, 5.0
    eta = 0.2
    h = lambda w: 0.5 * a * w * math.exp(-w / wc) * (2 * dr / (w + dr)) ** 2
    lhs, _ = integrate.quad(lambda t: math.exp(-eta * t) * memory_kernel(t, a, dr, wc).real,
                            0, 80, limit=400)
    rhs, _ = integrate.quad(lambda w: h(w) * eta / (eta ** 2 + (w - dr) ** 2), 0, 50 * wc,
                            points=[dr], limit=400)
    assert lhs == pytest.approx(rhs, rel=2e-3)
    assert math.pi * h(dr) == pytest.approx(0.5 * math.pi * a * dr * math.exp(-dr / wc))


@pytest.mark.parametrize("alpha", [0.0, 0.1, 0.3, 0.49])
def test_pole(alpha):
    assert pole_energy(alpha, 0.7) / 0.7 == pytest.approx(math.sqrt(1 - 2 * alpha), abs=1e-10)


def test_pole_vanishes_beyond_half():
    assert pole_energy(0.5) == 0.0
    assert pole_energy(0.7) == 0.0
    assert coherent_incoherent_boundary() == pytest.approx(0.5, abs=1e-9)


def test_resolvent_pieces():
    assert resolvent_shift(1.0, 0.1, 1.0) == pytest.approx(-0.1)
    assert resolvent_width(1.0, 0.1, 1.0) == pytest.approx(0.1 * math.pi)
    assert resolvent_width(-1.0, 0.1, 1.0) == 0.0
    with pytest.raises(ValueError):
        resolvent_shift(-1.0, 0.1, 1.0)
    eps = np.linspace(0.1, 2, 50)
    G = resolvent(eps, 0.1, 1.0)
    assert np.all(G.imag <= 0)
    # peak of |G| sits near the pole (below the bare Delta_r)
    fine = np.linspace(0.5, 1.2, 7001)
    peak = fine[np.argmax(np.abs(resolvent(fine, 0.1, 1.0)))]
    assert peak == pytest.approx(pole_energy(0.1, 1.0), abs=0.05)


def test_photon_density_signs(single):
    b, sol, hp = single
    amps = np.zeros(b.num_modes, dtype=complex)
    amps[b.mode_index == 5] = 1.0
    spec = photon_density(ExcitationVector(0.0, np.zeros(1), amps), b)
    assert spec.omega_signed[b.mode_index == -5] < 0 < spec.omega_signed[b.mode_index == 5]
    assert spec.omega_signed[b.mode_index == 0] == 0
    assert spec.density.sum() == pytest.approx(1.0)
