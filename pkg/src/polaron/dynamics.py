"""
Single-excitation dynamics on top of the polaron groundstate.

The state space is spanned by the polaron groundstate, the excited
eigenstates of the effective spin Hamiltonian (photon vacuum), and one
photon in any mode on top of the spin groundstate.  Within the last two
blocks the dynamics is generated by the Hermitian matrix ``H_P`` built by
:func:`assemble_hp`; the groundstate amplitude is stationary.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .model import ConfigError, DiscreteBath, ModelConfig, build_discrete_bath
from .static_polaron import (PolaronSolution, _cross_phases, _dressed_z, delta_r_scaling_limit,
                             solve_single_qubit_fixed_point, solve_variational, spin_operators)

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class ExcitationVector:
    """Amplitudes of a single-excitation polaron state at ``time``."""

    gs_amp: complex
    spin_amps: np.ndarray
    photon_amps: np.ndarray
    time: float = 0.0

    def as_array(self):
        return np.concatenate([[self.gs_amp], self.spin_amps, self.photon_amps])

    def excited_block(self):
        return np.concatenate([self.spin_amps, self.photon_amps])

    def norm(self):
        return float(np.linalg.norm(self.as_array()))

    def survival(self):
        """Total spin-excitation population ``sum_s |alpha_s|^2``."""
        return float(np.sum(np.abs(self.spin_amps) ** 2))

    @classmethod
    def excited_emitter(cls, solution: PolaronSolution, num_modes, level=0):
        """Spin excitation ``level`` (0 = lowest) with empty photon modes."""
        ne = solution.spin_energies.size - 1
        spin = np.zeros(ne, dtype=complex)
        spin[level] = 1.0
        return cls(0.0, spin, np.zeros(num_modes, dtype=complex))


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """``H_P`` on the spin-excitation plus one-photon block.

    Rows/columns: ``num_spin`` spin excitations first, then the photon modes.
    Energies are measured from the polaron groundstate energy.
    """

    matrix: np.ndarray
    num_spin: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, matrix, num_spin):
        matrix = np.asarray(matrix, dtype=complex)
        err = np.abs(matrix - matrix.conj().T).max(initial=0.0)
        scale = max(1.0, np.abs(matrix).max(initial=0.0))
        if err > HERMITICITY_TOL * scale:
            raise ValueError(f"effective Hamiltonian not Hermitian (deviation {err:.2e})")
        matrix = 0.5 * (matrix + matrix.conj().T)
        E, V = np.linalg.eigh(matrix)
        return cls(matrix, num_spin, E, V)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def propagator(self, t):
        return (self.eigenvectors * np.exp(-1j * self.eigenvalues * t)) @ self.eigenvectors.conj().T


def ww_couplings(solution: PolaronSolution, bath: DiscreteBath):
    """Couplings of the effective Wigner-Weisskopf problem.

    Returns
    -------
    spin_gaps : ndarray, shape (N_e,)
        Excitation energies ``Delta_s`` of the spin Hamiltonian.
    spin_photon : ndarray, shape (M, N_e)
        ``G[k, s]``: matrix element ``<1_k, gs| H |s>`` between spin excitation
        ``s`` and a photon in mode ``k`` on the spin groundstate.  For one emitter
        ``G_k = 2 Delta_r g_k / (w_k + Delta_r)``.
    photon_photon : ndarray, shape (M, M)
        ``F[k, k']`` such that the photon block is ``w_k delta_kk' + F[k, k']``;
        for one emitter ``-2 Delta_r f_k f_k'^*``.
    """
    f = solution.displacements
    if f.shape != bath.couplings.shape:
        raise ConfigError("polaron solution does not belong to this bath")
    n = f.shape[0]
    vals = solution.spin_energies
    vecs = solution.spin_vectors
    gs = vecs[:, 0]
    exc = vecs[:, 1:]
    xs, zs = spin_operators(n)
    qz = _dressed_z(_cross_phases(f), xs, zs)
    h = bath.couplings - bath.frequencies[None, :] * f
    lam = solution.gaps * np.exp(-solution.renorm_exponents)

    # <psi_s| X_i |gs> and <psi_s| X_i Q_i |gs>
    x_el = np.array([exc.conj().T @ (xs[i] @ gs) for i in range(n)])
    xq_el = np.array([exc.conj().T @ (xs[i] @ qz[i] @ gs) for i in range(n)])
    spin_photon = (h.T @ x_el.conj() - (lam[:, None] * f).T @ xq_el.conj())
    qz_gs = np.array([np.vdot(gs, qz[i] @ gs).real for i in range(n)])
    photon_photon = -2.0 * np.einsum("i,ik,il->kl", lam * qz_gs, f, f.conj())
    return vals[1:] - vals[0], spin_photon, photon_photon


def assemble_hp(solution: PolaronSolution, bath: DiscreteBath):
    """Effective single-excitation Hamiltonian ``H_P`` (ground energy removed)."""
    gaps, G, F = ww_couplings(solution, bath)
    ne, M = gaps.size, bath.num_modes
    H = np.zeros((ne + M, ne + M), dtype=complex)
    H[:ne, :ne] = np.diag(gaps)
    H[ne:, :ne] = G
    H[:ne, ne:] = G.conj().T
    H[ne:, ne:] = np.diag(bath.frequencies) + F
    return EffectiveHamiltonian.from_matrix(H, ne)


def diagonalize_mode_mixing(photon_photon):
    """Eigen-decomposition of the photon-photon term.

    Returns ``(shifts, modes)`` with ``modes^dag F modes = diag(shifts)``.
    ``F`` has rank at most the number of emitters, so all but that many
    shifts vanish.
    """
    F = np.asarray(photon_photon)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError("photon-photon term must be square")
    if np.abs(F - F.conj().T).max(initial=0.0) > HERMITICITY_TOL * max(1.0, np.abs(F).max(initial=0.0)):
        raise ValueError("photon-photon term not Hermitian")
    shifts, modes = np.linalg.eigh(0.5 * (F + F.conj().T))
    return shifts, modes


def evolve(state: ExcitationVector, hp: EffectiveHamiltonian, t):
    """Propagate a single-excitation state by ``t`` (any sign)."""
    if not math.isfinite(t):
        raise ValueError("time must be finite")
    v = state.excited_block()
    if v.size != hp.dim:
        raise ValueError("state does not match the effective Hamiltonian")
    c = hp.eigenvectors.conj().T @ v
    out = hp.eigenvectors @ (np.exp(-1j * hp.eigenvalues * t) * c)
    return ExcitationVector(state.gs_amp, out[: hp.num_spin], out[hp.num_spin:], state.time + t)


def evolve_series(state: ExcitationVector, hp: EffectiveHamiltonian, times):
    """Excited-block amplitudes at every ``t`` in ``times`` (rows)."""
    times = np.asarray(times, dtype=float)
    c = hp.eigenvectors.conj().T @ state.excited_block()
    return (hp.eigenvectors @ (np.exp(-1j * np.outer(hp.eigenvalues, times)) * c[:, None])).T


def solve_polaron(config: ModelConfig, bath: DiscreteBath | None = None, **kw):
    """Polaron groundstate for ``config`` (fixed point for one emitter)."""
    bath = build_discrete_bath(config) if bath is None else bath
    if config.num_qubits == 1:
        return solve_single_qubit_fixed_point(bath, config.qubit_gaps[0], **kw)
    return solve_variational(bath, config.qubit_gaps, **kw)


@dataclass(frozen=True)
class EmissionSeries:
    """Spontaneous-emission time series."""

    times: np.ndarray
    survival: np.ndarray
    densities: np.ndarray
    norms: np.ndarray
    solution: PolaronSolution = field(repr=False)
    bath: DiscreteBath = field(repr=False)
    revival_warning: bool = False

    @property
    def final_density(self):
        return self.densities[-1]


def revival_time(config: ModelConfig):
    """``0.8 L / v``: beyond this the emitted field returns around the ring."""
    return 0.8 * config.length / config.speed


def spontaneous_emission_run(config: ModelConfig, t_max=None, dt=0.1, alpha=None):
    """Decay of the lowest spin excitation into the line.

    ``alpha`` overrides ``config.alpha``.  ``t_max`` defaults to the revival
    time; longer runs are allowed but flagged with ``revival_warning``.
    """
    if alpha is not None:
        config = config.replace(alpha=alpha)
    if dt <= 0:
        raise ConfigError("dt must be positive")
    t_rev = revival_time(config)
    t_max = t_rev if t_max is None else float(t_max)
    warn = t_max > t_rev
    if warn:
        warnings.warn(f"t_max={t_max:g} exceeds the revival guard {t_rev:g}", RuntimeWarning)
    bath = build_discrete_bath(config)
    sol = solve_polaron(config, bath)
    hp = assemble_hp(sol, bath)
    times = np.arange(0.0, t_max + 0.5 * dt, dt)
    psi0 = ExcitationVector.excited_emitter(sol, bath.num_modes)
    amps = evolve_series(psi0, hp, times)
    ne = hp.num_spin
    dens = np.abs(amps[:, ne:]) ** 2
    surv = np.sum(np.abs(amps[:, :ne]) ** 2, axis=1)
    norms = np.sqrt(np.sum(np.abs(amps) ** 2, axis=1))
    return EmissionSeries(times, surv, dens, norms, sol, bath, warn)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    rms_residual: float
    window: tuple
    num_points: int
    flags: tuple = ()

    @property
    def ok(self):
        return not self.flags


def fit_decay_rate(times, survival, t_min=5.0, floor=1e-3, max_rms=0.05, ripple=0.02):
    """Fit ``P(t) ~ A exp(-gamma t)`` on ``[t_min, t_floor]``.

    ``t_floor`` is the first time ``P`` drops below ``floor``.  Quality flags:
    ``"few-points"`` (< 5 samples), ``"non-monotone"`` (``log P`` rises by
    more than ``ripple`` inside the window), ``"poor-fit"`` (rms of the log
    residual above ``max_rms``).
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(survival, dtype=float)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError("times and survival must be matching 1-d arrays")
    below = np.flatnonzero(p < floor)
    t_end = t[below[0]] if below.size else t[-1]
    sel = (t >= t_min) & (t <= t_end) & (p > 0)
    flags = []
    if sel.sum() < 5:
        flags.append("few-points")
        if sel.sum() < 2:
            return DecayFit(float("nan"), float("nan"), float("nan"), (t_min, t_end),
                            int(sel.sum()), tuple(flags))
    ts, lp = t[sel], np.log(p[sel])
    slope, icpt = np.polyfit(ts, lp, 1)
    rms = float(np.sqrt(np.mean((lp - (slope * ts + icpt)) ** 2)))
    if np.any(np.diff(lp) > ripple):
        flags.append("non-monotone")
    if rms > max_rms:
        flags.append("poor-fit")
    return DecayFit(float(-slope), float(icpt), rms, (float(t_min), float(t_end)),
                    int(sel.sum()), tuple(flags))


# -- continuum results ----------------------------------------------------------

def markovian_rate_lamb(alpha, delta=1.0, omega_c=100.0, delta_r=None):
    """Markovian decay rate and Lamb shift ``(gamma_1, delta_1)``.

    ``gamma_1 = J(Delta_r) = pi alpha Delta_r`` and ``delta_1 = -alpha Delta_r``
    with ``Delta_r`` from the scaling limit unless given.
    """
    dr = delta_r_scaling_limit(alpha, delta, omega_c) if delta_r is None else float(delta_r)
    return math.pi * alpha * dr, -alpha * dr


def _kernel_weight(w, alpha, delta_r, omega_c):
    return 0.5 * alpha * w * math.exp(-w / omega_c) * (2 * delta_r / (w + delta_r)) ** 2


def memory_kernel(t, alpha, delta_r, omega_c, rtol=1e-9):
    """``K(t) = int dw J(w)/(2 pi) (2 Delta_r/(w+Delta_r))^2 e^{-i(w-Delta_r)t}``.

    ``J = pi alpha w e^{-w/w_c}``; the integral runs to ``50 w_c``.
    ``int_0^inf Re K = J(Delta_r)/2`` in the Markov limit.
    """
    t = float(t)
    upper = 50.0 * omega_c
    args = (alpha, delta_r, omega_c)
    if t == 0.0:
        re, _ = integrate.quad(_kernel_weight, 0.0, upper, args=args, epsrel=rtol, limit=500,
                               points=[delta_r, omega_c])
        return complex(re)
    c, _ = integrate.quad(_kernel_weight, 0.0, upper, args=args, weight="cos", wvar=t,
                          epsrel=rtol, limit=2000)
    s, _ = integrate.quad(_kernel_weight, 0.0, upper, args=args, weight="sin", wvar=t,
                          epsrel=rtol, limit=2000)
    return complex(np.exp(1j * delta_r * t) * (c - 1j * s))


def resolvent_shift(eps, alpha, delta_r):
    """``delta(eps) = -2 alpha Delta_r^2 / (Delta_r + eps)``."""
    eps = np.asarray(eps, dtype=float)
    if np.any(np.isclose(eps, -delta_r)):
        raise ValueError("resolvent shift is singular at eps = -Delta_r")
    out = -2.0 * alpha * delta_r ** 2 / (delta_r + eps)
    return out if out.ndim else float(out)


def resolvent_width(eps, alpha, delta_r, omega_c=math.inf):
    """``gamma(eps) = J(eps) (2 Delta_r/(eps+Delta_r))^2``, zero for ``eps <= 0``."""
    eps = np.asarray(eps, dtype=float)
    e = np.maximum(eps, 0.0)
    J = math.pi * alpha * e
    if math.isfinite(omega_c):
        J = J * np.exp(-e / omega_c)
    out = np.where(eps > 0, J * (2 * delta_r / (e + delta_r)) ** 2, 0.0)
    return out if out.ndim else float(out)


def resolvent(eps, alpha, delta_r, omega_c=math.inf):
    """``G(eps) = 1/(eps - Delta_r - delta(eps) + i gamma(eps)/2)``."""
    return 1.0 / (np.asarray(eps) - delta_r - resolvent_shift(eps, alpha, delta_r)
                  + 0.5j * resolvent_width(eps, alpha, delta_r, omega_c))


def pole_energy(alpha, delta_r=1.0):
    """Real pole ``eps_m`` of the resolvent (``0`` when none is left).

    Solves ``eps - Delta_r - delta(eps) = 0`` for ``eps >= 0``, i.e.
    ``eps_m = Delta_r sqrt(1 - 2 alpha)`` for ``alpha <= 1/2``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if delta_r <= 0:
        return 0.0

    def h(e):
        return e - delta_r - resolvent_shift(e, alpha, delta_r)

    if h(0.0) >= 0:
        return 0.0
    return optimize.brentq(h, 0.0, delta_r, xtol=1e-15 * delta_r, rtol=4 * np.finfo(float).eps, maxiter=200)


def coherent_incoherent_boundary(tol=1e-12):
    """Coupling at which the resolvent loses its positive real pole."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pole_energy(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PhotonSpectrum:
    omega_signed: np.ndarray
    density: np.ndarray


def photon_density(state: ExcitationVector, bath: DiscreteBath):
    """``|alpha_k|^2`` against ``sign(k) w_k`` (negative = left-moving)."""
    dens = np.abs(state.photon_amps) ** 2
    if dens.size != bath.num_modes:
        raise ValueError("state does not match the bath")
    return PhotonSpectrum(np.sign(bath.momenta) * bath.frequencies, dens)
