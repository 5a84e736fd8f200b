"""
Two emitters on a continuum line: Markovian collective analytics.

Distances enter through ``Delta_r zeta d / v``; the pair's renormalised gap
and Ising coupling come from the two analytic limits (well separated or
closely spaced emitters).
"""
from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .static_polaron import EULER_GAMMA, SCALING_P

SERIES_RADIUS = 4.0
SHORT_DISTANCE_MIN_RATIO = 10.0


class Regime(str, enum.Enum):
    LARGE_DISTANCE = "large"
    SHORT_DISTANCE = "short"


# -- exponential integral --------------------------------------------------------

def _e1_series(z):
    # E1(z) = -gamma - log z - sum_{n>=1} (-z)^n / (n n!)
    total = 0j
    term = 1 + 0j
    for n in range(1, 500):
        term *= -z / n
        add = term / n
        total += add
        if abs(add) <= 1e-17 * max(abs(total), 1e-300):
            break
    return -EULER_GAMMA - cmath.log(z) - total


def _e1_continued_fraction_scaled(z):
    # e^z E1(z) = 1 / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...))), modified Lentz
    tiny = 1e-300
    b = z + 1.0
    f = b if b != 0 else tiny
    C, D = f, 0j
    for n in range(1, 10_000):
        a = -float(n * n)
        b += 2.0
        D = b + a * D
        D = 1.0 / (D if D != 0 else tiny)
        C = b + a / (C if C != 0 else tiny)
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return 1.0 / f


def _use_series(z):
    # near the negative axis the series cancellation costs ~exp(|z| + Re z)
    return abs(z) <= SERIES_RADIUS or (z.real < 0 and abs(z) + z.real <= 2.0)


def exponential_integral_e1(z):
    """Principal-branch ``E_1(z) = int_z^inf e^{-t}/t dt`` for complex ``z``.

    Power series for ``|z| <= 4`` and in a thin strip around the negative
    real axis (``|z| + Re z <= 2``), continued fraction elsewhere.  On the cut the value for ``Im z = +0``
    is returned (``E_1(-x) = -Ei(x) - i pi``).
    """
    z = complex(z)
    if z == 0:
        raise ValueError("E1 has a logarithmic singularity at z = 0")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("non-finite argument")
    if z.imag == 0.0 and z.real < 0:
        z = complex(z.real, 0.0)
    if _use_series(z):
        return _e1_series(z)
    return cmath.exp(-z) * _e1_continued_fraction_scaled(z)


def _e1_scaled(z):
    """``e^z E_1(z)``, computed without overflow for large ``|z|``."""
    z = complex(z)
    if z != 0 and not _use_series(z):
        return _e1_continued_fraction_scaled(z)
    return exponential_integral_e1(z) * cmath.exp(z)


def f_real(z):
    """``Re{E_1(z) e^z}``."""
    return _e1_scaled(z).real


def f_imag(z):
    """``Im{E_1(z) e^z}``."""
    return _e1_scaled(z).imag


# -- parameters -----------------------------------------------------------------

@dataclass(frozen=True)
class TwoEmitterParams:
    """Pair parameters entering the Markovian two-emitter equations."""

    distance: float
    delta_r: float
    ising: float
    alpha: float
    omega_c: float = math.inf
    v: float = 1.0

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError("distance must be non-negative")
        if self.delta_r < 0 or self.alpha < 0 or self.v <= 0:
            raise ValueError("need delta_r >= 0, alpha >= 0 and v > 0")

    @property
    def localized(self):
        return self.delta_r <= 0.0

    @property
    def zeta(self):
        if self.localized:
            return math.inf
        return math.sqrt(1.0 + (self.ising / self.delta_r) ** 2)

    @property
    def eta(self):
        return eta_of_zeta(self.zeta)

    @property
    def chi(self):
        return chi_of_zeta(self.zeta)


def eta_of_zeta(zeta):
    """``{sqrt(z+1)(1/z+1) + sqrt(z-1)(1/z-1)} / sqrt(2z)``."""
    return ((math.sqrt(zeta + 1) * (1 / zeta + 1) + math.sqrt(max(zeta - 1, 0.0)) * (1 / zeta - 1))
            / math.sqrt(2 * zeta))


def chi_of_zeta(zeta):
    """``zeta eta / (1 + zeta^2)``."""
    return zeta * eta_of_zeta(zeta) / (1 + zeta * zeta)


class LimitParams(NamedTuple):
    ising: float
    delta_r: float
    localized: bool


def limit_params(alpha, delta=1.0, omega_c=100.0, regime=Regime.LARGE_DISTANCE):
    """Ising coupling and renormalised gap in the two analytic limits.

    Large distance: ``J_I = 0`` and the single-emitter law.  Short distance:
    ``J_I = -alpha w_c`` and ``Delta (p0 Delta/w_c)^{2 alpha/(1-2 alpha)}``
    with ``p0 = sqrt(p/alpha)``; a warning is issued when
    ``alpha w_c / Delta < 10`` where this limit is not reliable.
    """
    regime = Regime(regime)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if regime is Regime.LARGE_DISTANCE:
        if alpha >= 1:
            return LimitParams(0.0, 0.0, True)
        return LimitParams(0.0, delta * (SCALING_P * delta / omega_c) ** (alpha / (1 - alpha)), False)
    ising = -alpha * omega_c
    if alpha * omega_c / delta < SHORT_DISTANCE_MIN_RATIO:
        warnings.warn("short-distance limit needs alpha*omega_c/Delta >> 1", RuntimeWarning)
    if alpha >= 0.5:
        return LimitParams(ising, 0.0, True)
    if alpha == 0:
        return LimitParams(0.0, float(delta), False)
    p0 = math.sqrt(SCALING_P / alpha)
    return LimitParams(ising, delta * (p0 * delta / omega_c) ** (2 * alpha / (1 - 2 * alpha)), False)


def params_for(alpha, distance, delta=1.0, omega_c=100.0, regime=Regime.LARGE_DISTANCE, v=1.0):
    lim = limit_params(alpha, delta, omega_c, regime)
    return TwoEmitterParams(distance, lim.delta_r, lim.ising, alpha, omega_c, v)


def _spectral(w, alpha, omega_c, with_cutoff):
    J = math.pi * alpha * w
    if with_cutoff and math.isfinite(omega_c):
        J *= math.exp(-w / omega_c)
    return J


def collective_rates(params: TwoEmitterParams, with_cutoff=False):
    """``(gamma_i, gamma_12)`` with ``gamma_i = J(Delta_r zeta) chi^2``.

    ``J = pi alpha w`` (scaling limit); ``with_cutoff`` adds ``e^{-w/w_c}``.
    """
    if params.localized:
        return 0.0, 0.0
    zeta = params.zeta
    gi = _spectral(params.delta_r * zeta, params.alpha, params.omega_c, with_cutoff) * params.chi ** 2
    return gi, gi * math.cos(params.delta_r * zeta * params.distance / params.v)


def scaling_rates(alpha, delta=1.0, omega_c=100.0, regime=Regime.LARGE_DISTANCE):
    """Individual decay rate in the scaling limit of either regime."""
    regime = Regime(regime)
    lim = limit_params(alpha, delta, omega_c, regime)
    if lim.localized or alpha == 0:
        return 0.0
    if regime is Regime.LARGE_DISTANCE:
        return math.pi * alpha * lim.delta_r
    zeta0 = math.sqrt(1 + (alpha * omega_c / lim.delta_r) ** 2)
    return math.pi * alpha * chi_of_zeta(zeta0) ** 2 * zeta0 * lim.delta_r


def f_lamb(x, zeta):
    """``zeta^2/(1+zeta^2) Re{e^x E1(x) - e^{-x zeta^2} E1(-x zeta^2)}``."""
    z2 = zeta * zeta
    return z2 / (1 + z2) * (_e1_scaled(x) - _e1_scaled(-x * z2)).real


def lamb_shifts_two(params: TwoEmitterParams, scaling=False):
    """Lamb shift ``delta_1 = delta_2``.

    With ``scaling=True`` the cutoff correction is replaced by its
    ``Delta_r << w_c`` limit ``zeta^2 log(zeta^2)/(1+zeta^2)``.
    """
    if params.localized or params.alpha == 0:
        return 0.0
    zeta = params.zeta
    pref = -params.alpha * params.eta * params.chi / 2 * params.delta_r
    if scaling:
        z2 = zeta * zeta
        return pref * (1 - z2 * math.log(z2) / (1 + z2))
    return pref * (1 - f_lamb(params.delta_r / (params.omega_c * zeta), zeta))


def delta_g12(z, params: TwoEmitterParams):
    """Correction ``-(chi^2 alpha Delta_r/2)(1 + Im z f_I(z) - zeta(f_R(z) - f_R(-z^* zeta^2)))``."""
    zeta = params.zeta
    z = complex(z)
    return -(params.chi ** 2 * params.alpha * params.delta_r / 2) * (
        1 + z.imag * f_imag(z) - zeta * (f_real(z) - f_real(-z.conjugate() * zeta * zeta)))


def coherent_coupling_g12(params: TwoEmitterParams, distance=None):
    """Photon-mediated coupling ``g_12`` (Ising part plus real-photon exchange)."""
    d = params.distance if distance is None else float(distance)
    if params.localized:
        return complex(params.ising)
    zeta = params.zeta
    dr = params.delta_r
    phase = dr * zeta * d / params.v
    z = complex(dr / (zeta * params.omega_c), dr * d / (params.v * zeta))
    return complex(params.ising + 0.5 * math.pi * zeta * params.chi ** 2 * params.alpha * dr
                   * math.sin(phase) + delta_g12(z, params))


def markov_matrix(delta_i, gamma_i, g12, gamma_12):
    """Generator ``M`` of ``i d/dt alpha' = M alpha'``."""
    diag = delta_i - 0.5j * gamma_i
    off = g12 - 0.5j * gamma_12
    return np.array([[diag, off], [off, diag]], dtype=complex)


def evolve_two_qubit_markovian(delta_i, gamma_i, g12, gamma_12, alpha0, t):
    """Amplitudes ``alpha'(t) = exp(-i M t) alpha'(0)``."""
    M = markov_matrix(delta_i, gamma_i, g12, gamma_12)
    return expm(-1j * M * float(t)) @ np.asarray(alpha0, dtype=complex)


def collective_eigenrates(delta_i, gamma_i, g12, gamma_12):
    """Population decay rates of the two eigenmodes, ``-2 Im`` of the eigenvalues (descending)."""
    ev = np.linalg.eigvals(markov_matrix(delta_i, gamma_i, g12, gamma_12))
    return np.sort(-2.0 * ev.imag)[::-1]


@dataclass(frozen=True)
class PairAnalytics:
    alpha: float
    distance: float
    gamma_i: float
    gamma_12: float
    delta_i: float
    g12: complex
    localized: bool


def pair_analytics(alpha, distance, delta=1.0, omega_c=100.0, regime=Regime.LARGE_DISTANCE, v=1.0):
    """All Markovian pair quantities at one ``(alpha, d)``."""
    p = params_for(alpha, distance, delta, omega_c, regime, v)
    gi, g12r = collective_rates(p)
    return PairAnalytics(alpha, distance, gi, g12r, lamb_shifts_two(p),
                         coherent_coupling_g12(p), p.localized)
