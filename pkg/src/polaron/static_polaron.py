"""
Static (groundstate) polaron ansatz.

The ansatz displaces every mode conditioned on the emitters' ``sigma^x``,
``|Psi> = U^dag |0> (x) |psi_s>`` with ``U = exp(sum_i sigma^x_i B_i)``,
``B_i = sum_k (f_ik a_k^dag - f_ik^* a_k)``.  In the state with
``sigma^x``-configuration ``s`` the modes are coherent with amplitude
``<a_k> = -sum_i s_i f_ik``; for one emitter the optimum is
``f_k = g_k / (w_k + Delta_r)``.

Spin basis convention: each emitter uses ``(up, down)`` with
``sigma^z = diag(1, -1)``, emitter 0 is the most significant factor of
the tensor product.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy import integrate, optimize

from .model import DiscreteBath

EULER_GAMMA = 0.5772156649015329
#: ``p = e^{1 + gamma_E}`` of the scaling-limit renormalisation law.
SCALING_P = math.exp(1.0 + EULER_GAMMA)

MAX_DENSE_QUBITS = 12


class ConvergenceError(RuntimeError):
    """A self-consistent or variational solve did not converge.

    ``last`` holds the final iterate (whatever the solver had), ``residual``
    the last residual.
    """

    def __init__(self, message, last=None, residual=float("nan")):
        super().__init__(message)
        self.last = last
        self.residual = residual


@dataclass(frozen=True)
class PolaronSolution:
    """Optimal static polaron parameters.

    ``spin_energies``/``spin_vectors`` hold the full eigendecomposition of the
    effective spin Hamiltonian at the optimum (ascending); column 0 is the
    variational spin groundstate ``spin_state``.
    """

    displacements: np.ndarray
    spin_state: np.ndarray
    groundstate_energy: float
    renormalized_gaps: np.ndarray
    renorm_exponents: np.ndarray
    ising_couplings: np.ndarray
    gaps: np.ndarray
    spin_energies: np.ndarray
    spin_vectors: np.ndarray
    residual: float = 0.0
    iterations: int = 0
    certified: bool = True
    degenerate: bool = False
    method: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def num_qubits(self):
        return self.displacements.shape[0]

    @property
    def delta_r(self):
        """Renormalised gap of the first emitter."""
        return float(self.renormalized_gaps[0])


# -- spin operators ---------------------------------------------------------

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def _site_op(op, i, n):
    mats = [np.eye(2)] * n
    mats[i] = op
    return reduce(np.kron, mats)


def spin_operators(num_qubits):
    """Dense ``(X_i, Z_i)`` lists for ``num_qubits`` emitters."""
    xs = [_site_op(_SX, i, num_qubits) for i in range(num_qubits)]
    zs = [_site_op(_SZ, i, num_qubits) for i in range(num_qubits)]
    return xs, zs


def _check_dims(f, bath):
    f = np.asarray(f, dtype=complex)
    if f.ndim == 1:
        f = f[None, :]
    if f.shape != bath.couplings.shape:
        raise ValueError(f"displacements have shape {f.shape}, bath couplings {bath.couplings.shape}")
    return f


def ising_parameters(f, bath: DiscreteBath):
    """Renormalisation exponents ``Xi_i`` and Ising couplings ``J_ij``.

    ``Xi_i = 2 sum_k |f_ik|^2``.  ``J_ij`` is the real symmetric part of
    ``sum_k (w_k f_ik f_jk^* - g_ik f_jk^* - g_ik^* f_jk)``; only that part
    survives contraction with ``sigma^x_i sigma^x_j``.
    """
    f = _check_dims(f, bath)
    g = bath.couplings
    w = bath.frequencies
    xi = 2.0 * np.sum(np.abs(f) ** 2, axis=1)
    J = (np.einsum("k,ik,jk->ij", w, f, f.conj())
         - g @ f.conj().T - g.conj() @ f.T)
    Jsym = 0.5 * (J + J.T).real
    return xi, Jsym


def _cross_phases(f):
    """``theta_ij = 2 sum_k Im(f_jk f_ik^*)`` (antisymmetric)."""
    return 2.0 * (f.conj() @ f.T).imag


def _dressed_z(theta, xs, zs):
    """``P_i Z_i`` with ``P_i = exp(i sum_{j != i} theta_ij X_i X_j)``.

    The phase operator comes from the non-commutativity of the displacement
    generators of different emitters; it is the identity whenever
    ``sum_k Im(f_jk f_ik^*) = 0`` (one emitter, real or mirror-symmetric ``f``).
    """
    n = len(xs)
    dim = 2 ** n
    out = []
    for i in range(n):
        P = np.eye(dim, dtype=complex)
        for j in range(n):
            if j == i or theta[i, j] == 0.0:
                continue
            XX = xs[i] @ xs[j]
            P = P @ (math.cos(theta[i, j]) * np.eye(dim) + 1j * math.sin(theta[i, j]) * XX)
        out.append(P @ zs[i])
    return out


def effective_spin_hamiltonian(f, bath: DiscreteBath, gaps):
    """Spin Hamiltonian ``<0| U H U^dag |0>`` seen by the spin state.

    ``H_s = sum_i (Delta_i/2) e^{-Xi_i} sigma^z_i + sum_ij J_ij sigma^x_i sigma^x_j``
    in the computational basis (dimension ``2**N_s``).  For several emitters
    with complex, non mirror-symmetric displacements the ``sigma^z`` terms
    carry the extra phase operator of :func:`_dressed_z`.
    """
    f = _check_dims(f, bath)
    gaps = np.atleast_1d(np.asarray(gaps, dtype=float))
    n = f.shape[0]
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"{n} emitters exceed the dense limit of {MAX_DENSE_QUBITS}")
    if gaps.size != n:
        raise ValueError("one gap per emitter required")
    xi, J = ising_parameters(f, bath)
    xs, zs = spin_operators(n)
    qz = _dressed_z(_cross_phases(f), xs, zs)
    H = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for i in range(n):
        H += 0.5 * gaps[i] * math.exp(-xi[i]) * qz[i]
        for j in range(n):
            H += J[i, j] * (xs[i] @ xs[j])
    return 0.5 * (H + H.conj().T)


def _energy_and_gradient(f, bath, gaps, ops):
    """Variational energy and its Wirtinger gradient ``dE/df^*``."""
    xs, zs = ops
    n = f.shape[0]
    g = bath.couplings
    w = bath.frequencies
    xi = 2.0 * np.sum(np.abs(f) ** 2, axis=1)
    theta = _cross_phases(f)
    qz = _dressed_z(theta, xs, zs)
    _, J = ising_parameters(f, bath)
    a = 0.5 * gaps * np.exp(-xi)
    H = sum(a[i] * qz[i] for i in range(n)) + sum(
        J[i, j] * (xs[i] @ xs[j]) for i in range(n) for j in range(n))
    H = 0.5 * (H + H.conj().T)
    vals, vecs = np.linalg.eigh(H)
    psi = vecs[:, 0]
    Xc = np.array([[np.vdot(psi, xs[i] @ xs[j] @ psi).real for j in range(n)]
                   for i in range(n)])
    Qz = np.array([np.vdot(psi, qz[i] @ psi).real for i in range(n)])
    grad = Xc.T @ (w[None, :] * f - g)
    grad -= (2.0 * a * Qz)[:, None] * f
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            D = a[i] * np.vdot(psi, 1j * xs[i] @ xs[j] @ qz[i] @ psi).real
            if D == 0.0:
                continue
            grad[i] += D * (-1j) * f[j]
            grad[j] += D * (1j) * f[i]
    return float(vals[0]), grad


def _solution_from_f(f, bath, gaps, **meta):
    gaps = np.atleast_1d(np.asarray(gaps, dtype=float))
    xi, J = ising_parameters(f, bath)
    H = effective_spin_hamiltonian(f, bath, gaps)
    vals, vecs = np.linalg.eigh(H)
    # fix each eigenvector's phase so its largest component is real positive
    vecs = vecs * np.exp(-1j * np.angle(vecs[np.argmax(np.abs(vecs), axis=0), range(vecs.shape[1])]))
    psi = vecs[:, 0]
    deg = meta.pop("degenerate", None)
    if deg is None:
        deg = bool(vals.size > 1 and abs(vals[1] - vals[0]) <= 1e-12 * max(1.0, abs(vals[0])))
    return PolaronSolution(
        displacements=f, spin_state=psi, groundstate_energy=float(vals[0]),
        renormalized_gaps=gaps * np.exp(-xi), renorm_exponents=xi,
        ising_couplings=J, gaps=gaps, spin_energies=vals, spin_vectors=vecs,
        degenerate=deg, **meta)


def fixed_point_residual(f, bath, delta):
    """``max_k |f_k (w_k + Delta e^{-Xi}) - g_k|`` over coupled modes."""
    f = _check_dims(f, bath)[0]
    g = bath.couplings[0]
    w = bath.frequencies
    dr = delta * math.exp(-2.0 * np.sum(np.abs(f) ** 2))
    m = w > 0
    if not np.any(m):
        return 0.0
    return float(np.max(np.abs(f[m] * (w[m] + dr) - g[m])))


def solve_single_qubit_fixed_point(bath: DiscreteBath, delta, tol=1e-10, max_iter=10_000,
                                   damping=0.5):
    """Self-consistent single-emitter polaron solution.

    Iterates ``Delta_r <- (1-d) Delta_r + d Delta exp(-2 sum_k |g_k|^2/(w_k+Delta_r)^2)``
    from ``Delta_r = Delta`` until the update is below ``tol * Delta``, then sets
    ``f_k = g_k / (w_k + Delta_r)`` (zero for the ``w = 0`` mode) and the spin
    groundstate to ``|down>``.

    Raises
    ------
    ConvergenceError
        After ``max_iter`` iterations; carries the last ``Delta_r``.
    """
    if bath.num_qubits != 1:
        raise ValueError("single-qubit solver needs a one-emitter bath")
    delta = float(delta)
    if delta < 0:
        raise ValueError("gap must be non-negative")
    g = bath.couplings[0]
    w = bath.frequencies
    m = w > 0
    g2 = np.abs(g[m]) ** 2
    wm = w[m]

    def update(dr):
        return delta * math.exp(-2.0 * np.sum(g2 / (wm + dr) ** 2))

    dr = delta
    scale = delta if delta > 0 else 1.0
    step = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        new = (1 - damping) * dr + damping * update(dr)
        step = abs(new - dr)
        dr = new
        if step < tol * scale:
            break
    else:
        raise ConvergenceError(f"fixed point not converged after {max_iter} iterations "
                               f"(last step {step:.3e})", last=dr, residual=step)
    f = np.zeros((1, w.size), dtype=complex)
    f[0, m] = g[m] / (wm + dr)
    degenerate = dr <= 1e-12 * scale
    sol = _solution_from_f(f, bath, [delta], iterations=it, method="fixed-point",
                           degenerate=degenerate,
                           residual=fixed_point_residual(f, bath, delta))
    if degenerate:
        # Delta_r = 0: two-fold degenerate Lang-Firsov states, keep |down>
        down = np.array([0.0, 1.0], dtype=complex)
        vecs = np.column_stack([down, [1.0, 0.0]]).astype(complex)
        sol = PolaronSolution(**{**sol.__dict__, "spin_state": down, "spin_vectors": vecs})
    return sol


def solve_variational(bath: DiscreteBath, gaps, initial_f=None, tol=1e-7, maxiter=5000,
                      restarts=0, seed=0):
    """Minimise the polaron energy over all displacements.

    The spin state is the exact groundstate of :func:`effective_spin_hamiltonian`
    at each trial ``f``, so only ``f`` is optimised (BFGS with the
    Hellmann-Feynman gradient).  The result is ``certified`` when the
    largest gradient component is below ``tol * max(1, max|g|)``; otherwise
    the best point is returned with ``certified=False`` and a warning.

    ``restarts`` extra runs start from randomly perturbed displacements
    drawn with ``numpy.random.default_rng(seed)``.
    """
    gaps = np.atleast_1d(np.asarray(gaps, dtype=float))
    n = bath.num_qubits
    if gaps.size != n:
        raise ValueError("one gap per emitter required")
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"{n} emitters exceed the dense limit of {MAX_DENSE_QUBITS}")
    w = bath.frequencies
    m = w > 0
    M = int(m.sum())
    ops = spin_operators(n)

    def unpack(x):
        f = np.zeros((n, w.size), dtype=complex)
        f[:, m] = (x[: n * M] + 1j * x[n * M:]).reshape(n, M)
        return f

    def fun(x):
        E, gr = _energy_and_gradient(unpack(x), bath, gaps, ops)
        gr = 2.0 * gr[:, m]
        return E, np.concatenate([gr.real.ravel(), gr.imag.ravel()])

    if initial_f is None:
        f0 = np.zeros((n, w.size), dtype=complex)
        f0[:, m] = bath.couplings[:, m] / (w[m] + gaps[:, None])
    else:
        f0 = _check_dims(initial_f, bath)
    x0 = np.concatenate([f0[:, m].real.ravel(), f0[:, m].imag.ravel()])

    rng = np.random.default_rng(seed)
    starts = [x0] + [x0 + rng.normal(scale=0.5 * (np.abs(x0).max() + 1e-3), size=x0.size)
                     for _ in range(restarts)]
    best = None
    for xs in starts:
        res = optimize.minimize(fun, xs, jac=True, method="BFGS",
                                options={"gtol": 1e-12, "maxiter": maxiter})
        if best is None or res.fun < best.fun - 1e-14:
            best = res
    gscale = max(1.0, float(np.abs(bath.couplings).max(initial=0.0)))
    gnorm = float(np.abs(fun(best.x)[1]).max(initial=0.0))
    certified = gnorm < tol * gscale
    if not certified:
        warnings.warn(f"variational optimum not certified: gradient {gnorm:.2e}", RuntimeWarning)
    f = unpack(best.x)
    return _solution_from_f(f, bath, gaps, residual=gnorm, iterations=int(best.nit),
                            certified=certified, method="variational")


def groundstate_polarization(solution: PolaronSolution):
    """Per-emitter ``<sigma^z_i>`` in the lab frame.

    ``<psi_s| P_i sigma^z_i |psi_s> e^{-Xi_i}``; for one emitter this is
    ``-Delta_r / Delta``.
    """
    n = solution.num_qubits
    xs, zs = spin_operators(n)
    qz = _dressed_z(_cross_phases(solution.displacements), xs, zs)
    psi = solution.spin_state
    return np.array([np.vdot(psi, qz[i] @ psi).real * math.exp(-solution.renorm_exponents[i])
                     for i in range(n)])


# -- continuum, single emitter ------------------------------------------------

def delta_r_scaling_limit(alpha, delta=1.0, omega_c=100.0):
    """``Delta (p Delta / w_c)^{alpha/(1-alpha)}``; zero for ``alpha >= 1``."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha >= 1:
        return 0.0
    return delta * (SCALING_P * delta / omega_c) ** (alpha / (1.0 - alpha))


def renormalization_integral(delta_r, alpha, omega_c, rtol=1e-10):
    """``int_0^inf dw J(w) / (pi (w + Delta_r)^2)`` for ``J = pi alpha w e^{-w/w_c}``.

    Adaptive quadrature in ``log w`` up to ``50 w_c``.
    """
    if alpha == 0:
        return 0.0
    a = float(delta_r)
    upper = 50.0 * omega_c
    lo = math.log(max(a, omega_c * 1e-14) * 1e-10)

    def integrand(u):
        x = math.exp(u)
        return x * x * math.exp(-x / omega_c) / (x + a) ** 2

    pts = sorted({math.log(max(a, 1e-300)), math.log(omega_c)})
    pts = [p for p in pts if lo < p < math.log(upper)]
    val, _ = integrate.quad(integrand, lo, math.log(upper), points=pts or None,
                            epsabs=0.0, epsrel=rtol, limit=500)
    return alpha * val


def delta_r_continuum_implicit(alpha, delta=1.0, omega_c=100.0, tol=1e-10, max_iter=10_000,
                               damping=0.5):
    """Solve ``Delta_r = Delta exp(-int J/(pi (w+Delta_r)^2))`` self-consistently.

    Damped fixed-point iteration on ``Delta_r`` starting from ``Delta``.
    Returns 0 for ``alpha >= 1`` where only the localised solution survives.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0:
        return float(delta)
    if alpha >= 1:
        return 0.0
    dr = float(delta)
    for _ in range(max_iter):
        new = (1 - damping) * dr + damping * delta * math.exp(
            -renormalization_integral(dr, alpha, omega_c))
        if abs(new - dr) <= tol * new:
            return new
        dr = new
    raise ConvergenceError("continuum renormalisation did not converge", last=dr)
