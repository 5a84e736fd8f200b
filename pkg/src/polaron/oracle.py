"""
Brute-force reference: exact diagonalisation in a truncated Fock space.

Only meant for a handful of modes.  The Hilbert space is
``spin^(N_s) (x) Fock(n_max)^(M)`` with the spin factor most significant,
using the same spin conventions as :mod:`polaron.static_polaron`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from .model import DiscreteBath

MAX_MODES = 5
MAX_QUBITS = 2
MAX_DIM = 100_000
DENSE_LIMIT = 10_000


@dataclass(frozen=True)
class FockBasis:
    """Truncated basis: ``num_modes`` bosons with at most ``n_max`` quanta each."""

    num_modes: int
    n_max: int
    num_qubits: int = 1

    def __post_init__(self):
        if not 1 <= self.num_modes <= MAX_MODES:
            raise ValueError(f"num_modes must be in [1, {MAX_MODES}]")
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}]")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.dim > MAX_DIM:
            raise ValueError(f"dimension {self.dim} exceeds {MAX_DIM}")

    @property
    def spin_dim(self):
        return 2 ** self.num_qubits

    @property
    def fock_dim(self):
        return (self.n_max + 1) ** self.num_modes

    @property
    def dim(self):
        return self.spin_dim * self.fock_dim

    def fock_shape(self):
        return (self.n_max + 1,) * self.num_modes

    def vacuum_index(self, spin_index=0):
        return spin_index * self.fock_dim

    def one_photon_index(self, mode, spin_index=0):
        return spin_index * self.fock_dim + (self.n_max + 1) ** (self.num_modes - 1 - mode)


def _annihilation(n_max):
    return sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1, format="csr")


def _embed(ops):
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), ops)


def build_hamiltonian(basis: FockBasis, bath: DiscreteBath, gaps):
    """Sparse lab-frame Hamiltonian on ``basis``.

    ``sum_i (Delta_i/2) Z_i + sum_k w_k a_k^dag a_k + sum_ik X_i (g_ik a_k^dag + h.c.)``
    """
    gaps = np.atleast_1d(np.asarray(gaps, dtype=float))
    if bath.num_modes != basis.num_modes or bath.num_qubits != basis.num_qubits:
        raise ValueError("bath and basis sizes differ")
    if gaps.size != basis.num_qubits:
        raise ValueError("one gap per emitter required")
    ns, M = basis.num_qubits, basis.num_modes
    a = _annihilation(basis.n_max)
    idf = sp.identity(basis.n_max + 1, format="csr")
    ids = sp.identity(2, format="csr")
    sx = sp.csr_matrix([[0.0, 1.0], [1.0, 0.0]])
    sz = sp.csr_matrix([[1.0, 0.0], [0.0, -1.0]])

    def spin(op, i):
        return _embed([op if j == i else ids for j in range(ns)])

    def mode(op, k):
        return _embed([op if j == k else idf for j in range(M)])

    Is = sp.identity(basis.spin_dim, format="csr")
    If = sp.identity(basis.fock_dim, format="csr")
    H = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for i in range(ns):
        H = H + 0.5 * gaps[i] * sp.kron(spin(sz, i), If)
    for k in range(M):
        ak = mode(a, k)
        H = H + bath.frequencies[k] * sp.kron(Is, ak.T @ ak)
        for i in range(ns):
            c = bath.couplings[i, k]
            H = H + sp.kron(spin(sx, i), c * ak.T + np.conj(c) * ak)
    return H.tocsr()


def exact_groundstate(H):
    """Lowest eigenpair; dense below ``DENSE_LIMIT``, Lanczos above."""
    n = H.shape[0]
    if n <= DENSE_LIMIT:
        vals, vecs = la.eigh(H.toarray() if sp.issparse(H) else H, subset_by_index=[0, 0])
        return float(vals[0]), vecs[:, 0]
    v0 = np.ones(n) / math.sqrt(n)
    vals, vecs = spla.eigsh(H, k=1, which="SA", v0=v0, tol=1e-12)
    return float(vals[0]), vecs[:, 0]


def exact_evolve(H, psi0, times):
    """States ``exp(-i H t) psi0`` for every ``t`` in ``times`` (rows)."""
    times = np.asarray(times, dtype=float)
    psi0 = np.asarray(psi0, dtype=complex)
    if H.shape[0] <= DENSE_LIMIT:
        Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
        E, V = np.linalg.eigh(Hd)
        c = V.conj().T @ psi0
        return (V @ (np.exp(-1j * np.outer(E, times)) * c[:, None])).T
    out = np.empty((times.size, psi0.size), dtype=complex)
    psi, t_prev = psi0, 0.0
    for n, t in enumerate(times):
        psi = spla.expm_multiply(-1j * (t - t_prev) * H, psi)
        out[n], t_prev = psi, t
    return out


def displacement_matrix(beta, n_max, pad=40):
    """Matrix elements ``<m|D(beta)|n>`` for ``m, n <= n_max``.

    Built column by column from ``D|n+1> = (a^dag - beta^*) D|n> / sqrt(n+1)``
    in a padded space, so the returned block equals the exact infinite-space
    elements (up to rounding) rather than the exponential of a truncated
    generator.
    """
    size = n_max + 1 + pad
    m = np.arange(size)
    col = np.empty(size, dtype=complex)
    col[0] = 1.0
    for j in range(1, size):
        col[j] = col[j - 1] * beta / math.sqrt(j)
    col *= math.exp(-0.5 * abs(beta) ** 2)
    cols = [col]
    sq = np.sqrt(m)
    for n in range(n_max):
        c = cols[-1]
        new = -np.conj(beta) * c
        new[1:] += sq[1:] * c[:-1]
        cols.append(new / math.sqrt(n + 1))
    return np.column_stack(cols)[: n_max + 1]


_HAD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def apply_inverse_polaron(basis: FockBasis, f, psi):
    """Apply ``U^dag = exp(-sum_i X_i B_i)`` to a state on ``basis``.

    In the ``sigma^x`` configuration ``s`` the operator is the product of
    single-mode displacements ``D(-sum_i s_i f_ik)``.
    """
    f = np.atleast_2d(np.asarray(f, dtype=complex))
    ns, M, nm = basis.num_qubits, basis.num_modes, basis.n_max
    if f.shape != (ns, M):
        raise ValueError("displacements must have shape (num_qubits, num_modes)")
    had = reduce(np.kron, [_HAD] * ns)
    psi = np.asarray(psi, dtype=complex).reshape(basis.spin_dim, basis.fock_dim)
    xpsi = had @ psi
    out = np.empty_like(xpsi)
    for idx in range(basis.spin_dim):
        # Hadamard row idx has sigma^x = +1 on bit 0, -1 on bit 1
        s = np.array([1 - 2 * ((idx >> (ns - 1 - i)) & 1) for i in range(ns)], dtype=float)
        state = xpsi[idx].reshape((nm + 1,) * M)
        for k in range(M):
            D = displacement_matrix(-np.dot(s, f[:, k]), nm)
            state = np.moveaxis(np.tensordot(D, state, axes=([1], [k])), 0, k)
        out[idx] = state.ravel()
    return (had @ out).ravel()


def polaron_frame_map(basis: FockBasis, f):
    """Dense matrix of ``U^dag`` on ``basis`` (small bases only)."""
    if basis.dim > DENSE_LIMIT:
        raise ValueError("dense map limited to small bases")
    eye = np.eye(basis.dim, dtype=complex)
    return np.column_stack([apply_inverse_polaron(basis, f, eye[:, j]) for j in range(basis.dim)])


def excitation_to_lab(basis: FockBasis, solution, amplitudes):
    """Lab-frame vector of a single-excitation polaron state.

    ``amplitudes`` is ``[gs, spin excitations..., photons...]`` in the
    ordering of :class:`polaron.dynamics.ExcitationVector`.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    vecs = solution.spin_vectors
    ne = vecs.shape[1] - 1
    if amps.size != 1 + ne + basis.num_modes:
        raise ValueError("amplitude vector does not match basis")
    psi = np.zeros((basis.spin_dim, basis.fock_dim), dtype=complex)
    psi[:, 0] += amps[0] * vecs[:, 0]
    for s in range(ne):
        psi[:, 0] += amps[1 + s] * vecs[:, 1 + s]
    for k in range(basis.num_modes):
        psi[:, basis.one_photon_index(k)] += amps[1 + ne + k] * vecs[:, 0]
    return apply_inverse_polaron(basis, solution.displacements, psi.ravel())


def lab_sigma_z(basis: FockBasis, psi, qubit=0):
    """``<sigma^z_qubit>`` of a lab-frame vector."""
    ns = basis.num_qubits
    diag = np.array([1 - 2 * ((idx >> (ns - 1 - qubit)) & 1) for idx in range(basis.spin_dim)])
    p = np.abs(np.asarray(psi).reshape(basis.spin_dim, basis.fock_dim)) ** 2
    return float(diag @ p.sum(axis=1))
