"""Exact quantum core for small spin systems.

States are dense 2^N x 2^N density matrices. Time evolution uses the
Hermitian eigendecomposition of the Hamiltonian, which is exact and lets a
system reuse one eigenbasis for any duration. A Pauli-transfer-matrix
representation of the same operations is provided for small N as an
independent cross-check of the density-matrix path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable

import numpy as np

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_SINGLE_PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
PAULI_LABELS = "IXYZ"

# Resource guards: dense simulation beyond 10 qubits is out of scope, and the
# 4^N transfer-matrix representation is kept at cross-check scale only.
MAX_QUBITS = 10
PTM_MAX_QUBITS = 3


def _n_qubits_for_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class DensityMatrix:
    """N-qubit state: Hermitian, positive semidefinite, unit trace."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"density matrix must be square, got {arr.shape}")
        _n_qubits_for_dim(arr.shape[0])
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_qubits(self) -> int:
        return _n_qubits_for_dim(self.dim)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        dim = 2**n_qubits
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def pure_zero(cls, n_qubits: int) -> "DensityMatrix":
        dim = 2**n_qubits
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho)

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def validate(self, hermitian_tol: float = 1e-10, trace_tol: float = 1e-10,
                 psd_tol: float = 1e-10) -> None:
        """Raise ValueError if the state violates a density-matrix invariant."""
        arr = self.entries
        herm = np.max(np.abs(arr - arr.conj().T))
        if herm > hermitian_tol:
            raise ValueError(f"not Hermitian: max deviation {herm:.3e}")
        tr = abs(np.trace(arr) - 1.0)
        if tr > trace_tol:
            raise ValueError(f"trace deviates from 1 by {tr:.3e}")
        lo = float(np.linalg.eigvalsh(arr)[0])
        if lo < -psd_tol:
            raise ValueError(f"not positive semidefinite: min eigenvalue {lo:.3e}")


@dataclass(frozen=True)
class IsingHamiltonian:
    """Fully connected transverse-field Ising Hamiltonian on N qubits.

    H = sum_{i<j} J_ij X_i X_j + h sum_i Z_i, in dimensionless units.
    The eigendecomposition is computed once and reused by all propagators.
    """

    n_qubits: int
    couplings: np.ndarray
    field: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


@dataclass(frozen=True)
class Propagator:
    """Unitary U = exp(-i H t) for a fixed duration t."""

    matrix: np.ndarray
    duration: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _single_site(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    out = np.eye(2**site, dtype=complex)
    out = np.kron(out, op)
    out = np.kron(out, np.eye(2 ** (n_qubits - site - 1), dtype=complex))
    return out


def build_ising_hamiltonian(n_qubits: int, coupling_scale: float = 1.0,
                            field: float = 1.0, rng_seed: int = 0) -> IsingHamiltonian:
    """Draw a random fully connected transverse-field Ising Hamiltonian.

    Pair couplings J_ij (i < j) are i.i.d. uniform on
    [-coupling_scale/2, +coupling_scale/2], symmetrized, zero diagonal.
    Deterministic for a fixed seed.
    """
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    if coupling_scale < 0:
        raise ValueError("coupling_scale must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    half = coupling_scale / 2.0
    couplings = np.zeros((n_qubits, n_qubits))
    for i in range(n_qubits):
        for j in range(i + 1, n_qubits):
            couplings[i, j] = couplings[j, i] = rng.uniform(-half, half)

    dim = 2**n_qubits
    matrix = np.zeros((dim, dim), dtype=complex)
    for i in range(n_qubits):
        for j in range(i + 1, n_qubits):
            if couplings[i, j] != 0.0:
                xi = _single_site(PAULI_X, i, n_qubits)
                xj = _single_site(PAULI_X, j, n_qubits)
                matrix += couplings[i, j] * (xi @ xj)
        matrix += field * _single_site(PAULI_Z, i, n_qubits)

    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return IsingHamiltonian(n_qubits=n_qubits, couplings=couplings, field=float(field),
                            matrix=matrix, eigenvalues=eigenvalues,
                            eigenvectors=eigenvectors)


def propagator(hamiltonian: IsingHamiltonian, duration: float) -> Propagator:
    """Exact unitary for the given duration, from the cached eigenbasis."""
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    phases = np.exp(-1j * hamiltonian.eigenvalues * duration)
    vecs = hamiltonian.eigenvectors
    matrix = (vecs * phases) @ vecs.conj().T
    return Propagator(matrix=matrix, duration=float(duration))


def evolve(rho: DensityMatrix, u: Propagator) -> DensityMatrix:
    """Conjugate the state by the propagator: rho -> U rho U^dagger."""
    if u.dim != rho.dim:
        raise ValueError(f"dimension mismatch: propagator {u.dim}, state {rho.dim}")
    m = u.matrix
    return DensityMatrix(m @ rho.entries @ m.conj().T)


def input_qubit_state(u: float) -> np.ndarray:
    """Single-qubit state (I + (1 - 2u) Z) / 2 encoding an input in [0, 1]."""
    return 0.5 * (PAULI_I + (1.0 - 2.0 * u) * PAULI_Z)


def _trace_out_qubit_raw(arr: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    d_pre = 2**qubit
    d_post = 2 ** (n_qubits - qubit - 1)
    six = arr.reshape(d_pre, 2, d_post, d_pre, 2, d_post)
    return np.einsum("aibcid->abcd", six).reshape(d_pre * d_post, d_pre * d_post)


def _replace_qubit_raw(arr: np.ndarray, one_qubit_state: np.ndarray, qubit: int,
                       n_qubits: int) -> np.ndarray:
    d_pre = 2**qubit
    d_post = 2 ** (n_qubits - qubit - 1)
    six = arr.reshape(d_pre, 2, d_post, d_pre, 2, d_post)
    rest = np.einsum("aibcid->abcd", six)
    out = np.einsum("abcd,ij->aibcjd", rest, one_qubit_state)
    return out.reshape(arr.shape)


def trace_out_qubit(rho: DensityMatrix, qubit: int) -> DensityMatrix:
    """Partial trace over one qubit, returning the (N-1)-qubit state."""
    n = rho.n_qubits
    if not 0 <= qubit < n:
        raise ValueError(f"qubit index {qubit} out of range for {n} qubits")
    if n == 1:
        raise ValueError("cannot trace out the only qubit")
    return DensityMatrix(_trace_out_qubit_raw(rho.entries, qubit, n))


def inject_input(rho: DensityMatrix, u: float, qubit_index: int = 0) -> DensityMatrix:
    """Replace one qubit with the input-encoding state.

    rho -> rho_u (x) Tr_target(rho), a trace-preserving channel that acts as
    the identity on the other qubits.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"input must lie in [0, 1], got {u}")
    n = rho.n_qubits
    if not 0 <= qubit_index < n:
        raise ValueError(f"qubit index {qubit_index} out of range for {n} qubits")
    new = _replace_qubit_raw(rho.entries, input_qubit_state(float(u)), qubit_index, n)
    return DensityMatrix(new)


@lru_cache(maxsize=None)
def _z_sign_rows(n_qubits: int) -> np.ndarray:
    # Row q holds the diagonal of Z_q: +1 where qubit q is |0>, -1 where |1>.
    idx = np.arange(2**n_qubits)
    rows = [np.where((idx >> (n_qubits - 1 - q)) & 1, -1.0, 1.0)
            for q in range(n_qubits)]
    return np.array(rows)


def expect_z(rho: DensityMatrix, qubit_index: int) -> float:
    """Expectation Tr(Z_q rho), in [-1, 1]."""
    n = rho.n_qubits
    if not 0 <= qubit_index < n:
        raise ValueError(f"qubit index {qubit_index} out of range for {n} qubits")
    signs = _z_sign_rows(n)[qubit_index]
    return float(signs @ np.real(np.diagonal(rho.entries)))


def z_expectations(rho: DensityMatrix) -> np.ndarray:
    """All single-qubit Z expectations at once, shape (N,)."""
    return _z_sign_rows(rho.n_qubits) @ np.real(np.diagonal(rho.entries))


def random_density(n_qubits: int, rng: np.random.Generator | None = None) -> DensityMatrix:
    """Random full-rank density matrix (normalized Wishart draw)."""
    rng = np.random.default_rng() if rng is None else rng
    dim = 2**n_qubits
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w = a @ a.conj().T
    return DensityMatrix(w / np.trace(w))


# ---------------------------------------------------------------------------
# Pauli-transfer-matrix representation (small-N cross-check path)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def pauli_basis(n_qubits: int) -> tuple[np.ndarray, ...]:
    """All 4^N Pauli products, index 0 being the identity."""
    ops = []
    for digits in product(range(4), repeat=n_qubits):
        op = np.array([[1.0 + 0.0j]])
        for d in digits:
            op = np.kron(op, _SINGLE_PAULIS[d])
        ops.append(op)
    return tuple(ops)


@lru_cache(maxsize=None)
def pauli_labels(n_qubits: int) -> tuple[str, ...]:
    return tuple("".join(PAULI_LABELS[d] for d in digits)
                 for digits in product(range(4), repeat=n_qubits))


def pauli_vector(rho: DensityMatrix) -> np.ndarray:
    """Coefficients r_i = Tr(P_i rho) / 2^N over the Pauli product basis."""
    n = rho.n_qubits
    basis = pauli_basis(n)
    scale = 1.0 / 2**n
    return np.array([np.real(np.einsum("ij,ji->", p, rho.entries)) * scale
                     for p in basis])


def density_from_pauli_vector(r: np.ndarray, n_qubits: int) -> DensityMatrix:
    """Inverse of :func:`pauli_vector`: rho = sum_i r_i P_i."""
    basis = pauli_basis(n_qubits)
    if len(r) != len(basis):
        raise ValueError(f"expected {len(basis)} coefficients, got {len(r)}")
    dim = 2**n_qubits
    rho = np.zeros((dim, dim), dtype=complex)
    for coeff, p in zip(r, basis):
        rho += coeff * p
    return DensityMatrix(rho)


@dataclass(frozen=True)
class PauliTransferMatrix:
    """Real 4^N x 4^N matrix acting on Pauli coefficient vectors."""

    n_qubits: int
    entries: np.ndarray

    def apply(self, r: np.ndarray) -> np.ndarray:
        return self.entries @ r


def identity_channel() -> Callable[[np.ndarray], np.ndarray]:
    return lambda m: m


def unitary_channel(u: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    udag = u.conj().T
    return lambda m: u @ m @ udag


def injection_channel(u: float, qubit_index: int,
                      n_qubits: int) -> Callable[[np.ndarray], np.ndarray]:
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"input must lie in [0, 1], got {u}")
    state = input_qubit_state(float(u))
    return lambda m: _replace_qubit_raw(m, state, qubit_index, n_qubits)


def channel_to_ptm(channel: Callable[[np.ndarray], np.ndarray],
                   n_qubits: int) -> PauliTransferMatrix:
    """Explicit transfer matrix W_ji = Tr(P_j channel(P_i)) / 2^N.

    Restricted to n_qubits <= 3; this representation exists only as a
    cross-check and scales as 16^N.
    """
    if not 1 <= n_qubits <= PTM_MAX_QUBITS:
        raise ValueError(
            f"transfer matrix is limited to {PTM_MAX_QUBITS} qubits, got {n_qubits}")
    basis = pauli_basis(n_qubits)
    scale = 1.0 / 2**n_qubits
    size = len(basis)
    w = np.empty((size, size))
    for i, p_in in enumerate(basis):
        image = channel(p_in)
        for j, p_out in enumerate(basis):
            w[j, i] = np.real(np.einsum("ij,ji->", p_out, image)) * scale
    return PauliTransferMatrix(n_qubits=n_qubits, entries=w)
