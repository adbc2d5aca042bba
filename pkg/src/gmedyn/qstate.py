"""Dense multi-qubit density-matrix algebra.

Everything here works on explicit complex matrices: construction and
validation of density matrices, tensor products, partial trace, partial
transpose and Hermitian eigendecomposition.  All functions are pure; the
state objects are immutable and safe to share between threads.

Global tensor order for the four-qubit system: C1, C2, R1, R2 (cavity 1,
cavity 2, reservoir 1, reservoir 2), with the usual lexicographic
computational basis |00..0>, |00..1>, ...
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Fixed label convention for the four-qubit system used throughout.
QUBIT_ORDER = ("C1", "C2", "R1", "R2")
C1, C2, R1, R2 = 0, 1, 2, 3

HERM_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
# Largest total dimension tensor() will produce; anything bigger signals misuse.
MAX_DIM = 256


class InvalidStateError(ValueError):
    """Raised when a matrix fails density-matrix validation."""


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated Hermitian, PSD, unit-trace matrix on a tensor product of parties.

    ``party_dims`` gives the dimension of each tensor factor in order; their
    product must equal the matrix dimension.
    """

    matrix: np.ndarray
    party_dims: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "party_dims", tuple(int(d) for d in self.party_dims))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"not a square matrix: shape {m.shape}")
        dim = m.shape[0]
        if int(np.prod(self.party_dims)) != dim:
            raise InvalidStateError(
                f"party_dims {self.party_dims} inconsistent with dimension {dim}")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise InvalidStateError("matrix is not Hermitian within 1e-12")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace {tr} differs from 1 beyond 1e-10")
        if np.linalg.eigvalsh(m)[0] < -PSD_TOL:
            raise InvalidStateError("matrix has an eigenvalue below -1e-9")
        m.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.party_dims)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True)
class Bipartition:
    """One split M | complement(M) of the parties {0, ..., parties-1}.

    Canonical form keeps the side containing party 0, so a split and its
    complement compare equal.
    """

    parties: int
    members: frozenset[int] = field()

    def __post_init__(self):
        members = frozenset(int(i) for i in self.members)
        if not members or len(members) >= self.parties:
            raise ValueError("members must be a nonempty proper subset")
        if any(i < 0 or i >= self.parties for i in members):
            raise ValueError(f"party index out of range for {self.parties} parties")
        if 0 not in members:
            members = frozenset(range(self.parties)) - members
        object.__setattr__(self, "members", members)

    def complement(self) -> frozenset[int]:
        return frozenset(range(self.parties)) - self.members

    def __str__(self) -> str:
        side = "".join(str(i) for i in sorted(self.members))
        other = "".join(str(i) for i in sorted(self.complement()))
        return f"{side}|{other}"


def ket(bits: str) -> np.ndarray:
    """Computational-basis column vector for a bit string, e.g. ket("01")."""
    index = int(bits, 2)
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[index] = 1.0
    return v


def pure_state(vec: np.ndarray, party_dims: tuple[int, ...]) -> DensityMatrix:
    """|v><v| normalized to unit trace."""
    v = np.asarray(vec, dtype=complex).reshape(-1)
    n2 = np.vdot(v, v).real
    if n2 <= 0:
        raise InvalidStateError("zero vector")
    return DensityMatrix(np.outer(v, v.conj()) / n2, party_dims)


def maximally_mixed(party_dims: tuple[int, ...]) -> DensityMatrix:
    dim = int(np.prod(party_dims))
    return DensityMatrix(np.eye(dim) / dim, party_dims)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product; party dimensions concatenate."""
    if a.dim * b.dim > MAX_DIM:
        raise InvalidStateError(
            f"tensor product dimension {a.dim * b.dim} exceeds maximum {MAX_DIM}")
    return DensityMatrix(np.kron(a.matrix, b.matrix), a.party_dims + b.party_dims)


def _as_legs(matrix: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    return matrix.reshape(dims + dims)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the parties in ``keep`` (original order preserved)."""
    keep = sorted(set(int(i) for i in keep))
    n = rho.n_parties
    if not keep or any(i < 0 or i >= n for i in keep):
        raise ValueError(f"keep={keep} is not a valid nonempty subset of 0..{n - 1}")
    legs = _as_legs(rho.matrix, rho.party_dims)
    dims = list(rho.party_dims)
    for i in sorted(set(range(n)) - set(keep), reverse=True):
        legs = np.trace(legs, axis1=i, axis2=i + len(dims))
        dims.pop(i)
    d = int(np.prod(dims))
    return DensityMatrix(legs.reshape(d, d), tuple(dims))


def permute_parties(matrix: np.ndarray, dims: tuple[int, ...], perm) -> np.ndarray:
    """Reorder tensor factors of an operator: new factor i is old factor perm[i]."""
    perm = list(perm)
    n = len(dims)
    legs = _as_legs(matrix, tuple(dims))
    legs = legs.transpose(perm + [p + n for p in perm])
    d = int(np.prod(dims))
    return np.ascontiguousarray(legs.reshape(d, d))


def partial_transpose_matrix(matrix: np.ndarray, dims: tuple[int, ...], members) -> np.ndarray:
    """Transpose the row/column indices of the listed tensor factors only."""
    members = set(int(i) for i in members)
    n = len(dims)
    legs = _as_legs(matrix, tuple(dims))
    axes = list(range(2 * n))
    for i in members:
        axes[i], axes[i + n] = axes[i + n], axes[i]
    d = int(np.prod(dims))
    return np.ascontiguousarray(legs.transpose(axes).reshape(d, d))


def partial_transpose(rho: DensityMatrix, cut: Bipartition) -> np.ndarray:
    """Partial transpose across a bipartition; Hermitian but maybe not PSD."""
    if cut.parties != rho.n_parties:
        raise ValueError("bipartition party count does not match the state")
    return partial_transpose_matrix(rho.matrix, rho.party_dims, cut.members)


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix; rejects non-Hermitian input."""
    m = np.asarray(m, dtype=complex)
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise ValueError("input is not Hermitian within 1e-10")
    return np.linalg.eigvalsh(m)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) * trace norm of a - b for Hermitian a, b."""
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b)))))
