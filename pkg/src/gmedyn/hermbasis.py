"""Orthonormal Hermitian operator basis and real coordinates.

A dim x dim complex Hermitian matrix is identified with dim^2 real
coordinates over the basis {E_aa} U {(E_ab + E_ba)/sqrt2} U
{i(E_ab - E_ba)/sqrt2} (a < b), ordered diagonals first, then the symmetric
and antisymmetric off-diagonal elements in row-major (a, b) order.  The
basis is orthonormal under the Frobenius inner product, so coordinate maps
are isometries.

Partial transposition permutes this basis up to sign, which lets the SDP
layer apply it to coordinate vectors as a signed permutation instead of
materializing transposed matrices.

The realification helpers embed Hermitian H as the symmetric real matrix
[[Re H, -Im H], [Im H, Re H]]; the embedding preserves products, adjoints
and positive semidefiniteness, doubles traces, and maps matrix functions
through (f(realify(H)) = realify(f(H))).
"""

from __future__ import annotations

import numpy as np


def realify(h: np.ndarray) -> np.ndarray:
    """Embed complex Hermitian h into a real symmetric matrix of twice the size."""
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def complexify(r: np.ndarray) -> np.ndarray:
    """Project a real 2m x 2m matrix back to the complex Hermitian form.

    For matrices produced by ``realify`` this is exact; for near-misses it
    averages the redundant blocks, which orthogonally projects onto the
    complex-structure subspace.
    """
    m = r.shape[0] // 2
    re = 0.5 * (r[:m, :m] + r[m:, m:])
    im = 0.5 * (r[m:, :m] - r[:m, m:])
    h = re + 1j * im
    return 0.5 * (h + h.conj().T)


class HermitianBasis:
    """Coordinate machinery for Hermitian matrices of one fixed dimension."""

    def __init__(self, dim: int):
        self.dim = dim
        self.size = dim * dim
        a, b = np.triu_indices(dim, 1)
        self._rows, self._cols = a, b
        n_off = a.size
        self._sym_off = dim          # start of symmetric off-diagonal coords
        self._asym_off = dim + n_off  # start of antisymmetric coords
        # Entry triples (p, q, v) per basis element, padded to two per element:
        # B = v0 E[p0, q0] + v1 E[p1, q1].
        p = np.empty((self.size, 2), dtype=np.intp)
        q = np.empty((self.size, 2), dtype=np.intp)
        v = np.zeros((self.size, 2), dtype=complex)
        d = np.arange(dim)
        p[:dim, 0] = p[:dim, 1] = d
        q[:dim, 0] = q[:dim, 1] = d
        v[:dim, 0] = 1.0
        s = 1.0 / np.sqrt(2.0)
        sl = slice(self._sym_off, self._asym_off)
        p[sl, 0], q[sl, 0], v[sl, 0] = a, b, s
        p[sl, 1], q[sl, 1], v[sl, 1] = b, a, s
        sl = slice(self._asym_off, self.size)
        p[sl, 0], q[sl, 0], v[sl, 0] = a, b, 1j * s
        p[sl, 1], q[sl, 1], v[sl, 1] = b, a, -1j * s
        self._p, self._q, self._v = p, q, v
        # (a, b) -> position among the off-diagonal pairs
        self._pair_pos = {(int(ai), int(bi)): i for i, (ai, bi) in enumerate(zip(a, b))}
        # static coefficient grids and scratch buffers for kernel()
        self._coef = [[v[:, k, None] * v[None, :, l] for l in range(2)]
                      for k in range(2)]
        self._kbuf1 = np.empty((self.size, self.size), dtype=complex)
        self._kbuf2 = np.empty((self.size, self.size), dtype=complex)
        self._kacc = np.empty((self.size, self.size), dtype=complex)

    def to_coords(self, h: np.ndarray) -> np.ndarray:
        """Real coordinates of Hermitian h; an isometry for the Frobenius norm."""
        a, b = self._rows, self._cols
        off = h[a, b]
        s = np.sqrt(2.0)
        return np.concatenate([np.diag(h).real, s * off.real, s * off.imag])

    def from_coords(self, x: np.ndarray) -> np.ndarray:
        """Inverse of ``to_coords``."""
        dim = self.dim
        a, b = self._rows, self._cols
        h = np.zeros((dim, dim), dtype=complex)
        h[np.arange(dim), np.arange(dim)] = x[:dim]
        upper = (x[self._sym_off:self._asym_off]
                 + 1j * x[self._asym_off:]) / np.sqrt(2.0)
        h[a, b] = upper
        h[b, a] = upper.conj()
        return h

    def kernel(self, w: np.ndarray) -> np.ndarray:
        """Gram matrix K[i, j] = Tr(B_i w B_j w) for Hermitian w.

        Uses Tr(E_pq w E_rs w) = w[q, r] w[s, p] on the stored entry
        triples, so the cost is a few dim^2 x dim^2 gathers rather than a
        dim^4-sized Kronecker product.  PSD whenever w is PSD.  Scratch
        buffers are reused across calls to keep allocator churn down.
        """
        p, q = self._p, self._q
        acc, b1, b2 = self._kacc, self._kbuf1, self._kbuf2
        acc.fill(0.0)
        wt = w.T.copy()
        for k in range(2):
            rows_q = w[q[:, k], :]   # (size, dim)
            rows_p = wt[p[:, k], :]  # (size, dim), = w[:, p[., k]] transposed
            for l in range(2):
                np.take(rows_q, p[:, l], axis=1, out=b1)   # w[q_ik, p_jl]
                np.take(rows_p, q[:, l], axis=1, out=b2)   # w[q_jl, p_ik]
                b1 *= b2
                b1 *= self._coef[k][l]
                acc += b1
        kmat = acc.real
        return 0.5 * (kmat + kmat.T)

    def pt_signed_permutation(self, party_dims: tuple[int, ...], members) \
            -> tuple[np.ndarray, np.ndarray]:
        """Partial transpose as a signed permutation of basis coordinates.

        Returns (perm, sign) with coords(PT(H))[perm[i]] = sign[i] * coords(H)[i].
        Diagonal elements stay put; each off-diagonal pair maps to another
        pair, with the antisymmetric element flipping sign when the pair
        ordering reverses.
        """
        party_dims = tuple(party_dims)
        if int(np.prod(party_dims)) != self.dim:
            raise ValueError("party_dims do not multiply to the basis dimension")
        members = set(int(i) for i in members)
        n = len(party_dims)
        strides = np.cumprod((party_dims + (1,))[::-1])[::-1][1:]  # mixed-radix

        def digits(idx):
            return [(idx // strides[k]) % party_dims[k] for k in range(n)]

        def index(ds):
            return int(sum(d * s for d, s in zip(ds, strides)))

        perm = np.empty(self.size, dtype=np.intp)
        sign = np.ones(self.size, dtype=float)
        perm[:self.dim] = np.arange(self.dim)
        n_off = self._rows.size
        for i, (ai, bi) in enumerate(zip(self._rows, self._cols)):
            da, db = digits(int(ai)), digits(int(bi))
            na = [db[k] if k in members else da[k] for k in range(n)]
            nb = [da[k] if k in members else db[k] for k in range(n)]
            x, y = index(na), index(nb)
            flipped = x > y
            pos = self._pair_pos[(y, x) if flipped else (x, y)]
            perm[self._sym_off + i] = self._sym_off + pos
            perm[self._asym_off + i] = self._asym_off + pos
            if flipped:
                sign[self._asym_off + i] = -1.0
        return perm, sign


_BASIS_CACHE: dict[int, HermitianBasis] = {}


def basis_for(dim: int) -> HermitianBasis:
    if dim not in _BASIS_CACHE:
        _BASIS_CACHE[dim] = HermitianBasis(dim)
    return _BASIS_CACHE[dim]
