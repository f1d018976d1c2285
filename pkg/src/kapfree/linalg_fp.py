"""Exact linear algebra over F_p on int64 numpy arrays.

Matrices are plain 2-D arrays of residues; the modulus travels alongside as
an argument. Subspaces are kept in reduced row-echelon form so two equal
subspaces always have byte-identical bases.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .gf_core import all_points, check_modulus


class DependentSetError(ValueError):
    pass


def as_matrix(M, p: int) -> np.ndarray:
    A = np.array(M, dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else A.reshape(0, 0)
    return A % p


def rref(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form of ``M`` over F_p and its pivot columns."""
    A = as_matrix(M, p).copy()
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        f = A[:, c].copy()
        f[r] = 0
        A = (A - np.outer(f, A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank(M, p: int) -> int:
    A = as_matrix(M, p)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def batch_rank(Ms: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a stack of matrices, shape (batch, rows, cols)."""
    A = np.array(Ms, dtype=np.int64) % p
    b, rows, cols = A.shape
    inv = np.zeros(p, dtype=np.int64)
    inv[1:] = [pow(a, -1, p) for a in range(1, p)]
    r = np.zeros(b, dtype=np.int64)
    bi = np.arange(b)
    row_ids = np.arange(rows)
    for c in range(cols):
        cand = (A[:, :, c] != 0) & (row_ids[None, :] >= r[:, None])
        has = cand.any(axis=1) & (r < rows)
        if not has.any():
            continue
        sel = bi[has]
        piv = np.argmax(cand[sel], axis=1)
        tgt = r[sel]
        prow = A[sel, piv].copy()
        A[sel, piv] = A[sel, tgt]
        prow = (prow * inv[prow[:, c]][:, None]) % p
        A[sel, tgt] = prow
        f = A[sel, :, c].copy()
        f[np.arange(sel.size), tgt] = 0
        A[sel] = (A[sel] - f[:, :, None] * prow[:, None, :]) % p
        r[sel] += 1
    return r


def nullspace(M, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of {w : M w = 0}; free variables set to unit vectors."""
    A = as_matrix(M, p)
    cols = A.shape[1] if A.size else (ncols or 0)
    if A.size == 0:
        return np.eye(cols, dtype=np.int64)
    R, pivots = rref(A, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in enumerate(pivots):
            basis[i, pc] = (-R[row, f]) % p
    return basis


def solve(M, b, p: int) -> np.ndarray | None:
    """One solution of ``M w = b`` (free variables zero), or None."""
    A = as_matrix(M, p)
    rows, cols = A.shape
    aug = np.concatenate([A, np.array(b, dtype=np.int64).reshape(rows, 1) % p], axis=1)
    R, pivots = rref(aug, p)
    if cols in pivots:
        return None
    w = np.zeros(cols, dtype=np.int64)
    for row, pc in enumerate(pivots):
        w[pc] = R[row, cols]
    return w


def solve_all_ones(vectors, p: int, dim: int | None = None) -> np.ndarray:
    """A dual vector pairing to 1 with every input vector.

    Raises DependentSetError if the inputs are linearly dependent.
    """
    A = as_matrix(vectors, p) if len(vectors) else np.zeros((0, dim or 0), dtype=np.int64)
    m = A.shape[0]
    if m == 0:
        if not dim:
            raise ValueError("ambient dimension required for an empty input")
        w = np.zeros(dim, dtype=np.int64)
        w[0] = 1
        return w
    if rank(A, p) < m:
        raise DependentSetError("dependent set")
    w = solve(A, np.ones(m, dtype=np.int64), p)
    assert w is not None  # full row rank always admits a solution
    return w


@dataclass(frozen=True, eq=False)
class SubspaceFp:
    basis: np.ndarray
    ambient: int
    modulus: int

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.int64).reshape(-1, self.ambient)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors, p: int, ambient: int | None = None) -> "SubspaceFp":
        p = check_modulus(p)
        A = np.array(vectors, dtype=np.int64)
        if ambient is None:
            ambient = A.shape[-1]
        A = A.reshape(-1, ambient) % p
        if A.shape[0] == 0:
            return cls(np.zeros((0, ambient), dtype=np.int64), ambient, p)
        R, _ = rref(A, p)
        return cls(R, ambient, p)

    @classmethod
    def zero(cls, ambient: int, p: int) -> "SubspaceFp":
        return cls.span(np.zeros((0, ambient)), p, ambient)

    @classmethod
    def full(cls, ambient: int, p: int) -> "SubspaceFp":
        return cls.span(np.eye(ambient, dtype=np.int64), p, ambient)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def key(self) -> tuple:
        return (self.modulus, self.ambient, tuple(self.basis.ravel().tolist()))

    def __eq__(self, other):
        if not isinstance(other, SubspaceFp):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"SubspaceFp(dim={self.dim}, ambient={self.ambient}, p={self.modulus}, basis={self.basis.tolist()})"

    def contains(self, X) -> np.ndarray:
        """Vectorized membership test for the rows of ``X``."""
        X = np.asarray(X, dtype=np.int64) % self.modulus
        perp = orthogonal_complement(self).basis
        if perp.shape[0] == 0:
            return np.ones(X.shape[:-1], dtype=bool)
        return ~((X @ perp.T) % self.modulus).any(axis=-1)

    def elements(self) -> np.ndarray:
        """All p**dim vectors of the subspace, shape (p**dim, ambient)."""
        coeffs = all_points(self.modulus, self.dim) if self.dim else np.zeros((1, 0), dtype=np.int64)
        return (coeffs @ self.basis) % self.modulus


def membership(v, U: SubspaceFp) -> bool:
    v = np.asarray(v, dtype=np.int64).reshape(-1)
    if v.shape[0] != U.ambient:
        raise ValueError(f"dimension mismatch: {v.shape[0]} vs ambient {U.ambient}")
    return bool(U.contains(v[None, :])[0])


def orthogonal_complement(U: SubspaceFp) -> SubspaceFp:
    if U.dim == 0:
        return SubspaceFp.full(U.ambient, U.modulus)
    N = nullspace(U.basis, U.modulus)
    return SubspaceFp.span(N, U.modulus, U.ambient)


def iter_subspaces(p: int, ambient: int, dim: int):
    """Every ``dim``-dimensional subspace of F_p^ambient, via its RREF basis.

    Order: pivot sets in lexicographic order, then free entries in base-p
    counting order.
    """
    if dim == 0:
        yield SubspaceFp.zero(ambient, p)
        return
    for pivots in itertools.combinations(range(ambient), dim):
        slots = [
            (i, c)
            for i, pc in enumerate(pivots)
            for c in range(pc + 1, ambient)
            if c not in pivots
        ]
        for fill in itertools.product(range(p), repeat=len(slots)):
            B = np.zeros((dim, ambient), dtype=np.int64)
            for i, pc in enumerate(pivots):
                B[i, pc] = 1
            for (i, c), v in zip(slots, fill):
                B[i, c] = v
            yield SubspaceFp(B, ambient, p)


def gaussian_binomial(D: int, k: int, p: int) -> int:
    """Number of k-dimensional subspaces of F_p^D."""
    if k < 0 or k > D:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (D - i) - 1
        den *= p ** (i + 1) - 1
    return num // den
