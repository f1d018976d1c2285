"""Degree-d Veronese map and the symmetric tensor <-> dual vector dictionary.

Coordinates of F_p^{C(n+d-1, d)} are indexed by exponent vectors
(e_1, .., e_n) with sum d, ordered lexicographically with the largest
first: for n = 2, d = 2 that is x1^2, x1*x2, x2^2.  This ordering is part
of every serialized vector and is tagged ``MONOMIAL_ORDER``.

For a symmetric tensor T the dual vector is defined by collapsing equal
coefficients onto their monomial,

    v_T[e] = multinomial(d; e) * T[i_1, .., i_d]   (any tuple with content e)

so that <v_T, phi_d(x)> = T(x, .., x) holds for all x.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .gf_core import all_points, check_modulus
from .linalg_fp import rank
from .tensor_core import SymmetricTensor, Tensor

MONOMIAL_ORDER = "lex-desc-v1"


def veronese_dim(n: int, d: int) -> int:
    return math.comb(n + d - 1, d)


def _exponents(n: int, d: int):
    if n == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _exponents(n - 1, d - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def monomial_exponents(n: int, d: int) -> np.ndarray:
    """Exponent vectors in coordinate order, shape (C(n+d-1, d), n)."""
    E = np.array(list(_exponents(n, d)), dtype=np.int64).reshape(-1, n)
    E.setflags(write=False)
    return E


@lru_cache(maxsize=None)
def _position_map(n: int, d: int) -> dict:
    return {tuple(e): i for i, e in enumerate(monomial_exponents(n, d).tolist())}


def monomial_position(exponent) -> int:
    e = tuple(int(v) for v in exponent)
    return _position_map(len(e), sum(e))[e]


def multinomial(d: int, exponent) -> int:
    out = math.factorial(d)
    for e in exponent:
        out //= math.factorial(int(e))
    return out


@lru_cache(maxsize=None)
def _tuple_positions(n: int, d: int) -> np.ndarray:
    """Monomial position of every index tuple of [n]^d, row-major."""
    tuples = all_points(n, d) if n > 1 else np.zeros((1, d), dtype=np.int64)
    content = np.zeros((tuples.shape[0], n), dtype=np.int64)
    for j in range(d):
        content[np.arange(tuples.shape[0]), tuples[:, j]] += 1
    pos = _position_map(n, d)
    out = np.array([pos[tuple(c)] for c in content.tolist()], dtype=np.int64)
    out.setflags(write=False)
    return out


def monomial_table(n: int, d: int) -> list[dict]:
    """Position <-> exponent rows documenting the coordinate order."""
    return [
        {"position": i, "exponent": e, "multinomial": multinomial(d, e)}
        for i, e in enumerate(monomial_exponents(n, d).tolist())
    ]


class VeroneseVector:
    """A vector in F_p^{C(n+d-1, d)} in monomial coordinates."""

    __slots__ = ("entries", "degree", "ambient", "modulus")

    def __init__(self, entries, degree: int, ambient: int, modulus: int):
        p = check_modulus(modulus)
        arr = np.array(entries, dtype=np.int64).reshape(-1) % p
        if arr.shape[0] != veronese_dim(ambient, degree):
            raise ValueError(
                f"expected length C({ambient}+{degree}-1, {degree}) = "
                f"{veronese_dim(ambient, degree)}, got {arr.shape[0]}"
            )
        arr.setflags(write=False)
        self.entries = arr
        self.degree = degree
        self.ambient = ambient
        self.modulus = p

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __len__(self):
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, VeroneseVector):
            return NotImplemented
        return (self.degree, self.ambient, self.modulus) == (other.degree, other.ambient, other.modulus) \
            and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"VeroneseVector({self.entries.tolist()}, d={self.degree}, n={self.ambient}, p={self.modulus})"

    def pair(self, other) -> int:
        return int(self.entries @ np.asarray(other, dtype=np.int64)) % self.modulus

    def tolist(self):
        return self.entries.tolist()


def veronese_images(X, d: int, p: int) -> np.ndarray:
    """phi_d of every row of ``X``, shape (rows, C(n+d-1, d))."""
    if d < 1:
        raise ValueError("Veronese degree must be at least 1")
    X = np.atleast_2d(np.asarray(X, dtype=np.int64)) % p
    rows, n = X.shape
    pw = np.ones((rows, n, d + 1), dtype=np.int64)
    for j in range(1, d + 1):
        pw[:, :, j] = (pw[:, :, j - 1] * X) % p
    E = monomial_exponents(n, d)
    out = np.ones((rows, E.shape[0]), dtype=np.int64)
    for i in range(n):
        out = (out * pw[:, i, E[:, i]]) % p
    return out


def veronese_map(x, d: int, p: int | None = None) -> VeroneseVector:
    p = getattr(x, "modulus", p)
    if p is None:
        raise ValueError("modulus required for a plain array input")
    v = np.asarray(x, dtype=np.int64).reshape(-1)
    return VeroneseVector(veronese_images(v[None, :], d, p)[0], d, v.shape[0], p)


def symmetric_to_dual(T: Tensor) -> VeroneseVector:
    if not T.is_symmetric():
        raise ValueError("symmetric_to_dual needs a symmetric tensor")
    p, n, d = T.shape
    pos = _tuple_positions(n, d)
    flat = T.flat()
    D = veronese_dim(n, d)
    # first tuple (row-major) carrying each monomial's content
    _, rep = np.unique(pos, return_index=True)
    assert rep.shape[0] == D
    mult = np.array([multinomial(d, e) % p for e in monomial_exponents(n, d).tolist()], dtype=np.int64)
    return VeroneseVector((mult * flat[rep]) % p, d, n, p)


def dual_to_symmetric(v: VeroneseVector) -> SymmetricTensor:
    p, n, d = v.modulus, v.ambient, v.degree
    if p <= d:
        raise ValueError(f"characteristic too small: p={p} must exceed d={d}")
    inv = np.array(
        [pow(multinomial(d, e) % p, -1, p) for e in monomial_exponents(n, d).tolist()],
        dtype=np.int64,
    )
    pos = _tuple_positions(n, d)
    flat = (v.entries[pos] * inv[pos]) % p
    return SymmetricTensor(flat.reshape((n,) * d), p)


def symmetric_basis(p: int, n: int, d: int) -> list[SymmetricTensor]:
    """One symmetric tensor per monomial: ones on every tuple of that content."""
    pos = _tuple_positions(n, d)
    return [
        SymmetricTensor((pos == i).astype(np.int64).reshape((n,) * d), p)
        for i in range(veronese_dim(n, d))
    ]


def image_independence(S, d: int, p: int | None = None) -> bool:
    """Whether phi_d of the given vectors are linearly independent."""
    vecs = list(S)
    if not vecs:
        return True
    if p is None:
        p = vecs[0].modulus
    X = np.array([np.asarray(s, dtype=np.int64) for s in vecs])
    img = veronese_images(X, d, p)
    if len(vecs) > img.shape[1]:
        return False
    return rank(img, p) == len(vecs)
