"""Dense d-tensors over F_p^n with exact bias and analytic rank.

The multilinear bias is never averaged in floating point.  For a d-linear
form, averaging the character over the last argument yields exactly the
indicator that the induced linear form vanishes, so

    bias(T) = #{(x_1..x_{d-1}) : T(x_1, .., x_{d-1}, .) == 0} / p^(n(d-1))

and that integer count is what :func:`kernel_count` returns.
:func:`bias_character_sum` evaluates the defining character average
directly and serves as the independent check on this identity.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._parallel import chunk_ranges, shard_map
from .gf_core import Character, FpScalar, all_points, check_modulus, log_p

DEFAULT_CAP = 1 << 24
# peak elements materialized by one enumeration chunk
_CHUNK_BUDGET = 1 << 21


class FeasibilityError(ValueError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, what: str, required: int, cap: int):
        super().__init__(f"{what} needs {required} enumerated points, cap is {cap}")
        self.required = required
        self.cap = cap


class Tensor:
    """A d-linear form on F_p^n stored as an (n,)*d int64 coefficient box."""

    __slots__ = ("coeffs", "modulus")

    def __init__(self, coeffs, modulus: int):
        p = check_modulus(modulus)
        c = np.array(coeffs, dtype=np.int64) % p
        if c.ndim < 2:
            raise ValueError("a tensor needs order d >= 2")
        if len(set(c.shape)) != 1 or c.shape[0] < 1:
            raise ValueError(f"coefficient box must be n x ... x n, got {c.shape}")
        c.setflags(write=False)
        self.coeffs = c
        self.modulus = p

    @property
    def order(self) -> int:
        return self.coeffs.ndim

    @property
    def side(self) -> int:
        return self.coeffs.shape[0]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.modulus, self.side, self.order

    @classmethod
    def zeros(cls, p: int, n: int, d: int):
        return cls(np.zeros((n,) * d, dtype=np.int64), p)

    @classmethod
    def from_flat(cls, flat, p: int, n: int, d: int):
        return cls(np.asarray(flat, dtype=np.int64).reshape((n,) * d), p)

    @classmethod
    def unit(cls, p: int, n: int, index: tuple[int, ...]):
        """The basis tensor with a single 1 at ``index`` (0-based)."""
        c = np.zeros((n,) * len(index), dtype=np.int64)
        c[tuple(index)] = 1
        return cls(c, p)

    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def is_symmetric(self) -> bool:
        c = self.coeffs
        return all(
            np.array_equal(c, np.transpose(c, perm))
            for perm in itertools.permutations(range(c.ndim))
        )

    def __add__(self, other: "Tensor") -> "Tensor":
        _check_compatible(self, other)
        return Tensor(self.coeffs + other.coeffs, self.modulus)

    def __sub__(self, other: "Tensor") -> "Tensor":
        _check_compatible(self, other)
        return Tensor(self.coeffs - other.coeffs, self.modulus)

    def __rmul__(self, c: int) -> "Tensor":
        return type(self)(int(c) * self.coeffs, self.modulus)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.modulus, self.coeffs.shape, self.coeffs.tobytes()))

    def __repr__(self):
        p, n, d = self.shape
        return f"{type(self).__name__}(p={p}, n={n}, d={d}, coeffs={self.flat().tolist()})"

    # serialization: row-major coefficient list; bit-exact round trip
    def to_dict(self) -> dict:
        p, n, d = self.shape
        return {"p": p, "n": n, "d": d, "coeffs": self.flat().tolist()}

    @classmethod
    def from_dict(cls, data: dict):
        return cls.from_flat(data["coeffs"], data["p"], data["n"], data["d"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        p, n, d = self.shape
        return f"{p} {n} {d}\n" + " ".join(map(str, self.flat().tolist())) + "\n"

    @classmethod
    def from_text(cls, text: str):
        head, _, body = text.strip().partition("\n")
        p, n, d = map(int, head.split())
        flat = [int(t) for t in body.split()]
        if len(flat) != n**d:
            raise ValueError(f"expected {n**d} coefficients, got {len(flat)}")
        return cls.from_flat(flat, p, n, d)


class SymmetricTensor(Tensor):
    """A tensor invariant under every permutation of its arguments."""

    __slots__ = ()

    def __init__(self, coeffs, modulus: int):
        super().__init__(coeffs, modulus)
        if not self.is_symmetric():
            raise ValueError("coefficients are not invariant under index permutations")

    @classmethod
    def from_tensor(cls, T: Tensor):
        return cls(T.coeffs, T.modulus)

    def __add__(self, other):
        out = super().__add__(other)
        return SymmetricTensor(out.coeffs, out.modulus) if isinstance(other, SymmetricTensor) else out


def _check_compatible(a: Tensor, b: Tensor):
    if a.shape != b.shape:
        raise ValueError(f"tensor shapes differ: {a.shape} vs {b.shape}")


def _vector(x, T: Tensor) -> np.ndarray:
    mod = getattr(x, "modulus", T.modulus)
    if mod != T.modulus:
        raise ValueError("modulus mismatch between tensor and vector")
    v = np.asarray(x, dtype=np.int64).reshape(-1)
    if v.shape[0] != T.side:
        raise ValueError(f"vector length {v.shape[0]} does not match tensor side {T.side}")
    return v % T.modulus


def evaluate(T: Tensor, *xs) -> FpScalar:
    """T(x_1, ..., x_d)."""
    if len(xs) != T.order:
        raise ValueError(f"order-{T.order} tensor takes {T.order} vectors, got {len(xs)}")
    p = T.modulus
    cur = T.coeffs
    for x in xs:
        cur = np.tensordot(_vector(x, T), cur, axes=(0, 0)) % p
    return FpScalar(int(cur), p)


def diagonal_eval(T: Tensor, x) -> FpScalar:
    """T(x, x, ..., x)."""
    v = _vector(x, T)
    return evaluate(T, *([v] * T.order))


def diagonal_values(T: Tensor, X: np.ndarray) -> np.ndarray:
    """T(x, .., x) for every row x of ``X``."""
    p, n, d = T.shape
    X = np.asarray(X, dtype=np.int64) % p
    V = (X @ T.coeffs.reshape(n, -1)) % p
    for _ in range(d - 1):
        V = V.reshape(X.shape[0], n, -1)
        V = (X[:, :, None] * V).sum(axis=1) % p
    return V.reshape(-1)


def _contract_leading(stack: np.ndarray, P: np.ndarray, p: int, steps: int,
                      first: np.ndarray | None = None) -> np.ndarray:
    """Feed every point of ``P`` into the leading ``steps`` slots.

    ``stack`` has shape (m, n**d). Returns shape (m, K, n**(d-steps)) where
    K enumerates the input tuples in row-major order. ``first`` replaces
    ``P`` for the first slot, which is how callers shard the enumeration.
    """
    n = P.shape[1]
    m = stack.shape[0]
    cur = stack.reshape(m, 1, -1)
    for step in range(steps):
        pts = first if (step == 0 and first is not None) else P
        K = cur.shape[1]
        cur = cur.reshape(m, K, n, -1).transpose(0, 1, 3, 2)
        cur = (cur @ pts.T) % p
        cur = cur.transpose(0, 1, 3, 2).reshape(m, K * pts.shape[0], -1)
    return cur


def kernel_counts(coeff_stack: np.ndarray, p: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Kernel counts for a stack of same-shape tensors, shape (m, n, .., n)."""
    stack = np.asarray(coeff_stack, dtype=np.int64) % p
    m = stack.shape[0]
    d = stack.ndim - 1
    n = stack.shape[1]
    N = p**n
    required = N ** (d - 1)
    if required > cap:
        raise FeasibilityError("multilinear bias", required, cap)
    P = all_points(p, n)
    per = max(1, _CHUNK_BUDGET // (required * n))
    out = np.empty(m, dtype=np.int64)
    flat = stack.reshape(m, -1)
    for r in chunk_ranges(m, per):
        cur = _contract_leading(flat[r.start:r.stop], P, p, d - 1)
        out[r.start:r.stop] = (~cur.any(axis=2)).sum(axis=1)
    return out


def kernel_count(T: Tensor, cap: int = DEFAULT_CAP, workers: int = 1) -> int:
    """#{(x_1..x_{d-1}) : T(x_1, .., x_{d-1}, .) is the zero linear form}."""
    p, n, d = T.shape
    N = p**n
    required = N ** (d - 1)
    if required > cap:
        raise FeasibilityError("multilinear bias", required, cap)
    P = all_points(p, n)
    flat = T.flat()[None, :]
    per_first = max(1, N ** (d - 2) * n)
    chunks = chunk_ranges(N, max(1, _CHUNK_BUDGET // per_first))

    def count(r: range) -> int:
        cur = _contract_leading(flat, P, p, d - 1, first=P[r.start:r.stop])
        return int((~cur.any(axis=2)).sum())

    return sum(shard_map(count, chunks, workers))


@dataclass(frozen=True)
class BiasValue:
    """A bias together with how it was obtained.

    ``multilinear`` values are exact: ``numerator / p**denominator_exponent``.
    ``diagonal`` values are complex averages and carry no exact form.
    """

    kind: str
    modulus: int
    value: complex
    numerator: int | None = None
    denominator_exponent: int | None = None

    @property
    def exact(self) -> Fraction:
        if self.numerator is None:
            raise ValueError("diagonal bias has no exact rational form")
        return Fraction(self.numerator, self.modulus**self.denominator_exponent)

    @property
    def real(self) -> float:
        return self.value.real


def bias_multilinear(T: Tensor, cap: int = DEFAULT_CAP, workers: int = 1) -> BiasValue:
    p, n, d = T.shape
    m = kernel_count(T, cap=cap, workers=workers)
    e = n * (d - 1)
    return BiasValue("multilinear", p, complex(float(Fraction(m, p**e))), m, e)


def bias_character_sum(T: Tensor, chi: Character | None = None, cap: int = DEFAULT_CAP) -> complex:
    """E over all d-tuples of chi(T(x_1..x_d)), straight from the definition."""
    p, n, d = T.shape
    chi = chi or Character(p)
    N = p**n
    if N**d > cap:
        raise FeasibilityError("character-sum bias", N**d, cap)
    P = all_points(p, n)
    vals = _contract_leading(T.flat()[None, :], P, p, d).reshape(-1)
    hist = np.bincount(vals, minlength=p)
    return complex(hist @ chi.table()) / N**d


def analytic_rank_from_count(count: int, p: int, n: int, d: int) -> float:
    e = n * (d - 1)
    if count == p**e:
        return 0.0
    return e - log_p(count, p)


def analytic_rank(T: Tensor, cap: int = DEFAULT_CAP, workers: int = 1) -> float:
    """-log_p bias(T), from the exact kernel count."""
    p, n, d = T.shape
    return analytic_rank_from_count(kernel_count(T, cap, workers), p, n, d)


def arank_at_most(T: Tensor, r: int, cap: int = DEFAULT_CAP) -> bool:
    """Exact test of arank(T) <= r for integer r, i.e. bias(T) >= p^-r."""
    p, n, d = T.shape
    return kernel_count(T, cap) * p**r >= p ** (n * (d - 1))


def diagonal_histogram(T: Tensor, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Counts of each value of T(x, .., x) over x in F_p^n."""
    p, n, _ = T.shape
    if p**n > cap:
        raise FeasibilityError("diagonal bias", p**n, cap)
    return np.bincount(diagonal_values(T, all_points(p, n)), minlength=p)


def diagonal_bias(T: Tensor, chi: Character | None = None, cap: int = DEFAULT_CAP) -> complex:
    """E_x chi(T(x, .., x)), one weighted character sum over exact counts."""
    p, n, _ = T.shape
    chi = chi or Character(p)
    if chi.modulus != p:
        raise ValueError("character modulus does not match tensor")
    hist = diagonal_histogram(T, cap)
    return complex(hist @ chi.table()) / p**n


def gowers_wolf_bound(T: Tensor, cap: int = DEFAULT_CAP) -> float:
    """p^(-arank(T) / 2^(d-1))."""
    p, _, d = T.shape
    return p ** (-analytic_rank(T, cap) / 2 ** (d - 1))


def random_tensor(p: int, n: int, d: int, rng: np.random.Generator) -> Tensor:
    return Tensor(rng.integers(0, p, size=(n,) * d), p)


def all_tensors(p: int, n: int, d: int, cap: int = 1 << 20) -> np.ndarray:
    """Every coefficient box of F_p^{n x..x n} stacked, shape (p**(n**d), n, .., n)."""
    size = p ** (n**d)
    if size > cap:
        raise FeasibilityError("tensor space enumeration", size, cap)
    return all_points(p, n**d).reshape((size,) + (n,) * d)
