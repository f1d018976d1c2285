"""Prime-field arithmetic, additive characters and seeded sampling.

Everything downstream works on numpy integer arrays holding residues in
``[0, p)``; the small value types here exist for scalar-level code and for
validating moduli at API boundaries.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

MAX_MODULUS = 1 << 16

# stream ids for the counter-based generator; one per independent use
STREAM_VECTOR = 0
STREAM_DIFFERENCE_SET = 1
STREAM_MONTE_CARLO = 2
STREAM_RANDOM_TENSOR = 3


class NonInvertibleError(ZeroDivisionError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def check_modulus(p: int) -> int:
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    if p > MAX_MODULUS:
        raise ValueError(f"modulus {p} exceeds supported maximum {MAX_MODULUS}")
    return p


@dataclass(frozen=True)
class FpScalar:
    value: int
    modulus: int

    def __post_init__(self):
        check_modulus(self.modulus)
        object.__setattr__(self, "value", int(self.value) % self.modulus)

    def _coerce(self, other) -> int:
        if isinstance(other, FpScalar):
            if other.modulus != self.modulus:
                raise ValueError("modulus mismatch")
            return other.value
        return int(other)

    def __add__(self, other):
        return FpScalar(self.value + self._coerce(other), self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        return FpScalar(self.value - self._coerce(other), self.modulus)

    def __rsub__(self, other):
        return FpScalar(self._coerce(other) - self.value, self.modulus)

    def __mul__(self, other):
        return FpScalar(self.value * self._coerce(other), self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return FpScalar(-self.value, self.modulus)

    def __truediv__(self, other):
        return self * fp_inv(FpScalar(self._coerce(other), self.modulus))

    def __pow__(self, e: int):
        if e < 0:
            return fp_inv(self) ** (-e)
        return FpScalar(pow(self.value, e, self.modulus), self.modulus)

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, FpScalar):
            return self.modulus == other.modulus and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.modulus))

    def inv(self):
        return fp_inv(self)


def fp_inv(a: FpScalar) -> FpScalar:
    if a.value == 0:
        raise NonInvertibleError(f"non-invertible: 0 in F_{a.modulus}")
    return FpScalar(pow(a.value, -1, a.modulus), a.modulus)


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise NonInvertibleError(f"non-invertible: 0 in F_{p}")
    return pow(a, -1, p)


class FpVector:
    """An immutable vector of residues in F_p^n backed by an int64 array."""

    __slots__ = ("entries", "modulus")

    def __init__(self, entries, modulus: int):
        p = check_modulus(modulus)
        arr = np.array(entries, dtype=np.int64).reshape(-1) % p
        arr.setflags(write=False)
        self.entries = arr
        self.modulus = p

    def __len__(self):
        return self.entries.shape[0]

    def __getitem__(self, i):
        return FpScalar(int(self.entries[i]), self.modulus)

    def __iter__(self):
        return (FpScalar(int(v), self.modulus) for v in self.entries)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, FpVector):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.modulus, self.entries.tobytes()))

    def __repr__(self):
        return f"FpVector({self.entries.tolist()}, p={self.modulus})"

    def __add__(self, other):
        _same_modulus(self, other)
        return FpVector(self.entries + other.entries, self.modulus)

    def __sub__(self, other):
        _same_modulus(self, other)
        return FpVector(self.entries - other.entries, self.modulus)

    def __rmul__(self, c):
        return FpVector(int(c) * self.entries, self.modulus)

    def dot(self, other) -> FpScalar:
        _same_modulus(self, other)
        return FpScalar(int(self.entries @ other.entries), self.modulus)

    def is_zero(self) -> bool:
        return not self.entries.any()

    def tolist(self):
        return self.entries.tolist()


def _same_modulus(a: FpVector, b: FpVector):
    if a.modulus != b.modulus or len(a) != len(b):
        raise ValueError("vectors differ in modulus or length")


@dataclass(frozen=True)
class Character:
    """The additive character a -> exp(2 pi i g a / p)."""

    modulus: int
    generator: int = 1

    def __post_init__(self):
        check_modulus(self.modulus)
        if not 1 <= self.generator < self.modulus:
            raise ValueError("character generator must lie in [1, p)")

    def __call__(self, a) -> complex:
        return char_value(self, a)

    def table(self) -> np.ndarray:
        """chi(a) for a = 0..p-1 as a complex array."""
        a = np.arange(self.modulus)
        return np.exp(2j * np.pi * ((self.generator * a) % self.modulus) / self.modulus)


def char_value(chi: Character, a) -> complex:
    if isinstance(a, FpScalar):
        if a.modulus != chi.modulus:
            raise ValueError("modulus mismatch between character and scalar")
        a = a.value
    t = (chi.generator * int(a)) % chi.modulus
    return cmath.exp(2j * math.pi * t / chi.modulus)


def draw_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Generator keyed by ``(seed, stream)`` and positioned at block ``index``.

    Philox is counter based, so any (seed, stream, index) triple can be
    materialized independently of every other; this is what makes sharded
    runs reproduce serial ones.
    """
    if seed < 0 or seed >= 1 << 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    key = int(seed) | (int(stream) << 64)
    bitgen = np.random.Philox(key=key, counter=[0, 0, int(index), 0])
    return np.random.Generator(bitgen)


def sample_vector(n: int, p: int, rng: np.random.Generator) -> FpVector:
    if n < 1:
        raise ValueError("vector length must be at least 1")
    p = check_modulus(p)
    return FpVector(rng.integers(0, p, size=n), p)


def all_points(p: int, n: int) -> np.ndarray:
    """Every vector of F_p^n, shape (p**n, n), in packed-index order.

    Row ``i`` is the base-p expansion of ``i`` with the first coordinate most
    significant, so ``pack_points`` inverts this enumeration.
    """
    idx = np.arange(p**n, dtype=np.int64)
    powers = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % p


def pack_points(x: np.ndarray, p: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    n = x.shape[-1]
    powers = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (x % p) @ powers


def log_p(x: int, p: int) -> float:
    """log base p of a positive integer, exact when ``x`` is a power of p."""
    if x < 1:
        raise ValueError("log of a non-positive number")
    e, y = 0, x
    while y % p == 0:
        y //= p
        e += 1
    if y == 1:
        return float(e)
    return math.log(x) / math.log(p)
