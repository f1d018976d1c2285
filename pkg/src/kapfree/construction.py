"""Dense sets with no proper k-AP whose common difference lies in a random S.

Pipeline: draw S, check that phi_d(S) is independent (d = k - 1), solve for
a dual vector w with <w, phi_d(s)> = 1 on S, and read w back as a
symmetric tensor T with Q(x) = T(x, .., x).  The zero set A of Q then
avoids every proper k-AP with difference in S.  The reason is the d-th
finite difference along s: it equals d! * Q(s) at every base point.  If all
k = d + 1 points of an AP lay in A, that difference would vanish, which
contradicts Q(s) = 1 because d! is invertible when p > d.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._parallel import shard_map
from .gf_core import (
    STREAM_DIFFERENCE_SET,
    FpScalar,
    FpVector,
    all_points,
    check_modulus,
    draw_rng,
    pack_points,
)
from .linalg_fp import DependentSetError, solve_all_ones
from .tensor_core import DEFAULT_CAP, FeasibilityError, SymmetricTensor, diagonal_eval, diagonal_values
from .veronese import VeroneseVector, dual_to_symmetric, image_independence, veronese_images


class ResampleRequired(DependentSetError):
    """The Veronese image of S is dependent; no tensor can be read off."""


class InvariantViolation(AssertionError):
    pass


@dataclass(frozen=True)
class DifferenceSet:
    elements: tuple[FpVector, ...]
    seed: int
    trial: int
    n: int
    p: int

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def array(self) -> np.ndarray:
        return np.array([e.entries for e in self.elements], dtype=np.int64).reshape(-1, self.n)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trial": self.trial,
            "n": self.n,
            "p": self.p,
            "elements": [{"draw": i, "vector": e.tolist()} for i, e in enumerate(self.elements)],
        }

    @classmethod
    def from_vectors(cls, vectors, p: int, seed: int = 0, trial: int = 0):
        vecs = tuple(FpVector(v, p) for v in vectors)
        return cls(vecs, seed, trial, len(vecs[0]) if vecs else 0, p)


def sample_difference_set(p: int, n: int, s: int, seed: int, trial: int = 0) -> DifferenceSet:
    """``s`` independent uniform draws from F_p^n; zero and repeats allowed.

    Row ``i`` of the draw is element ``i``; ``trial`` selects an independent
    block of the counter-based generator so trials can run in any order.
    """
    if s < 1:
        raise ValueError("difference set size s must be at least 1")
    if n < 1:
        raise ValueError("dimension n must be at least 1")
    p = check_modulus(p)
    rows = draw_rng(seed, STREAM_DIFFERENCE_SET, trial).integers(0, p, size=(s, n))
    return DifferenceSet(tuple(FpVector(r, p) for r in rows), seed, trial, n, p)


def find_dual_vector(S: DifferenceSet, d: int) -> np.ndarray:
    img = veronese_images(S.array(), d, S.p)
    try:
        return solve_all_ones(img, S.p)
    except DependentSetError as exc:
        raise ResampleRequired("resample required: Veronese image of S is dependent") from exc


def find_tensor(S: DifferenceSet, d: int) -> SymmetricTensor:
    """Symmetric d-tensor T with T(s, .., s) = 1 for every s in S."""
    if S.p <= d:
        raise ValueError(f"need p > d, got p={S.p}, d={d}")
    w = find_dual_vector(S, d)
    T = dual_to_symmetric(VeroneseVector(w, d, S.n, S.p))
    for s in S:
        if diagonal_eval(T, s) != 1:
            raise InvariantViolation("constructed tensor does not take value 1 on S")
    return T


@dataclass(frozen=True)
class WitnessSet:
    """A subset of F_p^n as a boolean mask over packed indices.

    ``tensor`` is the symmetric tensor whose diagonal zero set this is, or
    None for sets built directly from a mask.
    """

    p: int
    n: int
    mask: np.ndarray
    tensor: SymmetricTensor | None = None

    @classmethod
    def from_mask(cls, mask, p: int, n: int) -> "WitnessSet":
        m = np.array(mask, dtype=bool).reshape(-1)
        if m.shape[0] != p**n:
            raise ValueError(f"mask must have p^n = {p ** n} entries")
        m.setflags(write=False)
        return cls(p, n, m)

    @property
    def members(self) -> np.ndarray:
        return np.nonzero(self.mask)[0]

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    @property
    def density(self) -> Fraction:
        return Fraction(self.size, self.p**self.n)

    def __contains__(self, x) -> bool:
        return bool(self.mask[int(pack_points(np.asarray(x), self.p))])


def build_witness(T: SymmetricTensor, cap: int = DEFAULT_CAP) -> WitnessSet:
    """A = {x : T(x, .., x) = 0}, enumerated exhaustively.

    When n > d, checks the Chevalley-Warning divisibility |A| = 0 mod p
    and Warning's floor |A| >= p^(n-d) (A always contains 0).
    """
    p, n, d = T.shape
    if T.is_zero():
        raise ValueError("the zero tensor gives the whole space")
    if p**n > cap:
        raise FeasibilityError("witness enumeration", p**n, cap)
    mask = diagonal_values(T, all_points(p, n)) == 0
    mask.setflags(write=False)
    A = WitnessSet(p, n, mask, T)
    if not mask[0]:
        raise InvariantViolation("0 is missing from the zero set")
    if n > d:
        if A.size % p:
            raise InvariantViolation(f"|A| = {A.size} not divisible by p = {p}")
        if A.size < p ** (n - d):
            raise InvariantViolation(f"|A| = {A.size} below p^(n-d) = {p ** (n - d)}")
    return A


@dataclass(frozen=True)
class KapVerdict:
    ok: bool
    base: tuple[int, ...] | None = None
    difference: tuple[int, ...] | None = None
    difference_index: int | None = None

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        if self.ok:
            return {"ok": True}
        return {"ok": False, "x": list(self.base), "s": list(self.difference), "draw": self.difference_index}


def verify_no_kap(A: WitnessSet, S: DifferenceSet, k: int, cap: int = DEFAULT_CAP, workers: int = 1) -> KapVerdict:
    """Exhaustive check that no x, x+s, .., x+(k-1)s (s in S, s != 0) lies in A.

    A failure reports the first offending pair, ordered by draw index of s
    and then by packed index of x, whatever the worker count.
    """
    p, n = A.p, A.n
    if S.p != p or S.n != n:
        raise ValueError("witness set and difference set live in different spaces")
    if p < k:
        raise ValueError(f"need p >= k, got p={p}, k={k}")
    if p**n * max(1, len(S)) > cap:
        raise FeasibilityError("k-AP verification", p**n * len(S), cap)
    P = all_points(p, n)
    diffs = S.array()

    def first_hit(i: int):
        s = diffs[i]
        if not s.any():
            return None
        inside = A.mask.copy()
        for j in range(1, k):
            inside &= A.mask[pack_points(P + j * s, p)]
        hits = np.nonzero(inside)[0]
        return int(hits[0]) if hits.size else None

    found = shard_map(first_hit, range(len(S)), workers)
    for i, x in enumerate(found):
        if x is not None:
            return KapVerdict(False, tuple(P[x].tolist()), tuple(diffs[i].tolist()), i)
    return KapVerdict(True)


def finite_difference_check(T: SymmetricTensor, x, s) -> FpScalar:
    """sum_j C(d, j) (-1)^(d-j) Q(x + j s) with Q(y) = T(y, .., y)."""
    p, _, d = T.shape
    x = np.asarray(x, dtype=np.int64)
    s = np.asarray(s, dtype=np.int64)
    pts = (x[None, :] + np.arange(d + 1)[:, None] * s[None, :]) % p
    Q = diagonal_values(T, pts)
    w = np.array([math.comb(d, j) * (-1) ** (d - j) for j in range(d + 1)], dtype=np.int64)
    return FpScalar(int(w @ Q), p)


def finite_difference_table(T: SymmetricTensor) -> np.ndarray:
    """The d-th difference for every (x, s), shape (p^n, p^n)."""
    p, n, d = T.shape
    P = all_points(p, n)
    Q = diagonal_values(T, P)
    out = np.zeros((P.shape[0], P.shape[0]), dtype=np.int64)
    for j in range(d + 1):
        shifted = pack_points(P[:, None, :] + j * P[None, :, :], p)
        out += math.comb(d, j) * (-1) ** (d - j) * Q[shifted]
    return out % p


@dataclass(frozen=True)
class PipelineResult:
    difference_set: DifferenceSet
    k: int
    independent: bool
    dual_vector: np.ndarray | None = None
    tensor: SymmetricTensor | None = None
    witness_size: int | None = None
    density: Fraction | None = None
    verdict: KapVerdict | None = None

    def to_dict(self) -> dict:
        S = self.difference_set
        out = {
            "seed": S.seed,
            "trial": S.trial,
            "p": S.p,
            "n": S.n,
            "k": self.k,
            "S": [e.tolist() for e in S],
            "independent": self.independent,
            "w": None if self.dual_vector is None else self.dual_vector.tolist(),
            "T": None if self.tensor is None else self.tensor.flat().tolist(),
            "A_size": self.witness_size,
            "density": None if self.density is None else f"{self.density.numerator}/{self.density.denominator}",
            "verdict": None if self.verdict is None else self.verdict.to_dict(),
        }
        return out


def run_pipeline(p: int, n: int, k: int, s: int, seed: int, trial: int = 0,
                 cap: int = DEFAULT_CAP) -> PipelineResult:
    d = k - 1
    S = sample_difference_set(p, n, s, seed, trial)
    if not image_independence(S, d, p):
        return PipelineResult(S, k, False)
    w = find_dual_vector(S, d)
    T = find_tensor(S, d)
    A = build_witness(T, cap)
    verdict = verify_no_kap(A, S, k, cap)
    return PipelineResult(S, k, True, w, T, A.size, A.density, verdict)
