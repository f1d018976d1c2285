"""Partition rank on tiny tensor spaces.

Exact partition rank is a shortest-path problem: the rank of T is its
distance from 0 in the Cayley graph of the tensor space generated by the
partition-rank-1 tensors.  :func:`prank_table` runs that breadth-first
search once per (p, n, d), with the level sets serving as the memoized
"rank <= r" sets, and records a parent pointer per tensor so every answer
comes with a certificate.

Tensors are identified by their code: the row-major coefficient list read
as a base-p integer.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._parallel import chunk_ranges, shard_map
from .gf_core import all_points
from .linalg_fp import batch_rank
from .linalg_fp import rank as matrix_rank
from .linalg_fp import rref
from .tensor_core import (
    FeasibilityError,
    Tensor,
    all_tensors,
    analytic_rank_from_count,
    kernel_counts,
)

EXACT_CAP = 1 << 20


@dataclass(frozen=True)
class PartitionSplit:
    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("both sides of a split must be nonempty")
        if set(self.left) & set(self.right):
            raise ValueError("split sides overlap")

    @property
    def arity(self) -> tuple[int, int]:
        return len(self.left), len(self.right)

    @property
    def order(self) -> int:
        return len(self.left) + len(self.right)


def all_splits(d: int) -> list[PartitionSplit]:
    """Splits of {0..d-1} into two nonempty parts, complements identified.

    The side holding index 0 is stored as ``left``.
    """
    rest = list(range(1, d))
    out = []
    for size in range(0, d - 1):
        for extra in itertools.combinations(rest, size):
            left = (0,) + extra
            right = tuple(i for i in range(d) if i not in left)
            out.append(PartitionSplit(left, right))
    return out


def rank1_coeffs(split: PartitionSplit, left_form: np.ndarray, right_form: np.ndarray, p: int) -> np.ndarray:
    """Coefficients of (x -> T1(x_left) * T2(x_right))."""
    outer = np.multiply.outer(np.asarray(left_form), np.asarray(right_form)) % p
    return outer.transpose(np.argsort(split.left + split.right))


@dataclass(frozen=True)
class Rank1Term:
    split: PartitionSplit
    left_form: np.ndarray
    right_form: np.ndarray

    def coeffs(self, p: int) -> np.ndarray:
        return rank1_coeffs(self.split, self.left_form, self.right_form, p)

    def to_dict(self) -> dict:
        return {
            "left": list(self.split.left),
            "right": list(self.split.right),
            "left_form": np.asarray(self.left_form).reshape(-1).tolist(),
            "right_form": np.asarray(self.right_form).reshape(-1).tolist(),
        }


@dataclass
class RankCertificate:
    modulus: int
    side: int
    order: int
    summands: list[Rank1Term] = field(default_factory=list)

    def reconstruct(self) -> Tensor:
        p, n, d = self.modulus, self.side, self.order
        total = np.zeros((n,) * d, dtype=np.int64)
        for term in self.summands:
            total = (total + term.coeffs(p)) % p
        return Tensor(total, p)

    def verifies(self, T: Tensor) -> bool:
        return self.reconstruct() == T

    def __len__(self):
        return len(self.summands)


@dataclass(frozen=True)
class PartitionRankResult:
    """Outcome of a partition-rank query.

    ``status`` is "exact", "upper_bound" (outside the exhaustive envelope) or
    "exceeds" (the exact value is larger than the requested r_max).
    """

    value: int | None
    status: str
    certificate: RankCertificate | None

    @property
    def exact(self) -> bool:
        return self.status == "exact"


def _powers(p: int, length: int) -> np.ndarray:
    return p ** np.arange(length - 1, -1, -1, dtype=np.int64)


def encode(coeffs: np.ndarray, p: int) -> np.ndarray:
    """Codes for a stack of coefficient boxes (any trailing shape)."""
    c = np.asarray(coeffs, dtype=np.int64)
    return c.reshape(c.shape[0], -1) @ _powers(p, c[0].size)


def decode(codes: np.ndarray, p: int, n: int, d: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    digits = (codes[:, None] // _powers(p, n**d)[None, :]) % p
    return digits.reshape((codes.shape[0],) + (n,) * d)


def _normalized_forms(p: int, n: int, a: int) -> np.ndarray:
    """Nonzero a-linear forms whose first nonzero coefficient is 1."""
    F = all_points(p, n**a)[1:]
    first = F[np.arange(F.shape[0]), (F != 0).argmax(axis=1)]
    return F[first == 1]


@dataclass(frozen=True)
class Rank1Family:
    """Every partition-rank-1 tensor of a space, deduplicated."""

    modulus: int
    side: int
    order: int
    codes: np.ndarray
    terms: tuple[Rank1Term, ...]

    def __len__(self):
        return self.codes.shape[0]


def _check_space(p: int, n: int, d: int, cap: int):
    size = p ** (n**d)
    if size > cap:
        raise FeasibilityError("exhaustive partition-rank search", size, cap)


@lru_cache(maxsize=32)
def rank1_family(p: int, n: int, d: int, cap: int = EXACT_CAP) -> Rank1Family:
    """Canonical enumeration of the partition-rank-1 tensors.

    Generated split by split, left form normalized to leading coefficient 1,
    right form any nonzero form; the first occurrence of each distinct
    tensor is kept, so the order is deterministic.
    """
    _check_space(p, n, d, cap)
    all_codes, all_terms = [], []
    for split in all_splits(d):
        a, b = split.arity
        A = _normalized_forms(p, n, a)
        B = all_points(p, n**b)[1:]
        outer = (A[:, None, :, None] * B[None, :, None, :]) % p
        outer = outer.reshape((A.shape[0] * B.shape[0],) + (n,) * d)
        perm = np.argsort(split.left + split.right)
        outer = outer.transpose((0,) + tuple(1 + perm))
        all_codes.append(encode(outer, p))
        all_terms.extend(
            (split, A[i].reshape((n,) * a), B[j].reshape((n,) * b))
            for i in range(A.shape[0]) for j in range(B.shape[0])
        )
    codes = np.concatenate(all_codes)
    _, first = np.unique(codes, return_index=True)
    first.sort()
    terms = tuple(Rank1Term(*all_terms[i]) for i in first)
    out = codes[first]
    out.setflags(write=False)
    return Rank1Family(p, n, d, out, terms)


def prank1_enumerate(p: int, n: int, d: int, cap: int = EXACT_CAP):
    """Yield every tensor of partition rank exactly 1, each once."""
    fam = rank1_family(p, n, d, cap)
    for code in fam.codes:
        yield Tensor(decode(np.array([code]), p, n, d)[0], p)


@dataclass(frozen=True)
class PrankTable:
    modulus: int
    side: int
    order: int
    dist: np.ndarray
    parent: np.ndarray
    via: np.ndarray
    family: Rank1Family

    def rank_of_code(self, code: int) -> int:
        return int(self.dist[code])

    def certificate(self, code: int) -> RankCertificate:
        cert = RankCertificate(self.modulus, self.side, self.order)
        while code != 0:
            cert.summands.append(self.family.terms[int(self.via[code])])
            code = int(self.parent[code])
        cert.summands.reverse()
        return cert

    def counts_by_rank(self) -> list[int]:
        return np.bincount(self.dist).tolist()


@lru_cache(maxsize=16)
def prank_table(p: int, n: int, d: int, cap: int = EXACT_CAP, workers: int = 1) -> PrankTable:
    """Exact partition rank of every tensor in F_p^{n x..x n} by BFS from 0."""
    _check_space(p, n, d, cap)
    fam = rank1_family(p, n, d, cap)
    size = p ** (n**d)
    dist = np.full(size, -1, dtype=np.int16)
    parent = np.zeros(size, dtype=np.int64)
    via = np.full(size, -1, dtype=np.int64)
    dist[0] = 0
    gens = np.asarray(fam.codes)
    gen_digits = decode(gens, p, n, d).reshape(gens.shape[0], -1)
    powers = _powers(p, n**d)
    frontier = np.array([0], dtype=np.int64)
    level = 0
    per = max(1, (1 << 22) // max(1, gens.shape[0] * (1 if p == 2 else n**d)))

    def expand(r: range) -> np.ndarray:
        f = frontier[r.start:r.stop]
        if p == 2:
            return f[:, None] ^ gens[None, :]
        fd = decode(f, p, n, d).reshape(f.shape[0], 1, -1)
        return ((fd + gen_digits[None, :, :]) % p) @ powers

    while frontier.size:
        blocks = shard_map(expand, chunk_ranges(frontier.size, per), workers)
        new_parts = []
        offset = 0
        for blk in blocks:
            flat = blk.reshape(-1)
            cand, idx = np.unique(flat, return_index=True)
            fresh = dist[cand] == -1
            cand, idx = cand[fresh], idx[fresh]
            dist[cand] = level + 1
            parent[cand] = frontier[offset + idx // gens.shape[0]]
            via[cand] = idx % gens.shape[0]
            new_parts.append(cand)
            offset += blk.shape[0]
        frontier = np.sort(np.concatenate(new_parts)) if new_parts else np.array([], dtype=np.int64)
        level += 1
    for arr in (dist, parent, via):
        arr.setflags(write=False)
    return PrankTable(p, n, d, dist, parent, via, fam)


def matrix_prank_oracle(M, p: int) -> int:
    return matrix_rank(M, p)


def flattening_certificate(T: Tensor) -> RankCertificate:
    """Shortest certificate obtainable from a single matrix flattening.

    For every split, a rank-r factorization of the (left x right)
    flattening gives r partition-rank-1 summands; the best split wins.
    """
    p, n, d = T.shape
    best = None
    for split in all_splits(d):
        a, b = split.arity
        M = T.coeffs.transpose(split.left + split.right).reshape(n**a, n**b)
        R, pivots = rref(M, p)
        if best is not None and len(pivots) >= len(best):
            continue
        cert = RankCertificate(p, n, d)
        for i, pc in enumerate(pivots):
            cert.summands.append(
                Rank1Term(split, M[:, pc].reshape((n,) * a), R[i].reshape((n,) * b))
            )
        best = cert
    return best


def partition_rank(T: Tensor, r_max: int | None = None, cap: int = EXACT_CAP) -> PartitionRankResult:
    p, n, d = T.shape
    if d == 2:
        cert = flattening_certificate(T)
        r = len(cert)
        status = "exact"
    elif p ** (n**d) <= cap:
        table = prank_table(p, n, d, cap)
        code = int(encode(T.coeffs[None], p)[0])
        r = table.rank_of_code(code)
        cert = table.certificate(code)
        status = "exact"
    else:
        cert = flattening_certificate(T)
        r = len(cert)
        status = "upper_bound"
    if not cert.verifies(T):
        raise RuntimeError("partition-rank certificate failed to reconstruct its tensor")
    if r_max is not None and r > r_max:
        if status == "exact":
            return PartitionRankResult(None, "exceeds", None)
    return PartitionRankResult(r, status, cert)


def tensor_space_size(p: int, n: int, d: int) -> int:
    """f(d): the number of d-tensors on F_p^n."""
    return p ** (n**d)


def prank1_count_bound(p: int, n: int, d: int) -> int:
    """sum_{a=1}^{d-1} f(a) f(d-a) C(d, a), the union bound on g(d)."""
    return sum(
        tensor_space_size(p, n, a) * tensor_space_size(p, n, d - a) * math.comb(d, a)
        for a in range(1, d)
    )


def count_low_prank(p: int, n: int, d: int, r: int, cap: int = EXACT_CAP) -> tuple[int, int]:
    """Exact #{T : prank(T) <= r} and the exponent 2 n^(d-1) r of its bound."""
    table = prank_table(p, n, d, cap)
    count = int((table.dist <= r).sum())
    exponent = 2 * n ** (d - 1) * r
    if count > p**exponent:
        raise AssertionError(f"count {count} exceeds p^{exponent}")
    return count, exponent


@dataclass(frozen=True)
class ClassificationRow:
    tensor_id: int
    prank: int
    arank: float
    bias_numerator: int
    bias_denominator_exponent: int

    def arank_le_prank(self, p: int) -> bool:
        # bias >= p^-prank, exactly
        return self.bias_numerator * p**self.prank >= p**self.bias_denominator_exponent


def classify_all(p: int, n: int, d: int, cap: int = EXACT_CAP, workers: int = 1) -> list[ClassificationRow]:
    """(prank, arank, exact bias) for every tensor of the space, by id."""
    stack = all_tensors(p, n, d, cap)
    if d == 2:
        pr = batch_rank(stack, p)
    else:
        pr = np.asarray(prank_table(p, n, d, cap, workers).dist, dtype=np.int64)
    chunks = chunk_ranges(stack.shape[0], 4096)
    counts = np.concatenate(shard_map(lambda r: kernel_counts(stack[r.start:r.stop], p), chunks, workers))
    e = n * (d - 1)
    return [
        ClassificationRow(i, int(pr[i]), analytic_rank_from_count(int(c), p, n, d), int(c), e)
        for i, c in enumerate(counts)
    ]


def measured_alpha(rows: list[ClassificationRow]) -> float:
    """Smallest alpha with prank <= alpha * a * (log(1 + a) + 1) on the rows."""
    best = 0.0
    for row in rows:
        if row.prank == 0:
            continue
        a = row.arank
        best = max(best, row.prank / (a * (math.log1p(a) + 1)))
    return best


CSV_COLUMNS = ["tensor_id", "prank", "arank", "bias_numerator", "bias_denominator_exponent"]


def write_classification_csv(rows: list[ClassificationRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.tensor_id, r.prank, repr(r.arank), r.bias_numerator, r.bias_denominator_exponent])
