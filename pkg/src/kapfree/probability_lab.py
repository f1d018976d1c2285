"""Exact and sampled checks of the probabilistic lemmas.

All identities are compared as exact rationals obtained by counting.
Character sums are also evaluated in floating point, but only as a
secondary cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bounds
from ._parallel import chunk_ranges, shard_map
from .gf_core import STREAM_MONTE_CARLO, Character, all_points, check_modulus, draw_rng
from .linalg_fp import SubspaceFp, batch_rank, gaussian_binomial, iter_subspaces, orthogonal_complement
from .tensor_core import DEFAULT_CAP, FeasibilityError, Tensor, analytic_rank
from .veronese import VeroneseVector, dual_to_symmetric, symmetric_basis, veronese_dim, veronese_images

MC_BLOCK = 4096
SUBSPACE_CAP = 1 << 16


@dataclass(frozen=True)
class IndependenceTrialBatch:
    p: int
    n: int
    d: int
    s: int
    trials: int
    successes: int
    seed: int | None
    exact: bool

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def probability(self) -> Fraction:
        """Exact probability; only meaningful in exact mode."""
        if not self.exact:
            raise ValueError("Monte Carlo batches carry an estimate, not an exact value")
        return Fraction(self.successes, self.trials)

    def wilson_interval(self, z: float = 1.959963984540054) -> tuple[float, float]:
        n, ph = self.trials, self.estimate
        denom = 1 + z * z / n
        centre = (ph + z * z / (2 * n)) / denom
        half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom
        return max(0.0, centre - half), min(1.0, centre + half)


def _independent_tuples(p: int, n: int, d: int, tuples: np.ndarray) -> int:
    """How many of the given s-tuples (shape (m, s, n)) have independent images."""
    m, s, _ = tuples.shape
    img = veronese_images(tuples.reshape(m * s, n), d, p).reshape(m, s, -1)
    return int((batch_rank(img, p) == s).sum())


def independence_exact(p: int, n: int, d: int, s: int, cap: int = DEFAULT_CAP,
                       workers: int = 1) -> IndependenceTrialBatch:
    """Enumerate all (p^n)^s tuples and count independent Veronese images."""
    p = check_modulus(p)
    N = p**n
    total = N**s
    if s > veronese_dim(n, d):
        return IndependenceTrialBatch(p, n, d, s, total, 0, None, True)
    if total > cap:
        raise FeasibilityError("exact independence enumeration", total, cap)
    P = all_points(p, n)
    idx = all_points(N, s) if s > 1 else np.arange(N)[:, None]

    def count(r: range) -> int:
        return _independent_tuples(p, n, d, P[idx[r.start:r.stop]])

    good = sum(shard_map(count, chunk_ranges(total, MC_BLOCK), workers))
    return IndependenceTrialBatch(p, n, d, s, total, good, None, True)


def independence_monte_carlo(p: int, n: int, d: int, s: int, trials: int, seed: int,
                             workers: int = 1) -> IndependenceTrialBatch:
    """Sampled estimate; block b of MC_BLOCK trials uses generator block b."""
    p = check_modulus(p)
    if trials < 1:
        raise ValueError("trials must be positive")

    def count(r: range) -> int:
        rng = draw_rng(seed, STREAM_MONTE_CARLO, r.start // MC_BLOCK)
        tuples = rng.integers(0, p, size=(len(r), s, n))
        if s > veronese_dim(n, d):
            return 0
        return _independent_tuples(p, n, d, tuples)

    good = sum(shard_map(count, chunk_ranges(trials, MC_BLOCK), workers))
    return IndependenceTrialBatch(p, n, d, s, trials, good, seed, False)


def independence_probability(p: int, n: int, d: int, s: int, *, exact: bool = False,
                             trials: int = 100_000, seed: int = 0, cap: int = DEFAULT_CAP,
                             workers: int = 1) -> IndependenceTrialBatch:
    if exact:
        return independence_exact(p, n, d, s, cap, workers)
    return independence_monte_carlo(p, n, d, s, trials, seed, workers)


def image_hits(U: SubspaceFp, n: int, d: int) -> int:
    """#{x in F_p^n : phi_d(x) in U}."""
    img = veronese_images(all_points(U.modulus, n), d, U.modulus)
    return int(U.contains(img).sum())


@dataclass(frozen=True)
class LowerBound:
    bound: Fraction
    hit_probability: Fraction
    subspace: SubspaceFp | None


def independence_lower_bound(p: int, n: int, d: int, s: int,
                             subspace_cap: int = SUBSPACE_CAP) -> LowerBound:
    """(1 - max_U P[phi_d(x) in U])^s over all (s-1)-dimensional U.

    Ties between maximizing subspaces go to the first in enumeration order,
    i.e. the lexicographically least pivot set and fill.
    """
    p = check_modulus(p)
    D = veronese_dim(n, d)
    N = p**n
    if s - 1 >= D:
        return LowerBound(Fraction(0), Fraction(1), SubspaceFp.full(D, p) if s - 1 == D else None)
    how_many = gaussian_binomial(D, s - 1, p)
    if how_many > subspace_cap:
        raise FeasibilityError(
            f"subspace enumeration ({how_many} subspaces of dim {s - 1}); use Monte Carlo mode",
            how_many, subspace_cap)
    img = veronese_images(all_points(p, n), d, p)
    best, best_U = -1, None
    for U in iter_subspaces(p, D, s - 1):
        hits = int(U.contains(img).sum())
        if hits > best:
            best, best_U = hits, U
    q = Fraction(best, N)
    return LowerBound((1 - q) ** s, q, best_U)


def dual_vanishing_probability(Uperp: SubspaceFp, n: int, d: int) -> Fraction:
    """P_x[<v, phi_d(x)> = 0 for all v in Uperp], via the character average.

    Uses the exact evaluation of character sums described in
    :func:`character_identity_check`.
    """
    p = Uperp.modulus
    img = veronese_images(all_points(p, n), d, p)
    V = (Uperp.elements() @ img.T) % p
    return _exact_character_average(V, p)


def _exact_character_average(values: np.ndarray, p: int) -> Fraction:
    """E over all entries of chi(value), returned as an exact rational.

    sum_a c_a zeta^a with integer counts c_a is rational iff
    c_1 = .. = c_{p-1}, in which case it equals c_0 - c_1, because
    1, zeta, .., zeta^(p-2) is a basis of Q(zeta).  Otherwise a ValueError
    is raised.
    """
    c = np.bincount(values.reshape(-1), minlength=p)
    if np.any(c[1:] != c[1]):
        raise ValueError("character average is irrational")
    return Fraction(int(c[0] - c[1]), values.size)


@dataclass(frozen=True)
class CharacterIdentity:
    lhs: Fraction
    rhs: Fraction | None
    rhs_float: complex

    @property
    def holds(self) -> bool:
        return self.rhs is not None and self.lhs == self.rhs


def function_space(tables, p: int) -> SubspaceFp:
    """Span of functions given as value tables over a fixed finite domain."""
    T = np.asarray(tables, dtype=np.int64)
    return SubspaceFp.span(T, p, T.shape[-1])


def linear_form_tables(forms, p: int, m: int) -> np.ndarray:
    """Value tables over F_p^m (packed order) of the given linear forms."""
    F = np.asarray(forms, dtype=np.int64).reshape(-1, m)
    return (F @ all_points(p, m).T) % p


def character_identity_check(V: SubspaceFp, chi: Character | None = None) -> CharacterIdentity:
    """P_x[V(x) = 0] against E_{v in V, x} chi(v(x)).

    ``V`` is a subspace of functions on a domain of ``V.ambient`` points,
    each function stored as its value table.
    """
    p = V.modulus
    chi = chi or Character(p)
    vals = V.elements()
    lhs = Fraction(int((~vals.any(axis=0)).sum()), V.ambient)
    c = np.bincount(vals.reshape(-1), minlength=p)
    rhs_float = complex(c @ chi.table()) / vals.size
    try:
        rhs = _exact_character_average(vals, p)
    except ValueError:
        rhs = None
    return CharacterIdentity(lhs, rhs, rhs_float)


@dataclass(frozen=True)
class BiasSplit:
    modulus: int
    expectation: float
    low_count: int
    high_count: int
    size: int
    term_low: float
    term_high: float
    r0: float
    r: float
    bound_exponent_low: float
    bound_exponent_high: float

    @property
    def stated_bound(self) -> float:
        return _power(self.modulus, self.bound_exponent_low) + _power(self.modulus, self.bound_exponent_high)

    @property
    def holds(self) -> bool:
        return (self.expectation <= self.stated_bound + 1e-12
                and self.expectation <= self.term_low + self.term_high + 1e-12)


def _power(p: int, e: float) -> float:
    try:
        return float(p) ** e
    except OverflowError:
        return math.inf


def bias_split_expectation(Uperp: SubspaceFp, n: int, d: int, r0: float | None = None,
                           r: float | None = None, alpha: float = 1.0, epsilon="default",
                           cap: int = 1 << 16) -> BiasSplit:
    """E_{T in Uperp} p^(-arank T / 2^(d-1)) and its two-term split at r0.

    ``Uperp`` lives in Veronese coordinates; each element is read as a
    symmetric tensor, through the dual correspondence when p > d and as
    coefficients on the monomial basis of symmetric tensors otherwise (the
    dual reading is not defined in small characteristic).  The low term counts tensors with arank <= r0 at full
    weight and the high term weights the rest by p^(-r0 / 2^(d-1)).
    """
    p = Uperp.modulus
    if p**Uperp.dim > cap:
        raise FeasibilityError("enumeration of Uperp", p**Uperp.dim, cap)
    if Uperp.ambient != veronese_dim(n, d):
        raise ValueError("Uperp must live in Veronese coordinates")
    if r0 is None:
        r0 = bounds.r0_value(p, n, d)
    if r is None:
        r = bounds.r_value(r0, n, alpha, epsilon)
    scale = 2 ** (d - 1)
    weights, low = [], 0
    basis = None if p > d else np.array([B.coeffs for B in symmetric_basis(p, n, d)])
    for v in Uperp.elements():
        if basis is None:
            T = dual_to_symmetric(VeroneseVector(v, d, n, p))
        else:
            T = Tensor(np.tensordot(v, basis, axes=1) % p, p)
        a = analytic_rank(T)
        weights.append(p ** (-a / scale))
        low += a <= r0 + 1e-12
    size = len(weights)
    high = size - low
    return BiasSplit(
        modulus=p,
        expectation=float(np.mean(weights)),
        low_count=low,
        high_count=high,
        size=size,
        term_low=low / size,
        term_high=p ** (-r0 / scale) * high / size,
        r0=r0,
        r=r,
        bound_exponent_low=2 * n ** (d - 1) * r - Uperp.dim,
        bound_exponent_high=-r0 / scale,
    )


def membership_probability(U: SubspaceFp, n: int, d: int) -> Fraction:
    """P_x[phi_d(x) in U] by direct membership tests."""
    return Fraction(image_hits(U, n, d), U.modulus**n)


def identity_chain(U: SubspaceFp, n: int, d: int) -> tuple[Fraction, Fraction]:
    """Both ends of P[phi_d(x) in U] = E_{x, v in U-perp} chi(<v, phi_d(x)>)."""
    return membership_probability(U, n, d), dual_vanishing_probability(orthogonal_complement(U), n, d)

