"""Calculator for the threshold, r0, r and the two exponent terms.

Everything stays in log_p space; binomials are exact Python integers and
only the subtracted correction term is a float.

The function epsilon(n) is not pinned down by the underlying existence
result, so it is a parameter here.  The default

    epsilon(x) = log(log(1 + x) + 1) / log(x)   for x > e,   1 otherwise

is a modeling choice: it is the exponent for which
x^(1 + epsilon(x)) = x * (log(1 + x) + 1).  Pass ``epsilon="zero"``, a
float, or any callable to override it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .gf_core import check_modulus, log_p

_SNAP = 1e-9


def default_epsilon(x: float) -> float:
    if x <= math.e:
        return 1.0
    return math.log(math.log1p(x) + 1) / math.log(x)


def resolve_epsilon(epsilon):
    if callable(epsilon):
        return epsilon
    if epsilon in (None, "default"):
        return default_epsilon
    if epsilon == "zero":
        return lambda x: 0.0
    if isinstance(epsilon, (int, float)):
        return lambda x, c=float(epsilon): c
    raise ValueError(f"unknown epsilon choice {epsilon!r}")


def _ceil(x: float) -> int:
    """Ceiling that treats floats within rounding noise of an integer as exact."""
    r = round(x)
    if abs(x - r) <= _SNAP * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def _check_domain(p: int, n: int, k: int):
    check_modulus(p)
    if k < 3:
        raise ValueError(f"progression length k must be at least 3, got {k}")
    if p < k:
        raise ValueError(f"need p >= k, got p={p}, k={k}")
    if n < 2:
        raise ValueError(f"need n >= 2, got n={n}")


def correction_term(p: int, n: int, k: int, beta: float, epsilon="default") -> float:
    """beta * (log_p n)^(1 + epsilon(n)) * n^(k-2)."""
    eps = resolve_epsilon(epsilon)
    return beta * log_p(n, p) ** (1 + eps(n)) * float(n) ** (k - 2)


def threshold_s(p: int, n: int, k: int, beta: float, epsilon="default", clamp: bool = True) -> int:
    """floor(C(n+k-2, k-1) - beta (log_p n)^(1+eps(n)) n^(k-2)), clamped at 0."""
    _check_domain(p, n, k)
    s = math.comb(n + k - 2, k - 1) - _ceil(correction_term(p, n, k, beta, epsilon))
    return max(s, 0) if clamp else s


def r0_value(p: int, n: int, d: int) -> float:
    """(d 2^(d-1) + 1) log_p n."""
    if n < 1:
        raise ValueError("n must be positive")
    return (d * 2 ** (d - 1) + 1) * log_p(n, p)


def r_value(r0: float, n: int, alpha: float = 1.0, epsilon="default") -> float:
    """alpha * r0^(1 + eps(n))."""
    return alpha * r0 ** (1 + resolve_epsilon(epsilon)(n))


@dataclass(frozen=True)
class BoundParams:
    p: int
    n: int
    k: int
    alpha: float
    beta: float
    epsilon: object
    r0: float
    r: float
    s_max: int

    @property
    def d(self) -> int:
        return self.k - 1

    @property
    def dim_uperp(self) -> int:
        """dim of U-perp when U has dimension s_max - 1."""
        return math.comb(self.n + self.d - 1, self.d) - max(self.s_max - 1, 0)


def make_params(p: int, n: int, k: int, alpha: float = 1.0, beta: float = 0.0,
                epsilon="default") -> BoundParams:
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    d = k - 1
    r0 = r0_value(p, n, d)
    return BoundParams(
        p=p, n=n, k=k, alpha=alpha, beta=beta,
        epsilon=epsilon,
        r0=r0,
        r=r_value(r0, n, alpha, epsilon),
        s_max=threshold_s(p, n, k, beta, epsilon),
    )


@dataclass(frozen=True)
class TermExponents:
    e1: float
    e2: float
    e1_target: float
    e2_target: float

    @property
    def e1_ok(self) -> bool:
        """e1 <= -n^(d-1) (log_p n)^(1+eps(n))."""
        return self.e1 <= self.e1_target

    @property
    def e2_ok(self) -> bool:
        """e2 < -d log_p n, i.e. p^e2 = o(n^-d)."""
        return self.e2 < self.e2_target

    @property
    def useless(self) -> bool:
        """The first term is at least 1, so the bound says nothing."""
        return self.e1 >= 0


def term_exponents(p: int, n: int, d: int, params: BoundParams | None = None,
                   dim_uperp: int | None = None, *, alpha: float = 1.0,
                   epsilon="default") -> TermExponents:
    """log_p of the two terms 2 n^(d-1) r - dim U-perp and -r0 / 2^(d-1)."""
    if params is not None:
        r0, r, eps = params.r0, params.r, resolve_epsilon(params.epsilon)
        if dim_uperp is None:
            dim_uperp = params.dim_uperp
    else:
        eps = resolve_epsilon(epsilon)
        r0 = r0_value(p, n, d)
        r = r_value(r0, n, alpha, eps)
    if dim_uperp is None:
        raise ValueError("dim_uperp is required without params")
    L = log_p(n, p)
    e1 = 2 * n ** (d - 1) * r - dim_uperp
    e2 = -r0 / 2 ** (d - 1)
    return TermExponents(e1, e2, -(n ** (d - 1)) * L ** (1 + eps(n)), -d * L)


@dataclass(frozen=True)
class Calibration:
    beta: float
    resolution: float
    n_values: tuple[int, ...]
    vacuous_n: tuple[int, ...]


def calibrate_beta(p: int, n_range, d: int, alpha: float = 1.0, epsilon="default",
                   resolution: float = 0.01, beta_max: float = 1e6) -> Calibration:
    """Smallest beta on the grid {j * resolution} meeting the e1 target on n_range.

    U-perp is given dimension C(n+d-1, d) - (s - 1) with s the unclamped
    threshold.  For small n the threshold goes negative and the statement
    is vacuous there; such n are listed in ``vacuous_n`` rather than
    excluded, because the formula-level inequality is what is calibrated.
    """
    ns = tuple(int(n) for n in n_range)
    if not ns:
        raise ValueError("n_range is empty")
    k = d + 1

    def ok(beta: float) -> bool:
        for n in ns:
            s = threshold_s(p, n, k, beta, epsilon, clamp=False)
            dim = math.comb(n + d - 1, d) - (s - 1)
            if not term_exponents(p, n, d, dim_uperp=dim, alpha=alpha, epsilon=epsilon).e1_ok:
                return False
        return True

    hi = int(math.ceil(beta_max / resolution))
    if not ok(hi * resolution):
        raise ValueError(
            f"no beta <= {beta_max} satisfies the e1 target for n in {ns[0]}..{ns[-1]} "
            f"(alpha={alpha}, d={d}, p={p})"
        )
    lo = -1  # ok(lo) is False by convention
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid >= 0 and ok(mid * resolution):
            hi = mid
        else:
            lo = mid
    beta = hi * resolution
    vacuous = tuple(n for n in ns if threshold_s(p, n, k, beta, epsilon) <= 0)
    return Calibration(beta, resolution, ns, vacuous)


def bound_table(p: int, k: int, n_values, alpha: float = 1.0, beta: float = 0.0,
                epsilon="default") -> list[dict]:
    """One row per n: threshold, r0, r, both exponents and their verdicts."""
    rows = []
    for n in n_values:
        params = make_params(p, n, k, alpha, beta, epsilon)
        te = term_exponents(p, n, k - 1, params)
        rows.append({
            "n": n,
            "s_max": params.s_max,
            "r0": params.r0,
            "r": params.r,
            "dim_uperp": params.dim_uperp,
            "e1": te.e1,
            "e2": te.e2,
            "e1_ok": te.e1_ok,
            "e2_ok": te.e2_ok,
            "useless": te.useless,
        })
    return rows
