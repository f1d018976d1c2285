"""Acceptance gate: one test per criterion, each summarized at session end."""
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from kapfree.bounds import default_epsilon, r0_value, term_exponents, threshold_s
from kapfree.construction import build_witness, find_tensor, run_pipeline, verify_no_kap
from kapfree.gf_core import STREAM_RANDOM_TENSOR, all_points, draw_rng
from kapfree.harness_cli import ExperimentConfig, render, run, strip_runtime
from kapfree.linalg_fp import SubspaceFp, iter_subspaces, rank
from kapfree.probability_lab import (
    character_identity_check,
    function_space,
    independence_exact,
    independence_lower_bound,
    independence_monte_carlo,
    linear_form_tables,
)
from kapfree.rank_lab import classify_all, prank_table
from kapfree.tensor_core import (
    SymmetricTensor,
    Tensor,
    all_tensors,
    diagonal_bias,
    diagonal_values,
    kernel_count,
    kernel_counts,
    random_tensor,
)
from kapfree.veronese import VeroneseVector, dual_to_symmetric, veronese_dim


@pytest.mark.criterion(1, "d=2 analytic rank equals matrix rank")
def test_criterion_1_arank_is_matrix_rank(stopwatch):
    for p, n in [(3, 2), (2, 3)]:
        stack = all_tensors(p, n, 2)
        assert stack.shape[0] == {(3, 2): 81, (2, 3): 512}[(p, n)]
        counts = kernel_counts(stack, p)
        for M, c in zip(stack, counts):
            r = rank(M, p)
            # bias = c / p^n exactly; arank is an integer iff c is a power of p
            assert c * p**r == p**n
    assert stopwatch() < 5


@pytest.mark.criterion(2, "arank <= prank on all of F_2^{2x2x2}")
def test_criterion_2_arank_below_prank(stopwatch):
    rows = classify_all(2, 2, 3)
    assert len(rows) == 256
    violations = [r.tensor_id for r in rows if r.bias_numerator * 2**r.prank < 2**r.bias_denominator_exponent]
    assert violations == []
    assert stopwatch() < 120


@pytest.mark.criterion(3, "low partition rank count bound")
def test_criterion_3_low_prank_counts(stopwatch):
    dist = np.asarray(prank_table(2, 2, 3).dist)
    counts = [int((dist <= r).sum()) for r in (0, 1, 2)]
    assert counts[0] == 1
    for r, c in enumerate(counts):
        assert c <= 2 ** (8 * r)
    assert stopwatch() < 120


@pytest.mark.criterion(4, "diagonal bias bounded by p^(-arank/2^(d-1))")
def test_criterion_4_gowers_wolf_literal(stopwatch):
    """The bound as stated, over every tensor, symmetric or not."""
    violations = []

    def check(T, label):
        p, _, d = T.shape
        bound = p ** (-(T.shape[1] * (d - 1) - math.log(kernel_count(T), p)) / 2 ** (d - 1))
        if abs(diagonal_bias(T)) > bound + 1e-9:
            violations.append(label)

    for i, C in enumerate(all_tensors(2, 2, 3)):
        check(Tensor(C, 2), ("F_2^{2x2x2}", i))
    rng = draw_rng(2024, STREAM_RANDOM_TENSOR, 0)
    for i in range(1000):
        p = int(rng.choice([3, 5]))
        d = int(rng.choice([2, 3]))
        n = int(rng.integers(1, 5))
        check(random_tensor(p, n, d, rng), ("random", i, p, n, d))
    exhaustive = sum(1 for v in violations if v[0] == "F_2^{2x2x2}")
    assert not violations, (
        f"{len(violations)} violations ({exhaustive} exhaustive, {len(violations) - exhaustive} random); "
        f"first: {violations[0]}"
    )
    assert stopwatch() < 300


@pytest.mark.criterion("4b", "supplementary: same bound for symmetric T with p > d")
def test_criterion_4b_gowers_wolf_symmetric(stopwatch):
    """The regime the bound actually covers: symmetric tensors in characteristic above d."""
    p, n, d = 5, 2, 3
    D = veronese_dim(n, d)
    for v in all_points(p, D):
        T = dual_to_symmetric(VeroneseVector(v, d, n, p))
        count = kernel_count(T)
        assert abs(diagonal_bias(T)) <= p ** (-(n * (d - 1) - math.log(count, p)) / 2 ** (d - 1)) + 1e-9
    rng = draw_rng(2024, STREAM_RANDOM_TENSOR, 1)
    for _ in range(1000):
        p = int(rng.choice([3, 5]))
        d = 2 if p == 3 else int(rng.choice([2, 3]))
        n = int(rng.integers(1, 5))
        v = VeroneseVector(rng.integers(0, p, veronese_dim(n, d)), d, n, p)
        T = dual_to_symmetric(v)
        count = kernel_count(T)
        assert abs(diagonal_bias(T)) <= p ** (-(n * (d - 1) - math.log(count, p)) / 2 ** (d - 1)) + 1e-9
    assert stopwatch() < 300


@pytest.mark.criterion(5, "end-to-end: zero k-APs, Warning floor, 0 in A")
def test_criterion_5_end_to_end(stopwatch):
    for p, k, n, s in [(5, 3, 2, 3), (5, 3, 3, 5), (7, 4, 2, 3), (7, 5, 2, 2)]:
        d = k - 1
        independent = 0
        for t in range(100):
            res = run_pipeline(p, n, k, s, seed=42, trial=t)
            if not res.independent:
                continue
            independent += 1
            assert res.verdict.ok, (p, k, n, s, t, res.verdict.to_dict())
            A = build_witness(res.tensor)
            assert A.mask[0]
            if n > d:
                assert A.size >= p ** (n - d)
            # re-verify from scratch rather than trusting the pipeline record
            assert verify_no_kap(A, res.difference_set, k).ok
            assert find_tensor(res.difference_set, d) == res.tensor
        assert independent > 0
    assert stopwatch() < 600


@pytest.mark.criterion(6, "finite-difference identity, all (x, s)")
def test_criterion_6_finite_difference(stopwatch):
    for p, d, n in [(5, 2, 2), (7, 3, 2)]:
        rng = draw_rng(6, STREAM_RANDOM_TENSOR, p)
        P = all_points(p, n)
        N = P.shape[0]
        for _ in range(5):
            T = dual_to_symmetric(VeroneseVector(rng.integers(0, p, veronese_dim(n, d)), d, n, p))
            Q = diagonal_values(T, P)
            # independent evaluation: weights applied to Q at x + j s, pair by pair
            x_idx, s_idx = np.divmod(np.arange(N * N), N)
            delta = np.zeros(N * N, dtype=np.int64)
            for j in range(d + 1):
                pts = (P[x_idx] + j * P[s_idx]) % p
                delta += math.comb(d, j) * (-1) ** (d - j) * diagonal_values(T, pts)
            assert np.array_equal(delta % p, (math.factorial(d) * Q[s_idx]) % p)
    assert stopwatch() < 60


@pytest.mark.criterion(7, "character identity, exact, all subspaces of dim <= 2")
def test_criterion_7_character_identity(stopwatch):
    for p, m in [(2, 2), (3, 3)]:
        for dim in range(3):
            for W in iter_subspaces(p, m, dim):
                if dim:
                    V = function_space(linear_form_tables(W.basis, p, m), p)
                else:
                    V = SubspaceFp.zero(p**m, p)
                res = character_identity_check(V)
                assert res.rhs is not None and res.lhs == res.rhs
                assert res.lhs == Fraction(1, p ** W.dim)
                assert abs(res.rhs_float - float(res.lhs)) < 1e-12
    assert stopwatch() < 60


@pytest.mark.criterion(8, "independence lower bound and Monte Carlo at (2,2,2)")
def test_criterion_8_independence(stopwatch):
    for s in (1, 2, 3):
        exact = independence_exact(2, 2, 2, s).probability
        lb = independence_lower_bound(2, 2, 2, s).bound
        assert exact >= lb
        mc = independence_monte_carlo(2, 2, 2, s, 100_000, seed=8)
        sigma = math.sqrt(float(exact) * (1 - float(exact)) / mc.trials)
        assert abs(mc.estimate - float(exact)) <= 3 * sigma
    assert stopwatch() < 120


@pytest.mark.criterion(9, "bounds calculator on the d<=4, p<=7, n<=1e6 grid")
def test_criterion_9_bounds(stopwatch):
    ns = sorted({2, 3, 4, 7, 9, 10, 27, 100, 1000, 4096, 10**4, 10**5, 999_983, 10**6})
    for d in (2, 3, 4):
        for p in (2, 3, 5, 7):
            for n in ns:
                L = math.log(n) / math.log(p)
                eps = default_epsilon(n)
                r0 = (d * 2 ** (d - 1) + 1) * L
                assert r0_value(p, n, d) == pytest.approx(r0, rel=1e-12)
                r = r0 ** (1 + eps)
                for dim in (0, 1, math.comb(n + d - 1, d)):
                    te = term_exponents(p, n, d, dim_uperp=dim)
                    assert te.e1 == pytest.approx(2 * n ** (d - 1) * r - dim, rel=1e-12, abs=1e-9)
                    assert te.e2 == pytest.approx(-r0 / 2 ** (d - 1), rel=1e-12)
                    assert te.e2 < -d * L
    assert threshold_s(3, 9, 3, 1, epsilon="zero") == 27
    assert stopwatch() < 10


DETERMINISM_CONFIGS = [
    ExperimentConfig("endtoend", p=5, n=3, k=3, s=4, trials=30, seed=42),
    ExperimentConfig("rank-audit", p=2, n=2, d=3),
    ExperimentConfig("independence", p=3, n=2, k=3, s=3, trials=20_000, seed=7, exact=True),
    ExperimentConfig("bounds", p=3, n=[4, 9, 16, 64], k=3, calibrate=True),
    ExperimentConfig("verify-lemmas", seed=3),
    ExperimentConfig("monomials", n=3, d=3),
]


@pytest.mark.criterion(10, "reports identical across worker counts")
def test_criterion_10_determinism():
    for base in DETERMINISM_CONFIGS:
        texts = set()
        for workers in (1, 2, 5):
            for fmt in ("json", "csv"):
                cfg = ExperimentConfig(**{**base.__dict__, "workers": workers, "format": fmt})
                texts.add((fmt, render(strip_runtime(run(cfg)) | {"runtime": None}, fmt)))
        assert len(texts) == 2, base.subcommand
