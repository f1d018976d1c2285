"""Command-line front end producing reproducible JSON/CSV reports.

    kapfree endtoend      --p 5 --k 3 --n 3 --s 4 --trials 100 --seed 42
    kapfree rank-audit    --p 2 --n 2 --d 3
    kapfree independence  --p 2 --n 2 --k 3 --s 2 --exact
    kapfree bounds        --p 3 --k 3 --n 9 --beta 1 --epsilon zero
    kapfree verify-lemmas
    kapfree monomials     --n 2 --d 2

Every report has the same top-level layout: ``config``, ``input_hash``,
``records``, ``aggregate``, ``failures`` and ``runtime``.  Only ``runtime``
(wall time, worker count) may differ between two runs of one config.
The exit status is 0 iff ``failures`` is empty; configuration errors exit
with 2.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from ._parallel import shard_map
from .bounds import bound_table, calibrate_beta
from .construction import InvariantViolation, finite_difference_table, run_pipeline
from .gf_core import STREAM_RANDOM_TENSOR, all_points, draw_rng, is_prime
from .linalg_fp import SubspaceFp, iter_subspaces
from .probability_lab import (
    character_identity_check,
    function_space,
    identity_chain,
    independence_exact,
    independence_lower_bound,
    independence_monte_carlo,
    linear_form_tables,
)
from .rank_lab import classify_all, measured_alpha
from .tensor_core import DEFAULT_CAP, FeasibilityError, diagonal_values
from .veronese import (
    MONOMIAL_ORDER,
    VeroneseVector,
    dual_to_symmetric,
    monomial_table,
    symmetric_to_dual,
    veronese_dim,
    veronese_images,
)

CSV_SCHEMA = 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str
    p: int | None = None
    n: list[int] | int | None = None
    k: int | None = None
    d: int | None = None
    s: int | None = None
    trials: int = 0
    seed: int = 0
    cap_enum: int = DEFAULT_CAP
    alpha: float = 1.0
    beta: float = 0.0
    epsilon: str = "default"
    exact: bool = False
    calibrate: bool = False
    # execution-only settings; excluded from the report's reproducible part
    workers: int = 1
    out: str | None = None
    format: str = "json"

    EXECUTION_FIELDS = ("workers", "out", "format")

    def echo(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in self.EXECUTION_FIELDS}

    def input_hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _check_prime(p):
    _require(p is not None and is_prime(p), f"--p must be a prime, got {p}")


def _check_ap_config(cfg: ExperimentConfig):
    _check_prime(cfg.p)
    _require(cfg.k is not None and cfg.k >= 3, "--k must be at least 3")
    _require(cfg.p >= cfg.k, f"need p >= k, got p={cfg.p}, k={cfg.k}")
    _require(cfg.n is not None and cfg.n >= 1, "--n must be at least 1")
    _require(cfg.s is not None and cfg.s >= 1, "--s must be at least 1")
    _require(cfg.cap_enum > 0, "--cap-enum must be positive")
    _require(0 <= cfg.seed < 1 << 64, "--seed must fit in 64 bits")


def _frac(x: Fraction | None) -> str | None:
    return None if x is None else f"{x.numerator}/{x.denominator}"


def _report(cfg: ExperimentConfig, records, aggregate, failures, started) -> dict:
    return {
        "tool": "kapfree",
        "version": __version__,
        "monomial_order": MONOMIAL_ORDER,
        "subcommand": cfg.subcommand,
        "config": cfg.echo(),
        "input_hash": cfg.input_hash(),
        "records": records,
        "aggregate": aggregate,
        "failures": failures,
        "runtime": {"wall_time_s": round(time.perf_counter() - started, 6), "workers": cfg.workers},
    }


def cmd_endtoend(cfg: ExperimentConfig) -> dict:
    started = time.perf_counter()
    _check_ap_config(cfg)
    _require(cfg.trials >= 1, "--trials must be at least 1")
    _require(cfg.p**cfg.n * cfg.s <= cfg.cap_enum,
             f"p^n * s = {cfg.p ** cfg.n * cfg.s} exceeds --cap-enum {cfg.cap_enum}")
    d = cfg.k - 1

    def one(t: int) -> dict:
        try:
            res = run_pipeline(cfg.p, cfg.n, cfg.k, cfg.s, cfg.seed, t, cfg.cap_enum)
        except InvariantViolation as exc:
            return {"trial": t, "error": str(exc)}
        rec = res.to_dict()
        rec["warning_floor_ok"] = None
        rec["zero_in_A"] = None
        if res.independent:
            rec["warning_floor_ok"] = cfg.n <= d or res.witness_size >= cfg.p ** (cfg.n - d)
            rec["zero_in_A"] = True  # build_witness raises otherwise
        return rec

    records = shard_map(one, range(cfg.trials), cfg.workers)
    failures = []
    for rec in records:
        if "error" in rec:
            failures.append({"trial": rec["trial"], "reason": rec["error"]})
        elif rec["independent"] and not rec["verdict"]["ok"]:
            failures.append({"trial": rec["trial"], "reason": "k-AP found", "verdict": rec["verdict"]})
        elif rec["independent"] and not rec["warning_floor_ok"]:
            failures.append({"trial": rec["trial"], "reason": "|A| below p^(n-d)"})
    indep = [r for r in records if r.get("independent")]
    passed = [r for r in indep if r["verdict"]["ok"]]
    sizes = Counter(r["A_size"] for r in indep)
    N = cfg.p**cfg.n
    aggregate = {
        "trials": cfg.trials,
        "independent": len(indep),
        "independence_rate": len(indep) / cfg.trials,
        "verified": len(passed),
        "pass_rate_among_independent": (len(passed) / len(indep)) if indep else None,
        "density_distribution": {str(k): v for k, v in sorted(sizes.items())},
        "density_min": _frac(Fraction(min(sizes), N)) if sizes else None,
        "density_max": _frac(Fraction(max(sizes), N)) if sizes else None,
        "warning_floor": _frac(Fraction(1, cfg.p ** d)) if cfg.n > d else None,
    }
    return _report(cfg, records, aggregate, failures, started)


def cmd_rank_audit(cfg: ExperimentConfig) -> dict:
    started = time.perf_counter()
    _check_prime(cfg.p)
    _require(cfg.n is not None and cfg.n >= 1, "--n must be at least 1")
    d = cfg.d if cfg.d is not None else (cfg.k - 1 if cfg.k else None)
    _require(d is not None and d >= 2, "--d (or --k) must give an order d >= 2")
    p, n = cfg.p, cfg.n
    try:
        rows = classify_all(p, n, d, workers=cfg.workers)
    except FeasibilityError as exc:
        raise ConfigError(str(exc)) from exc
    records = [asdict(r) for r in rows]
    failures = []
    violations = [r.tensor_id for r in rows if not r.arank_le_prank(p)]
    if violations:
        failures.append({"check": "arank <= prank", "tensor_ids": violations})
    max_rank = max(r.prank for r in rows)
    lemma = []
    for r in range(max_rank + 1):
        count = sum(1 for row in rows if row.prank <= r)
        exponent = 2 * n ** (d - 1) * r
        ok = count <= p**exponent
        lemma.append({"r": r, "count": count, "bound_log_p": exponent, "ok": ok})
        if not ok:
            failures.append({"check": "low partition rank count", "r": r, "count": count})
    aggregate = {
        "tensors": len(rows),
        "arank_le_prank_violations": len(violations),
        "low_prank_counts": lemma,
        "measured_alpha": measured_alpha(rows),
        "prank_histogram": dict(sorted(Counter(r.prank for r in rows).items())),
    }
    if d == 2:
        mismatch = [r.tensor_id for r in rows if r.bias_numerator != p ** (n - r.prank)]
        aggregate["arank_equals_matrix_rank"] = not mismatch
        if mismatch:
            failures.append({"check": "arank == matrix rank", "tensor_ids": mismatch})
    return _report(cfg, records, aggregate, failures, started)


def cmd_independence(cfg: ExperimentConfig) -> dict:
    started = time.perf_counter()
    _check_prime(cfg.p)
    _require(cfg.k is not None and cfg.k >= 2, "--k must be at least 2")
    _require(cfg.n is not None and cfg.n >= 1, "--n must be at least 1")
    _require(cfg.s is not None and cfg.s >= 1, "--s must be at least 1")
    _require(cfg.exact or cfg.trials >= 1, "give --exact or a positive --trials")
    p, n, d, s = cfg.p, cfg.n, cfg.k - 1, cfg.s
    rec = {"p": p, "n": n, "d": d, "s": s, "exact": None, "mc_estimate": None,
           "ci_low": None, "ci_high": None, "lemma_bound": None}
    failures = []
    exact = None
    try:
        if cfg.exact:
            exact = independence_exact(p, n, d, s, cfg.cap_enum, cfg.workers).probability
            rec["exact"] = _frac(exact)
    except FeasibilityError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.trials:
        mc = independence_monte_carlo(p, n, d, s, cfg.trials, cfg.seed, cfg.workers)
        lo, hi = mc.wilson_interval()
        rec.update(mc_estimate=mc.estimate, ci_low=lo, ci_high=hi)
        if exact is not None:
            sigma = math.sqrt(float(exact) * (1 - float(exact)) / cfg.trials)
            if abs(mc.estimate - float(exact)) > 3 * sigma + 1e-15:
                failures.append({"check": "monte carlo within 3 sigma", "exact": rec["exact"],
                                 "estimate": mc.estimate})
    try:
        lb = independence_lower_bound(p, n, d, s)
        rec["lemma_bound"] = _frac(lb.bound)
        if exact is not None and lb.bound > exact:
            failures.append({"check": "lower bound <= exact", "bound": rec["lemma_bound"]})
    except FeasibilityError:
        pass
    return _report(cfg, [rec], {"veronese_dim": veronese_dim(n, d)}, failures, started)


def cmd_bounds(cfg: ExperimentConfig) -> dict:
    started = time.perf_counter()
    _check_prime(cfg.p)
    _require(cfg.k is not None and 3 <= cfg.k <= cfg.p, "need 3 <= k <= p")
    ns = cfg.n if isinstance(cfg.n, list) else [cfg.n]
    _require(all(v is not None and v >= 2 for v in ns), "--n values must be at least 2")
    _require(cfg.alpha >= 1, "--alpha must be at least 1")
    rows = bound_table(cfg.p, cfg.k, ns, cfg.alpha, cfg.beta, cfg.epsilon)
    failures = [{"check": "e2 < -d log_p n", "n": r["n"]} for r in rows if not r["e2_ok"]]
    aggregate = {}
    if cfg.calibrate:
        try:
            cal = calibrate_beta(cfg.p, ns, cfg.k - 1, cfg.alpha, cfg.epsilon)
            aggregate["calibrated_beta"] = cal.beta
            aggregate["beta_resolution"] = cal.resolution
            aggregate["vacuous_n"] = list(cal.vacuous_n)
        except ValueError as exc:
            aggregate["calibration_error"] = str(exc)
    return _report(cfg, rows, aggregate, failures, started)


def _lemma_checks(seed: int, workers: int) -> list[dict]:
    checks = []

    def record(name, params, passed, detail=None):
        checks.append({"check": name, "params": params, "passed": bool(passed), "detail": detail})

    # character identity over every subspace of linear forms of dim <= 2
    for p, m in ((2, 2), (3, 3)):
        for dim in range(3):
            bad = 0
            total = 0
            for W in iter_subspaces(p, m, dim):
                V = function_space(linear_form_tables(W.basis, p, m), p) if dim else \
                    SubspaceFp.zero(p**m, p)
                total += 1
                bad += not character_identity_check(V).holds
            record("character identity", {"p": p, "m": m, "dim": dim, "subspaces": total}, bad == 0)

    # finite-difference identity on seeded random symmetric tensors
    for p, d, n in ((5, 2, 2), (7, 3, 2)):
        rng = draw_rng(seed, STREAM_RANDOM_TENSOR, p * 100 + d)
        bad = 0
        for _ in range(5):
            T = dual_to_symmetric(VeroneseVector(rng.integers(0, p, veronese_dim(n, d)), d, n, p))
            table = finite_difference_table(T)
            expect = (math.factorial(d) * diagonal_values(T, all_points(p, n))) % p
            bad += not np.array_equal(table, np.broadcast_to(expect[None, :], table.shape))
        record("finite difference", {"p": p, "d": d, "n": n}, bad == 0)

    # defining identity <v_T, phi_d(x)> = T(x, .., x)
    for p, n, d in ((5, 2, 2), (5, 3, 3), (7, 2, 4)):
        rng = draw_rng(seed, STREAM_RANDOM_TENSOR, 10_000 + p * 100 + n * 10 + d)
        P = all_points(p, n)
        v = VeroneseVector(rng.integers(0, p, veronese_dim(n, d)), d, n, p)
        T = dual_to_symmetric(v)
        ok = np.array_equal((veronese_images(P, d, p) @ v.entries) % p, diagonal_values(T, P))
        ok &= symmetric_to_dual(T) == v
        record("veronese duality", {"p": p, "n": n, "d": d}, ok)

    # independence lower bound at the tiny grid point
    for s in (1, 2, 3):
        ex = independence_exact(2, 2, 2, s, workers=workers).probability
        lb = independence_lower_bound(2, 2, 2, s).bound
        record("independence lower bound", {"p": 2, "n": 2, "d": 2, "s": s}, lb <= ex,
               {"exact": _frac(ex), "bound": _frac(lb)})

    # P[phi(x) in U] = P[all of U-perp vanishes on phi(x)]
    bad = 0
    for dim in range(4):
        for U in iter_subspaces(2, 3, dim):
            a, b = identity_chain(U, 2, 2)
            bad += a != b
    record("membership identity chain", {"p": 2, "n": 2, "d": 2}, bad == 0)
    return checks


def cmd_verify_lemmas(cfg: ExperimentConfig) -> dict:
    started = time.perf_counter()
    records = _lemma_checks(cfg.seed, cfg.workers)
    failures = [r for r in records if not r["passed"]]
    return _report(cfg, records, {"checks": len(records), "passed": len(records) - len(failures)},
                   failures, started)


def cmd_monomials(cfg: ExperimentConfig) -> dict:
    started = time.perf_counter()
    _require(cfg.n is not None and cfg.n >= 1, "--n must be at least 1")
    _require(cfg.d is not None and cfg.d >= 1, "--d must be at least 1")
    rows = monomial_table(cfg.n, cfg.d)
    return _report(cfg, rows, {"dimension": len(rows)}, [], started)


COMMANDS = {
    "endtoend": cmd_endtoend,
    "rank-audit": cmd_rank_audit,
    "independence": cmd_independence,
    "bounds": cmd_bounds,
    "verify-lemmas": cmd_verify_lemmas,
    "monomials": cmd_monomials,
}


def run(cfg: ExperimentConfig) -> dict:
    return COMMANDS[cfg.subcommand](cfg)


def strip_runtime(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "runtime"}


def _csv_cell(v):
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"), sort_keys=True)
    if v is None:
        return ""
    return v


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# kapfree-{report['subcommand']} schema={CSV_SCHEMA} input_hash={report['input_hash']}\n")
    rows = report["records"]
    if rows:
        cols = list(rows[0].keys())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_csv_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kapfree", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--p", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--d", type=int)
        sp.add_argument("--s", type=int)
        sp.add_argument("--trials", type=int, default=0)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--alpha", type=float, default=1.0)
        sp.add_argument("--beta", type=float, default=0.0)
        sp.add_argument("--epsilon", choices=["default", "zero"], default="default")
        sp.add_argument("--cap-enum", type=int, default=DEFAULT_CAP)
        sp.add_argument("--exact", action="store_true")
        sp.add_argument("--calibrate", action="store_true")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    for name in COMMANDS:
        sp = sub.add_parser(name)
        common(sp)
        if name == "bounds":
            sp.add_argument("--n", type=int, nargs="+", default=[9])
        else:
            sp.add_argument("--n", type=int)
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        subcommand=args.subcommand, p=args.p, n=args.n, k=args.k, d=args.d, s=args.s,
        trials=args.trials, seed=args.seed, cap_enum=args.cap_enum, alpha=args.alpha,
        beta=args.beta, epsilon=args.epsilon, exact=args.exact, calibrate=args.calibrate,
        workers=args.workers, out=args.out, format=args.format,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        report = run(cfg)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    text = render(report, cfg.format)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report["failures"]:
        print(json.dumps({"error": "assertions", "failures": report["failures"]}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
