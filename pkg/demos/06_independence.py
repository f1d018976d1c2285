"""
How often is the Veronese image independent?
============================================

Exact enumeration, a lower bound from the subspace that best catches
Veronese images, and a Monte Carlo cross-check.
"""
import math

from kapfree.probability_lab import (
    character_identity_check,
    function_space,
    independence_exact,
    independence_lower_bound,
    independence_monte_carlo,
    linear_form_tables,
)

p, n, d = 2, 2, 2
for s in (1, 2, 3):
    exact = independence_exact(p, n, d, s).probability
    lb = independence_lower_bound(p, n, d, s)
    mc = independence_monte_carlo(p, n, d, s, 100_000, seed=1)
    sigma = math.sqrt(float(exact) * (1 - float(exact)) / mc.trials)
    print(f"s={s}: exact {exact}, bound {lb.bound}, Monte Carlo {mc.estimate:.4f} "
          f"({abs(mc.estimate - float(exact)) / sigma:.2f} sigma)")

# P[all of V vanish at x] equals the character average over V and x.
V = function_space(linear_form_tables([[1, 0, 0], [0, 1, 2]], 3, 3), 3)
res = character_identity_check(V)
print("character identity:", res.lhs, "=", res.rhs)
