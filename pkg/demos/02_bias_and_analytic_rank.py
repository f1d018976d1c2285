"""
Bias and analytic rank
======================

The bias of a multilinear form is an exact rational: average over the last
argument and the character collapses to an indicator, so the bias is the
fraction of (x_1, .., x_{d-1}) that kill the induced linear form.
"""
import numpy as np

from kapfree.tensor_core import (
    Tensor,
    analytic_rank,
    bias_character_sum,
    bias_multilinear,
    diagonal_bias,
    gowers_wolf_bound,
)

# For a matrix the bias is p^-rank, so analytic rank is matrix rank.
M = Tensor(np.diag([1, 1, 0]), 3)
b = bias_multilinear(M)
print("bias of diag(1,1,0) over F_3:", b.exact, " arank:", analytic_rank(M))

# The counting path agrees with the definition as a character average.
print("character-sum bias:", bias_character_sum(M).real)

# A 3-tensor over F_2: e111 + e222.
T = Tensor.unit(2, 2, (0, 0, 0)) + Tensor.unit(2, 2, (1, 1, 1))
print("bias(e111 + e222) =", bias_multilinear(T).exact, " arank =", round(analytic_rank(T), 4))

# Diagonal bias against the p^(-arank / 2^(d-1)) bound, for a symmetric
# quadratic form over F_5.
Q = Tensor([[1, 2], [2, 3]], 5)
print("|diagonal bias| =", round(abs(diagonal_bias(Q)), 4), " bound =", round(gowers_wolf_bound(Q), 4))

# Without symmetry the bound can fail: x1 x2 + 2 x2 x1 vanishes mod 3.
S = Tensor([[0, 1], [2, 0]], 3)
print("non-symmetric example:", abs(diagonal_bias(S)), ">", round(gowers_wolf_bound(S), 4))
