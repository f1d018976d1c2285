"""
Arithmetic and linear algebra over F_p
======================================

Scalars, characters and the handful of exact elimination routines that the
rest of the package leans on.
"""
import numpy as np

from kapfree.gf_core import Character, FpScalar, draw_rng, sample_vector
from kapfree.linalg_fp import SubspaceFp, orthogonal_complement, rank, solve_all_ones

# Scalars carry their modulus; division uses the modular inverse.
a = FpScalar(3, 7)
print("3 / 5 in F_7 =", (a / 5).value)

# A nontrivial additive character sums to zero over the field.
chi = Character(5)
print("sum of chi(a) over F_5:", abs(sum(chi(t) for t in range(5))))

# Ranks are exact: the second row is twice the first mod 5.
print("rank [[1,2],[2,4]] over F_5 =", rank([[1, 2], [2, 4]], 5))

# A dual vector pairing to 1 with each of several independent vectors.
V = np.array([[1, 0, 0], [0, 0, 1]])
w = solve_all_ones(V, 5)
print("w =", w.tolist(), " pairings:", ((V @ w) % 5).tolist())

# Subspaces are stored in reduced row-echelon form, so equal spans compare equal.
U = SubspaceFp.span([[1, 1, 0], [0, 1, 1]], 2)
print("U =", U.basis.tolist(), " U-perp =", orthogonal_complement(U).basis.tolist())

# Sampling is counter based: block i of a seed can be regenerated on its own.
print("draw 0:", sample_vector(4, 7, draw_rng(42, 0, 0)).tolist())
print("draw 0 again:", sample_vector(4, 7, draw_rng(42, 0, 0)).tolist())
