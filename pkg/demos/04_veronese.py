"""
The Veronese map and symmetric tensors
======================================

phi_d lists the degree-d monomials of x; a symmetric tensor T corresponds
to a dual vector v_T with <v_T, phi_d(x)> = T(x, .., x).
"""
import numpy as np

from kapfree.gf_core import FpVector, all_points
from kapfree.tensor_core import SymmetricTensor, diagonal_values
from kapfree.veronese import (
    dual_to_symmetric,
    image_independence,
    monomial_table,
    symmetric_to_dual,
    veronese_images,
    veronese_map,
)

for row in monomial_table(2, 3):
    print(row)

print("phi_2(1, 2) over F_5:", veronese_map(FpVector([1, 2], 5), 2).tolist())

T = SymmetricTensor([[0, 1], [1, 0]], 5)
v = symmetric_to_dual(T)
print("v_T for 2 x1 x2:", v.tolist())
print("round trip:", dual_to_symmetric(v) == T)

# The defining identity, checked at every point of F_5^2.
P = all_points(5, 2)
print("identity holds:", np.array_equal((veronese_images(P, 2, 5) @ v.entries) % 5, diagonal_values(T, P)))

# x and -x share their quadratic image, so they are never jointly independent.
print(image_independence([FpVector([1, 2], 5), FpVector([4, 3], 5)], 2))
print(image_independence([FpVector([1, 0], 5), FpVector([0, 1], 5)], 2))
