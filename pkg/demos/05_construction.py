"""
A dense set with no 3-AP along a random difference set
=======================================================

Draw S, solve for a symmetric T with T(s, s) = 1 on S, and take A to be
the zero set of Q(x) = T(x, x).  Along any s in S the second difference of
Q is 2 Q(s) = 2, so no 3-term progression with difference s sits inside A.
"""
from kapfree.construction import (
    DifferenceSet,
    build_witness,
    find_tensor,
    finite_difference_check,
    sample_difference_set,
    verify_no_kap,
)
from kapfree.tensor_core import diagonal_eval
from kapfree.veronese import image_independence

p, n, k, s = 5, 3, 3, 4
d = k - 1
for trial in range(20):
    S = sample_difference_set(p, n, s, seed=42, trial=trial)
    if image_independence(S, d):
        break
print("S =", [e.tolist() for e in S])

T = find_tensor(S, d)
print("Q(s) on S:", [int(diagonal_eval(T, e)) for e in S])
print("second differences along S:", [int(finite_difference_check(T, [1, 2, 3], e)) for e in S])

A = build_witness(T)
print(f"|A| = {A.size} of {p ** n}, density {A.density}")
print("no 3-AP with difference in S:", verify_no_kap(A, S, k).ok)

# The same set does contain progressions along other directions.
other = DifferenceSet.from_vectors([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], p)
print("along a fixed basis:", verify_no_kap(A, other, k).to_dict())
