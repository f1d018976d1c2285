"""
Exact partition rank on a tiny tensor space
===========================================

Every tensor of F_2^{2x2x2} gets an exact partition rank from a
breadth-first search over sums of rank-one pieces, plus a certificate.
"""
from collections import Counter

from kapfree.rank_lab import classify_all, count_low_prank, measured_alpha, partition_rank, prank1_enumerate
from kapfree.tensor_core import Tensor

ones = list(prank1_enumerate(2, 2, 3))
print("partition-rank-one tensors:", len(ones))

T = Tensor.unit(2, 2, (0, 0, 0)) + Tensor.unit(2, 2, (1, 1, 1))
res = partition_rank(T)
print("prank(e111 + e222) =", res.value, res.status)
for term in res.certificate.summands:
    print("  ", term.to_dict())
print("certificate reconstructs T:", res.certificate.verifies(T))

# Counts of low-rank tensors next to the 2^(8r) bound.
for r in range(3):
    count, exponent = count_low_prank(2, 2, 3, r)
    print(f"r={r}: {count} tensors with prank <= r, bound 2^{exponent}")

rows = classify_all(2, 2, 3)
print("histogram of prank:", dict(sorted(Counter(r.prank for r in rows).items())))
print("arank <= prank everywhere:", all(r.arank_le_prank(2) for r in rows))
print("smallest alpha with prank <= alpha a (log(1+a)+1):", round(measured_alpha(rows), 4))
