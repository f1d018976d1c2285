"""
The bound calculator
====================

Threshold s, r0, r and the two exponents, all in log_p space.  At any n a
desk can reach the statement is vacuous; the calculator still shows how the
pieces scale.
"""
from kapfree.bounds import bound_table, calibrate_beta, threshold_s

print("threshold at p=3, n=9, k=3, beta=1, eps=0:", threshold_s(3, 9, 3, 1, "zero"))

for row in bound_table(3, 3, [9, 100, 10**4, 10**6], beta=1.0):
    print({key: (round(v, 2) if isinstance(v, float) else v) for key, v in row.items()})

cal = calibrate_beta(3, range(4, 65), 2)
print(f"calibrated beta on n in [4, 64]: {cal.beta} (grid {cal.resolution})")
print("n where the threshold is already 0:", len(cal.vacuous_n), "of", len(cal.n_values))
