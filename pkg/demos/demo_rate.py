#!/usr/bin/env python3
# Sup-norm error of the averaged estimator as the sample grows, with
# the partition count following sqrt(N) and the penalty following the
# undersmoothing schedule.  The squared error should shrink roughly
# like N^(-7/9) for the configured smoothness.

import numpy as np

from dncbands import KernelSpec, rate_study

SIZES = [2**k for k in range(9, 13)]
result = rate_study(
    SIZES,
    r_prime=0.5,
    reps=8,
    seed=2,
    kernel=KernelSpec(nu=3.5, lengthscale=0.2),
    threads=4,
)

print("      N     P   median sup error")
for n, p, err in zip(result.sizes, result.partition_counts, result.median_sup_errors):
    print(f"  {n:5d}  {p:4d}   {err:.5f}")

print(f"\nslope of log(median sup-err^2) against log N: {result.slope:.3f}")
print(f"reference exponent -(2*8*0.5 - 1)/(2*8*0.5 + 1) = {-7 / 9:.3f}")
