"""
Overlap covariance and its Hermite profile
------------------------------------------

The field covariance f_{p,N} lives on the overlap grid.  Rescaled by
N^{p/2} and viewed in the window m = x / sqrt(N), it converges to the
probabilists' Hermite polynomial He_p, and the binomial overlap weight
converges to a Gaussian.
"""

import math

from pspinlab import (
    exact_covariance,
    hermite,
    hermite_scaling_gap,
    overlap_pmf,
    overlap_pmf_gaussian,
)

p = 3
N = 80
he = hermite(p)
scale = N ** (p / 2.0)

print(f"rescaled covariance vs He_{p} at N={N} (x = sqrt(N) m)")
print(f"{'x':>6} {'N^{p/2} f':>12} {'He_p(x)':>12} {'diff':>10}")
for k_dis in range(N // 2 - 2, N // 2 + 3):
    m = 1.0 - 2.0 * k_dis / N
    x = math.sqrt(N) * m
    lhs = scale * exact_covariance(N, p, k_dis)
    print(f"{x:6.3f} {lhs:12.6f} {he(x):12.6f} {lhs - he(x):10.2e}")

print(f"\nworst gap over the window |x| <= 0.5 as N doubles")
prev = None
for n in (20, 40, 80, 160):
    g = hermite_scaling_gap(n, p)
    note = "" if prev is None else f"  ratio {prev / g:.2f}"
    print(f"N={n:4d}  gap {g:.6f}{note}")
    prev = g

n = 100
exact = overlap_pmf(n, 0.0)
approx = overlap_pmf_gaussian(n, 0.0)
print(f"\noverlap pmf at m=0, N={n}: exact {exact:.6f}, gaussian {approx:.6f}, "
      f"rel err {abs(approx - exact) / exact:.2%}")
