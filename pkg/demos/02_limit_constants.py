"""
Critical temperatures and limit constants
-----------------------------------------

beta_p rises toward the random-energy-model value sqrt(2 ln 2) as the
interaction order grows, and the fine-scale Gaussian limit switches
shape with the parity of p.
"""

from pspinlab import REM_BETA, beta_p, clt_variance, limit_constants

print(f"{'p':>3} {'beta_p':>12} {'gap to REM':>12}")
for p in (2, 3, 4, 5, 6, 8, 10, 15, 25, 50):
    b = beta_p(p)
    print(f"{p:3d} {b:12.9f} {REM_BETA - b:12.3e}")
print(f"REM limit sqrt(2 ln 2) = {REM_BETA:.9f}")

beta = 0.5
print(f"\nfine-scale constants at beta = {beta}")
print(f"{'p':>3} {'clt var':>10} {'mu':>12} {'sigma^2':>14} {'a exp':>6}")
for p in (3, 4, 5, 6):
    c = limit_constants(beta, p)
    print(f"{p:3d} {clt_variance(beta, p):10.6f} {c.mu:12.6f} {c.sigma2:14.6f} {c.a_exponent:6.2f}")

print("\neven p: centered limit at scale N^{0.75p - 0.5};")
print("odd p: mean -beta^4 p!/4 at the coarser scale N^{p-1}.")
