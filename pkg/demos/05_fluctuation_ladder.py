"""
Two scales of free-energy fluctuations
--------------------------------------

Across a ladder of system sizes: the leading statistic
N^{p/2}(F_N - beta^2/2) keeps a variance near beta^4 p!/2, while the
deflated gap N^{p/2}(F_N - J_N) tightens as N grows.  Enumeration is
exact per replica, so the only noise is the disorder average.
"""

import math

import numpy as np

from pspinlab import ExperimentConfig, ModelParams, clt_variance, run_experiment

p, beta, replicas = 3, 0.4, 200
target_sd = math.sqrt(clt_variance(beta, p))
print(f"p={p}, beta={beta}, {replicas} replicas per size, "
      f"target sd {target_sd:.5f}")
print(f"{'N':>3} {'sd leading':>11} {'sd gap':>9} {'mean gap':>10}")
for N in (10, 12, 14, 16, 18):
    config = ExperimentConfig(
        params=ModelParams(N=N, p=p, beta=beta),
        replicas=replicas,
        base_seed=2024,
        mode="theorem1",
    )
    report = run_experiment(config)
    t1 = np.array([s.scaled_t1 for s in report.samples])
    gap = np.array([s.scaled_gap for s in report.samples])
    print(f"{N:3d} {t1.std(ddof=1):11.5f} {gap.std(ddof=1):9.5f} {gap.mean():+10.5f}")

print("\nthe leading column sits near the CLT value (the finite-N variance")
print("runs a little high at these sizes); the gap column is an order of")
print("magnitude smaller and still shrinking, which is what makes the")
print("second, finer limit visible after subtracting J_N.")
