"""
Per-replica identity audit
--------------------------

The identities experiment replays the structural checks on fresh
disorder: the cubic representation against the enumerated third moment,
the vanishing odd-p third moment, the quartic decomposition against its
direct double sum, integer pair-moment routes, and the consistency of
the two scaled statistics.
"""

from pspinlab import ExperimentConfig, ModelParams, run_experiment

for N, p in ((10, 3), (12, 4)):
    config = ExperimentConfig(
        params=ModelParams(N=N, p=p, beta=0.3),
        replicas=50,
        base_seed=11,
        mode="identities",
    )
    report = run_experiment(config)
    print(f"N={N}, p={p}, 50 replicas")
    for name, entry in sorted(report.identities.items()):
        print(f"  {name:<22} max residual {entry['max_residual']:.3e} "
              f"(tol {entry['tolerance']:.0e})  pass={entry['pass']}")
    print()
