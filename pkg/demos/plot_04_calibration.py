"""
How much weight should side information get?
============================================

A sweep over kappa at fixed lambda shows the two extremes: perfect side
information (``W = L0``) tolerates any weight, while using the observation
itself as side information (``W = M``) breaks down once kappa is large,
because the solver is then pulled towards keeping the corruption.
"""

import math

from sirpca import bench, synth

kappas = [0.0, 0.05, 0.2, 0.8]
lam = 1 / math.sqrt(200)

for side in ("exact", "entrywise", "observation"):
    inst = synth.benchmark_instance(seed=0, side_model=side)
    sweep = bench.run_param_sweep(inst, kappas, [lam])
    row = "  ".join(f"{k:4.2f}:{e:8.1e}" for k, e in zip(kappas, sweep.rel_error[:, 0]))
    print(f"{side:12s} {row}")
