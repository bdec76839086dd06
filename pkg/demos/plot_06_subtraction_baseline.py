"""
Why not just subtract the side information?
===========================================

A tempting shortcut is to run PCP on ``M - W`` and add ``W`` back. When
``W`` carries dense noise, that noise is full rank and lands in the
low-rank estimate untouched. PCPS instead treats ``W`` as a soft prior.
"""

import numpy as np

from sirpca import solve_pcps, solve_subtract_baseline, synth
from sirpca.bench import relative_error

inst = synth.benchmark_instance(seed=0)
g = np.random.default_rng(0).standard_normal(inst.l0.shape)
w = inst.l0 + g * (0.05 * np.linalg.norm(inst.l0) / np.linalg.norm(g))
print(f"side information error {relative_error(w, inst.l0):.1%}")

for name, res in (("subtract", solve_subtract_baseline(inst.m, w)), ("pcps", solve_pcps(inst.m, w))):
    print(f"{name:9s} rel_error {relative_error(res.low_rank, inst.l0):.2e}")
