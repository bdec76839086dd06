"""
Recovering a low-rank matrix from gross corruption
==================================================

A 200 x 200 matrix of rank 10 has 5% of its entries overwritten by +-1.
Principal component pursuit splits it back into a low-rank and a sparse
part without knowing which entries were hit.
"""

import numpy as np

from sirpca import matops, solve_pcp, synth
from sirpca.bench import success

###############################################################################
# Build the instance. Everything is derived from one integer seed.

inst = synth.benchmark_instance(seed=0)
print("observation", inst.m.shape, "corrupted entries:", np.count_nonzero(inst.s0))

###############################################################################
# Solve with the default configuration (lambda = 1/sqrt(200)).

res = solve_pcp(inst.m)
ok, err = success(res.low_rank, inst.l0)
print(f"{res.iterations} iterations, converged={res.converged}")
print("rank of L:", matops.rank(res.low_rank))
print("non-zeros of S:", np.count_nonzero(np.abs(res.sparse) > 1e-6))
print(f"relative error {err:.2e} -> {'recovered' if ok else 'failed'}")

###############################################################################
# The iteration can be watched through a callback. The penalty mu grows
# geometrically while both residuals fall.

trace = []
solve_pcp(inst.m, callback=trace.append)
for info in trace[::10]:
    print(f"  it {info.iteration:3d}  mu {info.mu:9.3e}  primal {info.residual_primal:.2e}")
