"""
Feature subspaces shrink the problem
====================================

If the column and row spaces of ``L`` are known to lie in ``span(X)`` and
``span(Y)``, the solver only has to find a small core ``H`` with
``L = X H Y^T``. Here the features are the true singular subspaces padded
with ten random extra directions each.
"""

from sirpca import solve_pcpf, solve_pcpsf, solve_raps, synth
from sirpca.bench import relative_error

inst = synth.benchmark_instance(seed=1, side_model="entrywise", d=10)
x, y = inst.features.x, inst.features.y
print("features:", x.shape, y.shape)

###############################################################################
# PCPF (no side information), RAPS (column features only) and PCPSF
# (features and side information).

for name, res in (
    ("pcpf", solve_pcpf(inst.m, inst.features)),
    ("raps", solve_raps(inst.m, x)),
    ("pcpsf", solve_pcpsf(inst.m, inst.w, inst.features)),
):
    print(f"{name:6s} core {res.core.shape}  rel_error {relative_error(res.low_rank, inst.l0):.2e}"
          f"  ({res.iterations} iterations)")
