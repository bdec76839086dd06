"""
Background subtraction with a background photo
==============================================

Stacking video frames as columns gives a matrix whose static background is
rank one and whose moving objects are sparse. A photo of the empty scene,
tiled into a side-information matrix, sharpens the separation.
"""

from sirpca import imaging

###############################################################################
# A 64 x 64 synthetic video: textured background, a bright 16 x 16 square
# sliding right, and 5% salt-and-pepper noise in every frame.

scene = imaging.moving_square_scene(n_frames=100, seed=0)

###############################################################################
# PCP sees only the frames. PCPS also gets the clean background.

pcp = imaging.separate_background(scene.frames, solver="pcp", truth=scene.truth)
pcps = imaging.separate_background(scene.frames, scene.background, "pcps", truth=scene.truth)
short = imaging.separate_background(scene.frames.head(60), scene.background, "pcps",
                                    truth=scene.truth.head(60))

print(f"pcp       mean F1 {pcp.mean_f1:.4f}  ({pcp.elapsed:.1f}s)")
print(f"pcps      mean F1 {pcps.mean_f1:.4f}  ({pcps.elapsed:.1f}s)")
print(f"pcps[:60] mean F1 {short.mean_f1:.4f}  ({short.elapsed:.1f}s)")

###############################################################################
# Outputs can be written as PGM images, e.g.
# ``imaging.write_bgsub_outputs(pcps, "bgsub-out")``.
