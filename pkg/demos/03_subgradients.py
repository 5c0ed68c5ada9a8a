"""Subgradients of the conjugate are minimizers of tilted functions.

For the double well the conjugate has a kink at p = 0: its subdifferential
there is [-1, 1]. Nearby slopes are smooth points whose gradients cluster
at -1 and 1, and the hull of those limits recovers the kink.
"""
import numpy as np

from gammareg.core import Box, build_grid, sample
from gammareg.funclang import Function
from gammareg.subdiff import (
    check_corollary_LR,
    check_fenchel_young,
    conjugate_at,
    subdifferential,
)
from gammareg.transform import conjugate, dual_grid

grid = build_grid(Box(np.array([-2.0]), np.array([2.0])), 400)
h = sample(grid, Function("(x^2 - 1)^2"))
dual = dual_grid(h, 1600)
hs = conjugate(h, dual)
print("dual grid:", dual.resolution, "cells on", dual.domain.lower, dual.domain.upper)

for p in (-4.0, -1.0, 0.0, 1.0, 4.0):
    body = subdifferential(h, p)
    print(f"  p={p:+.1f}  h*(p)={conjugate_at(h, p):8.4f}  subdifferential {body.vertices.ravel()}")

# Fenchel-Young holds with equality on each vertex of the subdifferential
fy = check_fenchel_young(h, 0.0, dual=dual)
print("Fenchel-Young gaps at 0:", fy.gaps, " tolerance", fy.tolerance)

lr = check_corollary_LR(h, 0.0, [0.5, 0.25, 0.1], dual)
print("differentiable slopes per radius:", lr.limiting.counts)
t = lr.limiting.intersection.points.ravel()
print("limiting gradients: from", t.min(), "to", t.max(), f"({len(t)} nodes)")
print("subdifferential inside their hull:", lr.included, f"(excess {lr.excess:.1e})")
