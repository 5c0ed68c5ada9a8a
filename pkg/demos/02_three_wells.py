"""Three equal wells and a hidden minimizer.

h(x) = x^2 (x^2 - 1)^2 vanishes at -1, 0 and 1. The envelope minimizer set is
[-1, 1] whose extreme points are only -1 and 1, so the middle well is
invisible to them. Restricting h to a convex piece of that set that still
attains the infimum brings 0 back.
"""
import numpy as np

from gammareg.core import Box, build_grid, sample
from gammareg.funclang import Function
from gammareg.minimize import check_theorem3_extreme, generalized_minimizers, nested_exhaustion

grid = build_grid(Box(np.array([-2.0]), np.array([2.0])), 100)
h = sample(grid, Function("x^2 * (x^2 - 1)^2"))

rep = check_theorem3_extreme(h)
print("extreme points of M :", rep.extreme_points.ravel())
print("generalized minimizers:", generalized_minimizers(h).points.ravel())
print("minimizers that are not extreme:", rep.omega_not_extreme.ravel())

family = [np.array([[-0.5], [0.5]])]
ex = nested_exhaustion(h, family)
for mb in ex.members:
    print(f"member {mb.body.vertices.ravel()}: inf gap {mb.inf_gap:.1e}, "
          f"extreme points {mb.extreme_points.ravel()}")
print("recovered points:", ex.points.points.ravel(), " certified:", ex.certified)

# a member whose infimum is above the global one contributes nothing
ex = nested_exhaustion(h, [np.array([[-0.9], [-0.3]])])
print("off-well member included?", ex.members[0].included)
