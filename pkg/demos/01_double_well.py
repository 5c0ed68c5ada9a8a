"""Double well: the convex envelope fills in the hump.

h(x) = (x^2 - 1)^2 on [-2, 2] has two minimizers, -1 and 1. Its convex
envelope is flat on [-1, 1], so the envelope minimizers form the whole
segment while the generalized minimizers of h stay at the two wells.
"""
import numpy as np

from gammareg.core import Box, build_grid, infimum, sample
from gammareg.funclang import Function
from gammareg.minimize import (
    check_theorem1,
    envelope_minimizers,
    generalized_minimizers,
    representing_measure,
)
from gammareg.transform import envelope, envelope_tolerance

grid = build_grid(Box(np.array([-2.0]), np.array([2.0])), 400)
h = sample(grid, Function("(x^2 - 1)^2"))
g = envelope(h)

print("nodes:", grid.size, " spacing:", grid.max_spacing)
print("inf h        =", infimum(h))
print("inf envelope =", infimum(g))

# h and its envelope side by side at a few points
for x in (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0):
    i = grid.node_index([x])
    print(f"  x={x:+.1f}  h={h.values[i]:.4f}  envelope={g.values[i]:.4f}")

omega = generalized_minimizers(h)
m = envelope_minimizers(h)
print("generalized minimizers:", omega.points.ravel())
print("envelope minimizers   : segment", m.vertices.ravel())

rep = check_theorem1(h)
print(f"inf gap {rep.inf_gap:.2e} (budget {rep.delta_env:.3f}), "
      f"set gap {rep.set_gap:.2e} (budget {rep.set_tolerance:.3f})")
print("envelope tolerance:", envelope_tolerance(h))

# the envelope at 0 is an average of h over the two wells
mu = representing_measure(h, [0.0])
for p, w in zip(mu.points.ravel(), mu.weights):
    print(f"  weight {w:.3f} on x={p:+.3f}")
