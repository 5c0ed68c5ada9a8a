"""Maximum of a sum of convex functions sits at a vertex.

A convex function on a polytope peaks at an extreme point. The same holds
for h_minus + h_plus with both summands convex, here on a triangle.
"""
import numpy as np

from gammareg.bauer import check_bauer, check_convexity
from gammareg.core import Polytope2D, build_grid, sample
from gammareg.funclang import Function

tri = Polytope2D(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
grid = build_grid(tri, 64)
hm = sample(grid, Function("x^2 + y^2"))
hp = sample(grid, Function("abs(x - 0.4) + 2*y"))

print("nodes on the triangle:", grid.size)
print("h_minus grid convex:", check_convexity(hm).is_grid_convex)
print("h_plus grid convex :", check_convexity(hp).is_grid_convex)

r = check_bauer(hm, hp)
print(f"max over all nodes    {r.sup_K:.6f} at {r.argmax}")
print(f"max over the vertices {r.sup_extreme:.6f}")
print(f"gap {r.gap:.2e} within [-1e-9, {r.bound:.3f}]: {r.passed}")

# a concave summand breaks the hypothesis
try:
    check_bauer(hm, sample(grid, Function("-(x^2 + y^2)")))
except Exception as e:
    print(type(e).__name__ + ":", e)
