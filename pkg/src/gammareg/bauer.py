"""Maximum principle for sums of convex functions on compact convex domains.

On a finite grid semicontinuity carries no information, so the lsc/usc
split of the two summands reduces to grid convexity of each of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GammaRegError, SampledFunction, lattice_directions, lattice_triples, lipschitz_estimate

SLACK = 1e-9


class ConvexityHypothesisFails(GammaRegError):
    pass


@dataclass
class ConvexityReport:
    is_grid_convex: bool
    worst_violation: float
    triples: int


def check_convexity(h: SampledFunction) -> ConvexityReport:
    """Discrete midpoint convexity along every lattice line through the nodes.

    Uses axis lines and diagonals. Triples with an ``inf`` midpoint between
    finite ends count as violations; nodes outside a polytope are ``inf``
    in the lattice view and never form a finite triple.
    """
    lat = h.grid.to_lattice(h.values)
    worst, count = 0.0, 0
    convex = True
    for d in lattice_directions(h.grid.dim):
        if any(s != 0 and lat.shape[k] < 3 for k, s in enumerate(d)):
            continue
        a, b, c = lattice_triples(lat, d)
        ends = np.isfinite(a) & np.isfinite(c)
        if np.any(ends & ~np.isfinite(b)):
            convex = False
            worst = -np.inf
        ok = ends & np.isfinite(b)
        count += int(ok.sum())
        if ok.any():
            slack = a[ok] + c[ok] - 2 * b[ok]
            m = float(slack.min())
            worst = min(worst, m)
            if m < -SLACK:
                convex = False
    return ConvexityReport(convex, worst, count)


@dataclass
class BauerReport:
    sup_K: float
    sup_extreme: float
    gap: float
    lipschitz: float
    bound: float
    argmax: np.ndarray

    @property
    def passed(self) -> bool:
        return -SLACK <= self.gap <= self.bound


def check_bauer(h_minus: SampledFunction, h_plus: SampledFunction) -> BauerReport:
    """Compare the maximum of ``h_minus + h_plus`` over all nodes with the
    maximum over the nodes at the extreme points of the domain."""
    if h_minus.grid is not h_plus.grid and not (
        h_minus.grid.size == h_plus.grid.size
        and np.array_equal(h_minus.grid.nodes, h_plus.grid.nodes)
    ):
        raise ValueError("h_minus and h_plus must share a grid")
    for name, f in (("h_minus", h_minus), ("h_plus", h_plus)):
        rep = check_convexity(f)
        if not rep.is_grid_convex:
            raise ConvexityHypothesisFails(
                f"{name} is not grid convex (worst slack {rep.worst_violation!r})"
            )
    s = h_minus.values + h_plus.values
    i = int(np.argmax(s))
    sup_k = float(s[i])
    sup_e = float(s[h_minus.grid.extreme_indices].max())
    lip = lipschitz_estimate(h_minus) + lipschitz_estimate(h_plus)
    return BauerReport(
        sup_K=sup_k,
        sup_extreme=sup_e,
        gap=sup_k - sup_e,
        lipschitz=lip,
        bound=lip * h_minus.grid.max_spacing,
        argmax=h_minus.grid.nodes[i].copy(),
    )
