"""Subdifferentials of conjugates through tilted minimization.

Slopes ``x*`` are linear functionals, represented as
:class:`~gammareg.core.AffineFunction` with zero intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AffineFunction, GammaRegError, Grid, PointSet, SampledFunction, linear
from .geometry import ConvexBody, convex_hull, distance
from .minimize import default_tolerance, generalized_minimizers
from .transform import dual_grid, envelope, envelope_tolerance


class NonlinearTilt(GammaRegError):
    pass


class RadiusBelowResolution(GammaRegError):
    pass


class DensityHypothesisFails(GammaRegError):
    pass


def _as_functional(xstar, dim: int) -> AffineFunction:
    if isinstance(xstar, AffineFunction):
        return xstar
    return linear(np.broadcast_to(np.asarray(xstar, dtype=float), (dim,)))


def tilt(h: SampledFunction, xstar) -> SampledFunction:
    """``h - x*`` at every node; ``inf`` stays ``inf``."""
    xstar = _as_functional(xstar, h.grid.dim)
    if xstar.intercept != 0.0:
        raise NonlinearTilt(f"tilt must be linear, got intercept {xstar.intercept!r}")
    if xstar.slope.size != h.grid.dim:
        raise ValueError(f"slope has {xstar.slope.size} entries for a {h.grid.dim}-d grid")
    vals = h.values - h.grid.nodes @ xstar.slope
    vals[~h.finite] = np.inf
    return h.with_values(vals)


def subdifferential(h: SampledFunction, xstar, tol: float | None = None) -> ConvexBody:
    """Subdifferential of the conjugate at ``x*``: hull of the generalized
    minimizers of the tilted function."""
    ht = tilt(h, xstar)
    tol = default_tolerance(ht) if tol is None else tol
    return convex_hull(generalized_minimizers(ht, tol), eps=h.grid.eps_geom)


def conjugate_at(h: SampledFunction, xstar) -> float:
    """``h*(x*)`` by direct maximization over the finite nodes."""
    p = _as_functional(xstar, h.grid.dim).slope
    fin = h.finite
    return float((h.grid.nodes[fin] @ p - h.values[fin]).max())


@dataclass
class DifferentiabilityScan:
    """Dual nodes where the conjugate has a (numerically) unique subgradient."""

    points: PointSet
    gradients: np.ndarray
    scanned: int
    width_tol: float


def differentiability_scan(
    h: SampledFunction,
    dual: Grid | None = None,
    width_tol: float | None = None,
    center=None,
    radius: float | None = None,
) -> DifferentiabilityScan:
    """Scan dual nodes for a singleton subdifferential.

    A node counts as differentiable when its subdifferential has diameter
    at most ``width_tol`` (default three primal spacings); the centroid of
    that small body is kept as the gradient. ``center``/``radius`` limit the
    scan to an open ball of slopes.
    """
    dual = dual_grid(h) if dual is None else dual
    width_tol = 3 * h.grid.max_spacing if width_tol is None else width_tol
    nodes = dual.nodes
    if center is not None and radius is not None:
        c = np.broadcast_to(np.asarray(center, dtype=float), (dual.dim,))
        nodes = nodes[np.linalg.norm(nodes - c, axis=1) < radius]
    keep, grads = [], []
    for p in nodes:
        body = subdifferential(h, linear(p))
        if body.diameter <= width_tol:
            keep.append(p)
            grads.append(body.centroid())
    pts = np.array(keep).reshape(-1, dual.dim)
    g = np.array(grads).reshape(-1, h.grid.dim)
    order = np.lexsort(pts.T[::-1]) if len(pts) else np.arange(0)
    return DifferentiabilityScan(PointSet(pts[order]), g[order], len(nodes), width_tol)


@dataclass
class LimitingGradients:
    per_radius: list
    intersection: PointSet
    radii: list
    counts: list


def _present(p: np.ndarray, pts: np.ndarray, tol: float) -> bool:
    return len(pts) > 0 and float(np.linalg.norm(pts - p, axis=1).min()) <= tol


def limiting_gradients(
    h: SampledFunction,
    xstar,
    radii,
    dual: Grid | None = None,
    width_tol: float | None = None,
) -> LimitingGradients:
    """Gradients of the conjugate collected from differentiable slopes in
    shrinking balls around ``x*``, and their intersection across radii."""
    dual = dual_grid(h) if dual is None else dual
    radii = [float(r) for r in radii]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    if min(radii) < dual.max_spacing:
        raise RadiusBelowResolution(
            f"radius {min(radii)!r} is below the dual spacing {dual.max_spacing!r}"
        )
    center = _as_functional(xstar, h.grid.dim).slope
    scan = differentiability_scan(h, dual, width_tol, center=center, radius=radii[0])
    p = scan.points.points
    dist = np.linalg.norm(p - center, axis=1) if len(p) else np.empty(0)
    eps = h.grid.eps_geom
    per_radius, counts = [], []
    for r in radii:
        sel = dist < r
        counts.append(int(sel.sum()))
        per_radius.append(PointSet(scan.gradients[sel].reshape(-1, h.grid.dim), eps))
    match = 2 * h.grid.max_spacing
    last = per_radius[-1].points
    common = [q for q in last if all(_present(q, s.points, match) for s in per_radius)]
    inter = PointSet(np.array(common).reshape(-1, h.grid.dim), eps)
    return LimitingGradients(per_radius, inter, radii, counts)


@dataclass
class LRReport:
    included: bool
    excess: float
    tolerance: float
    subdifferential: ConvexBody
    limiting: LimitingGradients


def check_corollary_LR(
    h: SampledFunction,
    xstar,
    radii,
    dual: Grid | None = None,
    tol: float | None = None,
    width_tol: float | None = None,
) -> LRReport:
    """Check that the subdifferential of the conjugate at ``x*`` lies in the
    convex hull of the limiting gradients (within two primal spacings).

    Raises :class:`DensityHypothesisFails` when some ball of slopes holds no
    differentiable node.
    """
    lim = limiting_gradients(h, xstar, radii, dual, width_tol)
    for r, c in zip(lim.radii, lim.counts):
        if c == 0:
            raise DensityHypothesisFails(f"no differentiable slope within radius {r!r} of x*")
    if len(lim.intersection) == 0:
        raise DensityHypothesisFails("limiting gradient sets have an empty intersection")
    body = subdifferential(h, xstar, tol)
    hull_t = convex_hull(lim.intersection, eps=h.grid.eps_geom)
    excess = max(distance(hull_t, v) for v in body.vertices)
    bound = 2 * h.grid.max_spacing
    return LRReport(excess <= bound, float(excess), bound, body, lim)


@dataclass
class FenchelYoungReport:
    slope: np.ndarray
    conjugate: float
    gaps: np.ndarray
    tolerance: float

    @property
    def max_gap(self) -> float:
        return float(np.max(np.abs(self.gaps))) if len(self.gaps) else 0.0

    @property
    def passed(self) -> bool:
        return self.max_gap <= self.tolerance


def check_fenchel_young(
    h: SampledFunction, xstar, tol: float | None = None, dual: Grid | None = None
) -> FenchelYoungReport:
    """``h*(p) + envelope(v) - p.v`` at every vertex ``v`` of the
    subdifferential at ``p``; zero for exact subgradients."""
    xstar = _as_functional(xstar, h.grid.dim)
    ht = tilt(h, xstar)
    tol = default_tolerance(ht) if tol is None else tol
    body = subdifferential(h, xstar, tol)
    hstar = conjugate_at(h, xstar)
    g = envelope(h, dual)
    gaps = []
    for v in body.vertices:
        i = h.grid.node_index(v)
        gaps.append(hstar + g.values[i] - float(v @ xstar.slope))
    delta = envelope_tolerance(h, dual)
    return FenchelYoungReport(xstar.slope, hstar, np.array(gaps), delta + tol)
