"""Generalized minimizers, minimizers of the envelope, and their relations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GammaRegError, PointSet, SampledFunction, infimum
from .geometry import ConvexBody, OutsideHull, _clean_measure, _lp_measure, contains, convex_hull, distance, hausdorff
from .transform import (
    dual_grid,
    envelope,
    envelope_biconjugate,
    envelope_tolerance,
    lower_hull,
    lsc_hull,
)


class SubsetNotInM(GammaRegError):
    pass


def default_tolerance(h: SampledFunction) -> float:
    """Round-off tolerance for minimizer sets, relative to the data scale."""
    fin = h.values[h.finite]
    return 1e-9 * max(1.0, float(np.abs(fin).max()))


def _tol(h: SampledFunction, tol: float | None) -> float:
    if tol is None:
        return default_tolerance(h)
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return float(tol)


def generalized_minimizers(h: SampledFunction, tol: float | None = None) -> PointSet:
    """Nodes where the lsc hull of ``h`` is within ``tol`` of ``inf h``.

    On a grid the limit points of approximating minimizers are the
    minimizers of the lsc hull surrogate, i.e. argmin nodes of ``h`` together
    with their one-cell neighbours.
    """
    tol = _tol(h, tol)
    h0 = lsc_hull(h).values
    mask = h0 <= infimum(h) + tol
    return PointSet(h.grid.nodes[mask], h.grid.eps_geom)


def envelope_minimizers(h: SampledFunction, tol: float | None = None) -> ConvexBody:
    """Convex hull of the nodes minimizing the convex envelope (within ``tol``)."""
    tol = _tol(h, tol)
    g = envelope(h).values
    mask = g <= g.min() + tol
    return convex_hull(h.grid.nodes[mask], eps=h.grid.eps_geom)


@dataclass
class Theorem1Report:
    inf_h: float
    inf_envelope: float
    inf_gap: float
    inf_gap_biconjugate: float
    set_gap: float
    delta_env: float
    set_tolerance: float
    tol: float
    spacing: float

    @property
    def passed(self) -> bool:
        return (
            self.inf_gap <= self.delta_env
            and self.inf_gap_biconjugate <= self.delta_env
            and self.set_gap <= self.set_tolerance
        )


def check_theorem1(h: SampledFunction, tol: float | None = None, dual=None) -> Theorem1Report:
    """Infimum equality and ``M = co(Omega)`` measured on the grid.

    ``inf_gap`` uses the hull envelope; ``inf_gap_biconjugate`` repeats the
    comparison with the biconjugate route.
    """
    tol = _tol(h, tol)
    dual = dual_grid(h) if dual is None else dual
    inf_h = infimum(h)
    inf_g = infimum(envelope(h))
    inf_bi = infimum(envelope_biconjugate(h, dual))
    m = envelope_minimizers(h, tol)
    omega = generalized_minimizers(h, tol)
    co_omega = convex_hull(omega, eps=h.grid.eps_geom)
    spacing = h.grid.max_spacing
    return Theorem1Report(
        inf_h=inf_h,
        inf_envelope=inf_g,
        inf_gap=abs(inf_h - inf_g),
        inf_gap_biconjugate=abs(inf_h - inf_bi),
        set_gap=hausdorff(m, co_omega),
        delta_env=envelope_tolerance(h, dual),
        set_tolerance=2 * spacing,
        tol=tol,
        spacing=spacing,
    )


@dataclass
class Theorem3Report:
    """Extreme points of the envelope minimizer set versus generalized minimizers."""

    extreme_points: np.ndarray
    omega: np.ndarray
    violations: list = field(default_factory=list)
    # generalized minimizers farther than the tolerance from every extreme point
    omega_not_extreme: np.ndarray | None = None
    tolerance: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def strict(self) -> bool:
        return self.omega_not_extreme is not None and len(self.omega_not_extreme) > 0


def _min_distances(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    if len(targets) == 0:
        return np.full(len(points), np.inf)
    diff = points[:, None, :] - targets[None, :, :]
    return np.sqrt((diff**2).sum(-1)).min(axis=1)


def check_theorem3_extreme(h: SampledFunction, tol: float | None = None) -> Theorem3Report:
    """Every vertex of the envelope minimizer set must lie within two grid
    spacings of a generalized minimizer."""
    tol = _tol(h, tol)
    m = envelope_minimizers(h, tol)
    omega = generalized_minimizers(h, tol).points
    ext = m.vertices
    bound = 2 * h.grid.max_spacing
    d = _min_distances(ext, omega)
    violations = [(v.tolist(), float(dv)) for v, dv in zip(ext, d) if dv > bound]
    rest = omega[_min_distances(omega, ext) > bound]
    return Theorem3Report(ext, omega, violations, rest, bound)


@dataclass
class ExhaustionMember:
    body: ConvexBody
    inf_restricted: float
    inf_gap: float
    included: bool
    extreme_points: np.ndarray
    max_distance_to_omega: float


@dataclass
class ExhaustionResult:
    points: PointSet
    members: list
    tolerance: float
    certified: bool


def restrict(h: SampledFunction, body: ConvexBody) -> SampledFunction:
    """``h`` on the nodes inside ``body`` and ``inf`` elsewhere."""
    eps = h.grid.eps_geom
    inside = np.array([contains(body, x, eps) for x in h.grid.nodes])
    return h.with_values(np.where(inside, h.values, np.inf))


def nested_exhaustion(h: SampledFunction, family, tol: float | None = None) -> ExhaustionResult:
    """Extreme points of envelope minimizers of ``h`` restricted to each
    convex subset of ``M`` in ``family``.

    A member contributes only when the infimum over its nodes equals the
    global infimum (within ``tol``). Every contributed point is certified
    to lie within two spacings of the generalized minimizers of ``h``.
    """
    tol = _tol(h, tol)
    eps = h.grid.eps_geom
    m = envelope_minimizers(h, tol)
    omega = generalized_minimizers(h, tol).points
    inf_h = infimum(h)
    bound = 2 * h.grid.max_spacing
    members, collected = [], []
    for body in family:
        if not isinstance(body, ConvexBody):
            body = convex_hull(body, eps=eps)
        for v in body.vertices:
            if not contains(m, v, eps):
                raise SubsetNotInM(f"vertex {v.tolist()} of a family member lies outside M")
        hr = restrict(h, body)
        inf_r = infimum(hr)
        gap = abs(inf_r - inf_h)
        ext = envelope_minimizers(hr, tol).vertices
        include = gap <= tol
        far = float(_min_distances(ext, omega).max()) if len(ext) else 0.0
        members.append(ExhaustionMember(body, inf_r, gap, include, ext, far))
        if include:
            collected.append(ext)
    pts = np.vstack(collected) if collected else np.empty((0, h.grid.dim))
    out = PointSet(pts, eps)
    certified = all(mb.max_distance_to_omega <= bound for mb in members if mb.included)
    return ExhaustionResult(out, members, bound, certified)


def representing_measure(h: SampledFunction, x):
    """Probability measure on nodes with barycenter ``x`` whose integral of
    ``h`` equals the envelope at ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    fin = h.finite
    pts = h.grid.nodes[fin]
    vals = h.values[fin]
    if h.grid.dim > 2:
        return _lp_measure(pts, vals, x, h.grid.eps_geom)
    ids, w = lower_hull(h).decompose(x)
    return _clean_measure(pts, ids, w, x, vals, h.grid.eps_geom)


__all__ = [
    "OutsideHull",
    "SubsetNotInM",
    "Theorem1Report",
    "Theorem3Report",
    "check_theorem1",
    "check_theorem3_extreme",
    "default_tolerance",
    "distance",
    "envelope_minimizers",
    "generalized_minimizers",
    "nested_exhaustion",
    "representing_measure",
    "restrict",
]
