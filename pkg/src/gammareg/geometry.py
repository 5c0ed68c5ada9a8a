"""Convex hulls, extreme points, distances and lower hulls of lifted data.

Hulls in one and two dimensions are computed directly (interval, monotone
chain). Full-dimensional three-dimensional hulls go through Qhull; lower
dimensional inputs are first reduced to their affine hull so Qhull never
sees flat data.
"""

from __future__ import annotations

import math

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, Delaunay
from scipy.spatial import QhullError

from .core import (
    DimensionMismatch,
    DiscreteMeasure,
    GammaRegError,
    PointSet,
    canonical_points,
)


class OutsideHull(GammaRegError):
    pass


def _as_points(points) -> np.ndarray:
    if isinstance(points, PointSet):
        return points.points
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Convex hull of finitely many extreme points.

    Vertices are canonical: ``[min, max]`` in 1-d, counter-clockwise from the
    lexicographically smallest vertex in 2-d, lexicographic in 3-d.
    """

    vertices: np.ndarray

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def __len__(self):
        return len(self.vertices)

    @property
    def diameter(self) -> float:
        v = self.vertices
        if len(v) == 1:
            return 0.0
        diff = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max())

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def tolist(self) -> list:
        return self.vertices.tolist()


# ---------------------------------------------------------------------------
# hulls


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(pts: np.ndarray, eps: float) -> np.ndarray:
    """Counter-clockwise hull vertices; near-collinear points are dropped."""
    pts = canonical_points(pts, eps)
    if len(pts) <= 2:
        return pts

    def half(seq):
        chain: list[np.ndarray] = []
        for p in seq:
            # pop while the turn is clockwise or the middle point sits
            # within eps of the chord
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= eps * np.linalg.norm(
                p - chain[-2]
            ):
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        return np.array([pts[0], pts[-1]])
    return np.array(hull)


def _affine_frame(pts: np.ndarray, eps: float):
    """Origin, orthonormal basis (rows) and rank of the affine hull of ``pts``."""
    origin = pts[0]
    centered = pts - origin
    if len(pts) == 1:
        return origin, np.zeros((0, pts.shape[1])), 0
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(np.abs(centered).max(), 1.0)
    rank = int(np.sum(s > max(eps, 1e-12 * scale)))
    return origin, vt[:rank], rank


def _hull_indices(pts: np.ndarray, eps: float) -> np.ndarray:
    """Indices (into ``pts``) of the extreme points of their hull."""
    n, d = pts.shape
    if n == 1:
        return np.array([0])
    origin, basis, rank = _affine_frame(pts, eps)
    if rank == 0:
        return np.array([0])
    if rank < d or d == 1:
        coords = (pts - origin) @ basis.T
    else:
        coords = pts
    if rank == 1:
        c = coords[:, 0]
        return np.array([int(np.argmin(c)), int(np.argmax(c))])
    if rank == 2:
        cand = coords
        if n > 64:
            # qhull prefilter; the chain below settles near-collinear vertices
            try:
                cand = coords[ConvexHull(coords).vertices]
            except QhullError:
                pass
        hull = _monotone_chain(cand, eps)
        idx = []
        for v in hull:
            idx.append(int(np.argmin(np.abs(coords - v).max(axis=1))))
        return np.array(idx)
    hull = ConvexHull(coords)
    return np.asarray(hull.vertices)


def convex_hull(points, dim: int | None = None, eps: float = 1e-12) -> ConvexBody:
    """Convex hull of a finite point set as a :class:`ConvexBody`."""
    pts = _as_points(points)
    if len(pts) == 0:
        raise ValueError("convex hull of an empty set")
    if dim is not None and pts.shape[1] != dim:
        raise DimensionMismatch(f"points are {pts.shape[1]}-d, expected {dim}-d")
    if pts.shape[1] > 3:
        raise DimensionMismatch("only dimensions 1..3 are supported")
    pts = canonical_points(pts, eps)
    idx = _hull_indices(pts, eps)
    verts = pts[idx]
    return ConvexBody(_canonical_vertices(verts, eps))


def _canonical_vertices(verts: np.ndarray, eps: float) -> np.ndarray:
    verts = canonical_points(verts, eps)
    d = verts.shape[1]
    if d == 2 and len(verts) >= 3:
        origin, basis, rank = _affine_frame(verts, eps)
        if rank == 2:
            return _monotone_chain(verts, eps)
    return verts


def extreme_points(body: ConvexBody) -> PointSet:
    return PointSet(body.vertices)


# ---------------------------------------------------------------------------
# distances


def _segment_distance(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from ``x`` (d,) to each segment ``a[i]b[i]``."""
    ab = b - a
    denom = (ab**2).sum(-1)
    t = np.where(denom > 0, ((x - a) * ab).sum(-1) / np.where(denom > 0, denom, 1), 0.0)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(x - proj, axis=-1)


def _triangle_distance(x: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """Distance from ``x`` (3,) to each triangle ``tri[i]`` (3 x 3)."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n, axis=1)
    ok = nn > 0
    n_unit = np.where(ok[:, None], n / np.where(ok, nn, 1)[:, None], 0)
    dist_plane = ((x - a) * n_unit).sum(-1)
    p = x - dist_plane[:, None] * n_unit
    # barycentric test of the projection
    inside = ok.copy()
    for u, v in ((a, b), (b, c), (c, a)):
        inside &= (np.cross(v - u, p - u) * n).sum(-1) >= 0
    edges = np.minimum(
        np.minimum(_segment_distance(x, a, b), _segment_distance(x, b, c)),
        _segment_distance(x, c, a),
    )
    return np.where(inside, np.abs(dist_plane), edges)


def distance(body: ConvexBody, x, eps: float = 1e-12) -> float:
    """Euclidean distance from ``x`` to ``body``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = body.vertices
    if x.size != body.dim:
        raise DimensionMismatch(f"point is {x.size}-d, body is {body.dim}-d")
    origin, basis, rank = _affine_frame(v, eps)
    rel = x - origin
    if rank == 0:
        return float(np.linalg.norm(rel))
    if rank == body.dim:
        local, normal, coords = rel, 0.0, v - origin
    else:
        local = rel @ basis.T
        normal = float(np.linalg.norm(rel - local @ basis))
        coords = (v - origin) @ basis.T
    if rank == 1:
        c = coords[:, 0]
        inplane = max(c.min() - local[0], local[0] - c.max(), 0.0)
    elif rank == 2:
        ring = _monotone_chain(coords, eps)
        e = np.roll(ring, -1, axis=0) - ring
        side = e[:, 0] * (local[1] - ring[:, 1]) - e[:, 1] * (local[0] - ring[:, 0])
        if np.all(side >= 0):
            inplane = 0.0
        else:
            inplane = float(_segment_distance(local, ring, np.roll(ring, -1, axis=0)).min())
    else:
        hull = ConvexHull(coords)
        if np.all(hull.equations[:, :-1] @ local + hull.equations[:, -1] <= 0):
            inplane = 0.0
        else:
            inplane = float(_triangle_distance(local, coords[hull.simplices]).min())
    return float(np.hypot(normal, inplane))


def contains(body: ConvexBody, x, tol: float = 0.0) -> bool:
    """True iff ``x`` is within distance ``tol`` of ``body``."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return distance(body, x) <= tol


def hausdorff(a: ConvexBody, b: ConvexBody, sample_density: int = 100) -> float:
    """Symmetric Hausdorff distance between two convex bodies.

    The distance to a convex set is a convex function, so its maximum over
    a polytope sits at a vertex and checking vertices is exact.
    ``sample_density`` is accepted for callers that pass it and is unused.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"bodies have dimensions {a.dim} and {b.dim}")
    if a.dim == 1:
        (a0, a1), (b0, b1) = a.vertices[[0, -1], 0], b.vertices[[0, -1], 0]
        return float(max(abs(a0 - b0), abs(a1 - b1)))
    da = max(distance(b, p) for p in a.vertices)
    db = max(distance(a, p) for p in b.vertices)
    return float(max(da, db))


# ---------------------------------------------------------------------------
# lower hull of lifted data


def _lower_chain(x: np.ndarray, f: np.ndarray, rel_eps: float) -> list[int]:
    """Indices of the lower convex hull of points (x, f) with x increasing."""
    xs, fs = x.tolist(), f.tolist()
    chain: list[int] = []
    for i in range(len(xs)):
        xi, fi = xs[i], fs[i]
        while len(chain) >= 2:
            o, a = chain[-2], chain[-1]
            ax, af = xs[a] - xs[o], fs[a] - fs[o]
            bx, bf = xi - xs[o], fi - fs[o]
            cross = ax * bf - af * bx
            # keep the middle point only if strictly below the chord
            if cross <= 0.0 or (rel_eps and cross <= rel_eps * math.hypot(ax, af) * math.hypot(bx, bf)):
                chain.pop()
            else:
                break
        chain.append(i)
    return chain


class LowerHull:
    """Lower convex hull of lifted points ``(points[j], values[j])``.

    The lower hull is the graph of the largest convex function below the
    data on the convex hull of ``points`` (``inf`` outside it). Supports
    one- and two-dimensional base points.
    """

    REL_EPS = 1e-12

    def __init__(self, points, values, eps: float = 1e-12):
        pts = _as_points(points)
        vals = np.asarray(values, dtype=float)
        if pts.shape[1] > 2:
            raise DimensionMismatch("lower hulls are supported for 1-d and 2-d base points only")
        if len(pts) == 0 or not np.all(np.isfinite(vals)):
            raise ValueError("lower hull needs at least one point with finite values")
        self.points = pts
        self.values = vals
        self.eps = eps
        self.dim = pts.shape[1]
        self._setup()

    # -- construction -----------------------------------------------------

    def _setup(self):
        pts, vals = self.points, self.values
        origin, basis, rank = _affine_frame(pts, self.eps)
        self._origin, self._basis = origin, basis
        if rank == 0:
            self.mode = "point"
            j = int(np.argmin(vals))
            self.vertex_ids = np.array([j])
            return
        if rank == 1:
            self.mode = "line"
            t = ((pts - origin) @ basis.T)[:, 0]
            self._setup_line(t, vals)
            return
        self.mode = "plane"
        self._setup_plane(pts, vals)

    def _setup_line(self, t: np.ndarray, vals: np.ndarray):
        order = np.lexsort((vals, t))
        ts, fs = t[order], vals[order]
        # keep the lowest value per abscissa
        keep = np.ones(len(ts), dtype=bool)
        keep[1:] = np.abs(np.diff(ts)) > self.eps
        ids, ts, fs = order[keep], ts[keep], fs[keep]
        chain = _lower_chain(ts, fs, self.REL_EPS)
        self.vertex_ids = ids[chain]
        self._t = ts[chain]
        self._f = fs[chain]

    def _setup_plane(self, pts: np.ndarray, vals: np.ndarray):
        design = np.column_stack([pts, np.ones(len(pts))])
        coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
        resid = np.abs(design @ coef - vals).max()
        scale = max(1.0, np.abs(vals).max())
        ring_ids = _hull_indices(pts, self.eps)
        self._ring = pts[ring_ids]
        self._ring = _monotone_chain(self._ring, self.eps)
        if resid <= 1e-12 * scale:
            self.mode = "affine"
            self._coef = coef
            self.vertex_ids = ring_ids
            self._tri = Delaunay(pts[ring_ids])
            self._tri_ids = ring_ids
            return
        lifted = np.column_stack([pts, vals])
        try:
            hull = ConvexHull(lifted)
        except QhullError:
            hull = ConvexHull(lifted, qhull_options="QJ")
        eq = hull.equations
        normal_norm = np.linalg.norm(eq[:, :3], axis=1)
        lower = eq[:, 2] < -1e-12 * normal_norm
        eq = eq[lower]
        simplices = hull.simplices[lower]
        # plane z = a.x + b
        self._slopes = -eq[:, :2] / eq[:, 2:3]
        self._offsets = -eq[:, 3] / eq[:, 2]
        self._simplices = simplices
        self.vertex_ids = np.unique(simplices)

    # -- queries ----------------------------------------------------------

    def _inside(self, q: np.ndarray, tol: float) -> np.ndarray:
        """Projected-hull membership for query rows ``q`` (n, d)."""
        if self.mode == "point":
            return np.abs(q - self.points[self.vertex_ids[0]]).max(axis=1) <= tol
        if self.mode == "line":
            rel = q - self._origin
            t = rel @ self._basis.T
            off = np.linalg.norm(rel - t @ self._basis, axis=1)
            t = t[:, 0]
            return (off <= tol) & (t >= self._t[0] - tol) & (t <= self._t[-1] + tol)
        ring = self._ring
        e = np.roll(ring, -1, axis=0) - ring
        lengths = np.linalg.norm(e, axis=1)
        d = (e[:, 0] * (q[:, None, 1] - ring[:, 1]) - e[:, 1] * (q[:, None, 0] - ring[:, 0])) / lengths
        return np.all(d >= -tol, axis=1)

    def evaluate(self, queries, chunk: int = 2048) -> np.ndarray:
        """Height of the lower hull above each query point (``inf`` outside)."""
        q = _as_points(queries)
        out = np.full(len(q), np.inf)
        inside = self._inside(q, self.eps)
        if not inside.any():
            return out
        qi = q[inside]
        if self.mode == "point":
            res = np.full(len(qi), self.values[self.vertex_ids[0]])
        elif self.mode == "line":
            t = ((qi - self._origin) @ self._basis.T)[:, 0]
            res = np.interp(t, self._t, self._f)
        elif self.mode == "affine":
            res = qi @ self._coef[:-1] + self._coef[-1]
        else:
            res = np.empty(len(qi))
            for s in range(0, len(qi), chunk):
                block = qi[s : s + chunk]
                res[s : s + chunk] = (block @ self._slopes.T + self._offsets).max(axis=1)
        out[inside] = res
        return out

    def decompose(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Indices and convex weights of hull vertices whose lifted
        combination lies on the lower hull above ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not self._inside(x[None, :], self.eps)[0]:
            raise OutsideHull(f"{x.tolist()} is outside the hull of the support")
        if self.mode == "point":
            return self.vertex_ids.copy(), np.array([1.0])
        if self.mode == "line":
            t = float(((x - self._origin) @ self._basis.T)[0])
            ts = self._t
            k = int(np.searchsorted(ts, t))
            for j in (k - 1, k):
                if 0 <= j < len(ts) and abs(ts[j] - t) <= self.eps:
                    return self.vertex_ids[[j]], np.array([1.0])
            k = min(max(k, 1), len(ts) - 1)
            w_right = (t - ts[k - 1]) / (ts[k] - ts[k - 1])
            w = np.array([1.0 - w_right, w_right])
            return self.vertex_ids[[k - 1, k]], w
        if self.mode == "affine":
            s = int(self._tri.find_simplex(x[None, :], tol=self.eps)[0])
            if s < 0:
                s = int(np.argmin(np.linalg.norm(self._tri.points[self._tri.simplices].mean(1) - x, axis=1)))
            ids = self._tri_ids[self._tri.simplices[s]]
            return ids, _barycentric(self.points[ids], x)
        # plane mode: the facet achieving the hull height at x
        heights = self._slopes @ x + self._offsets
        best = heights.max()
        cand = np.flatnonzero(heights >= best - 1e-12 * max(1.0, abs(best)))
        best_w, best_ids, best_neg = None, None, np.inf
        for c in cand:
            ids = self._simplices[c]
            w = _barycentric(self.points[ids], x)
            neg = -min(w.min(), 0.0)
            if neg < best_neg:
                best_w, best_ids, best_neg = w, ids, neg
                if neg == 0:
                    break
        return best_ids, best_w

    def subgradient(self, x) -> np.ndarray:
        """An element of the subdifferential of the lower hull at ``x``:
        the mean slope of all hull pieces active at ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.mode == "point":
            return np.zeros(self.dim)
        if self.mode == "line":
            t = float(((x - self._origin) @ self._basis.T)[0])
            ts, fs = self._t, self._f
            if len(ts) == 1:
                return np.zeros(self.dim)
            slopes = np.diff(fs) / np.diff(ts)
            k = int(np.searchsorted(ts, t))
            active = []
            if k > 0 and t >= ts[k - 1] - self.eps:
                active.append(slopes[min(k, len(slopes)) - 1])
            if k < len(ts) and abs(ts[k] - t) <= self.eps and k < len(slopes):
                active.append(slopes[k])
            if not active:
                active.append(slopes[min(max(k - 1, 0), len(slopes) - 1)])
            g = float(np.mean(active))
            # direction along the line, expressed in ambient coordinates
            return g * self._basis[0]
        if self.mode == "affine":
            return self._coef[:-1].copy()
        heights = self._slopes @ x + self._offsets
        best = heights.max()
        cand = heights >= best - 1e-9 * max(1.0, abs(best))
        return self._slopes[cand].mean(axis=0)


def _barycentric(tri: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of ``x`` in the simplex with rows ``tri``."""
    k = len(tri)
    a = np.vstack([tri.T, np.ones(k)])
    b = np.append(x, 1.0)
    w, *_ = np.linalg.lstsq(a, b, rcond=None)
    return w


def caratheodory(support, x, eps: float = 1e-12) -> DiscreteMeasure:
    """Probability measure on at most ``dim + 1`` support points with
    barycenter ``x``, read off the lower-hull facet of the lifted support.

    ``support`` is a sequence of ``(point, value)`` pairs with finite values.
    The measure realises the lower-hull height: its integral of the values
    equals the convex envelope of the data at ``x``.
    """
    pts = _as_points([np.atleast_1d(p) for p, _ in support])
    vals = np.array([v for _, v in support], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("support values must be finite")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    hull = LowerHull(pts, vals, eps)
    try:
        ids, w = hull.decompose(x)
    except OutsideHull:
        raise
    return _clean_measure(pts, ids, w, x, vals, eps)


def _clean_measure(pts, ids, w, x, vals, eps) -> DiscreteMeasure:
    w = np.where(w < 1e-14, 0.0, w)
    keep = w > 0
    ids, w = np.asarray(ids)[keep], w[keep]
    w = w / w.sum()
    if np.linalg.norm(w @ pts[ids] - x) > max(eps, 1e-12):
        # fall back to a basic solution of the envelope LP
        return _lp_measure(pts, vals, x, eps)
    return DiscreteMeasure(pts[ids], w)


def _lp_measure(pts, vals, x, eps) -> DiscreteMeasure:
    n = len(pts)
    a_eq = np.vstack([pts.T, np.ones(n)])
    b_eq = np.append(x, 1.0)
    res = linprog(vals, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if not res.success:
        raise OutsideHull(f"{x.tolist()} is not a convex combination of the support")
    w = np.where(res.x < 1e-14, 0.0, res.x)
    keep = w > 0
    w = w[keep] / w[keep].sum()
    return DiscreteMeasure(pts[keep], w)
