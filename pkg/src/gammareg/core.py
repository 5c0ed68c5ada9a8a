"""Grids over compact convex domains and sampled extended-real functions.

Extended reals are plain floats: ``math.inf`` is the only admissible
infinity and arithmetic saturates there. ``-inf`` and NaN are rejected on
construction of every container.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

INF = math.inf

# relative geometric tolerance, scaled by the domain diameter
EPS_GEOM_REL = 1e-9


class GammaRegError(Exception):
    """Base class for every error raised by this package."""


class InvalidDomain(GammaRegError):
    pass


class ResolutionTooSmall(GammaRegError):
    pass


class AllInfinite(GammaRegError):
    pass


class DimensionMismatch(GammaRegError):
    pass


def ext_add(a: float, b: float) -> float:
    """Saturating addition on ``(-inf, inf]``."""
    if a == INF or b == INF:
        return INF
    return a + b


def check_ext_real(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if np.isnan(arr).any():
        raise ValueError("NaN is not an extended real")
    if np.isneginf(arr).any():
        raise ValueError("-inf is outside the codomain (-inf, inf]")
    return arr


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1 or not 1 <= lo.size <= 3:
            raise InvalidDomain("box bounds must be vectors of equal length 1..3")
        if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
            raise InvalidDomain("box bounds must be finite")
        if not np.all(lo < hi):
            raise InvalidDomain(f"box needs lower < upper on every axis, got {lo} / {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower, self.upper

    def extreme_points(self) -> np.ndarray:
        corners = itertools.product(*zip(self.lower, self.upper))
        return np.array(sorted(corners), dtype=float)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


@dataclass(frozen=True, eq=False)
class Polytope2D:
    """Convex polygon given by its vertices in counter-clockwise order."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InvalidDomain("polytope needs at least 3 two-dimensional vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidDomain("polytope vertices must be finite")
        eps = EPS_GEOM_REL * _diameter(v)
        for i in range(len(v)):
            for j in range(i + 1, len(v)):
                if np.linalg.norm(v[i] - v[j]) <= eps:
                    raise InvalidDomain(f"duplicate vertices {v[i]} and {v[j]}")
        n = len(v)
        for i in range(n):
            a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            if cross <= eps * np.linalg.norm(c - b):
                raise InvalidDomain(
                    "polytope vertices must be in strictly convex counter-clockwise order"
                )
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return 2

    @property
    def diameter(self) -> float:
        return _diameter(self.vertices)

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def extreme_points(self) -> np.ndarray:
        return self.vertices.copy()

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(self.contains_many(np.atleast_2d(x), tol)[0])

    def contains_many(self, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(e, axis=1)
        # signed distance to each edge line, positive inside
        d = (e[:, 0] * (pts[:, None, 1] - v[:, 1]) - e[:, 1] * (pts[:, None, 0] - v[:, 0])) / lengths
        return np.all(d >= -tol, axis=1)


Domain = Box | Polytope2D


def _diameter(points: np.ndarray) -> float:
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True, eq=False)
class Grid:
    """Nodes of a domain, built by :func:`build_grid`.

    ``axes`` are the coordinates of the bounding-box lattice and
    ``lattice_index`` maps each node to its lattice multi-index (``-1`` for
    polytope vertices that are not lattice points).
    """

    domain: Domain
    resolution: tuple[int, ...]
    nodes: np.ndarray
    spacing: np.ndarray
    axes: tuple[np.ndarray, ...]
    lattice_index: np.ndarray
    extreme_indices: np.ndarray

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def eps_geom(self) -> float:
        return EPS_GEOM_REL * self.domain.diameter

    @property
    def max_spacing(self) -> float:
        return float(self.spacing.max())

    @property
    def is_box(self) -> bool:
        return isinstance(self.domain, Box)

    @property
    def lattice_shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    @cached_property
    def on_lattice(self) -> np.ndarray:
        return np.all(self.lattice_index >= 0, axis=1)

    @cached_property
    def flat_lattice_index(self) -> np.ndarray:
        """Row-major lattice position of each on-lattice node (``-1`` otherwise)."""
        out = np.full(self.size, -1, dtype=np.int64)
        on = self.on_lattice
        out[on] = np.ravel_multi_index(tuple(self.lattice_index[on].T), self.lattice_shape)
        return out

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """Indices of nodes within max-norm distance 1.01 * max spacing.

        Rows are padded with the node's own index so that ``values[table]``
        can be reduced along axis 1.
        """
        radius = 1.01 * self.max_spacing
        tree = cKDTree(self.nodes)
        lists = tree.query_ball_point(self.nodes, r=radius, p=np.inf)
        width = max(len(row) for row in lists)
        table = np.empty((self.size, width), dtype=np.int64)
        for i, row in enumerate(lists):
            table[i, : len(row)] = row
            table[i, len(row):] = i
        return table

    def node_index(self, x, tol: float | None = None) -> int:
        """Index of the node at ``x`` (within ``tol``, default eps_geom)."""
        tol = self.eps_geom if tol is None else tol
        d = np.abs(self.nodes - np.asarray(x, dtype=float)).max(axis=1)
        i = int(np.argmin(d))
        if d[i] > tol:
            raise KeyError(f"no grid node at {x}")
        return i

    def to_lattice(self, values: np.ndarray, fill: float = INF) -> np.ndarray:
        """Scatter on-lattice node values into the bounding lattice array."""
        arr = np.full(int(np.prod(self.lattice_shape)), fill, dtype=float)
        on = self.on_lattice
        arr[self.flat_lattice_index[on]] = values[on]
        return arr.reshape(self.lattice_shape)

    def from_lattice(self, arr: np.ndarray) -> np.ndarray:
        out = np.full(self.size, np.nan)
        on = self.on_lattice
        out[on] = arr.ravel()[self.flat_lattice_index[on]]
        return out


def lattice_directions(dim: int) -> list[np.ndarray]:
    """Primitive lattice directions with entries in {-1, 0, 1}, one per line
    (axes and diagonals)."""
    out = []
    for d in itertools.product((-1, 0, 1), repeat=dim):
        d = np.array(d)
        nz = d[d != 0]
        if nz.size and nz[0] > 0:
            out.append(d)
    return out


def lattice_triples(arr: np.ndarray, d) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Aligned views ``(prev, mid, next)`` of ``arr`` along lattice direction ``d``.

    ``mid`` covers the nodes that have both neighbours on the line.
    """
    prev, mid, nxt = [], [], []
    for k, s in enumerate(d):
        n = arr.shape[k]
        if s == 0:
            prev.append(slice(None))
            mid.append(slice(None))
            nxt.append(slice(None))
            continue
        a, b, c = slice(0, n - 2), slice(1, n - 1), slice(2, n)
        if s < 0:
            a, c = c, a
        prev.append(a)
        mid.append(b)
        nxt.append(c)
    return arr[tuple(prev)], arr[tuple(mid)], arr[tuple(nxt)]


def interior_slices(shape, d) -> tuple:
    """Index of the ``mid`` block returned by :func:`lattice_triples`."""
    return tuple(slice(None) if s == 0 else slice(1, n - 1) for n, s in zip(shape, d))


def _lattice_axis(lo: float, hi: float, n: int) -> np.ndarray:
    # lo + width * (i / n) hits dyadic fractions of the interval exactly
    axis = lo + (hi - lo) * (np.arange(n + 1) / n)
    axis[-1] = hi
    return axis


def build_grid(domain: Domain, resolution: int | Sequence[int]) -> Grid:
    """Uniform lattice over ``domain`` with every extreme point as a node.

    ``resolution`` is the number of intervals per axis (a scalar applies to
    every axis). Polytope grids keep the bounding-box lattice points inside
    the polygon and add the polygon vertices; nodes are sorted
    lexicographically.
    """
    dim = domain.dim
    res = np.atleast_1d(np.asarray(resolution, dtype=int))
    if res.size == 1:
        res = np.repeat(res, dim)
    if res.size != dim:
        raise DimensionMismatch(f"resolution has {res.size} entries for a {dim}-d domain")
    if np.any(res < 2):
        raise ResolutionTooSmall(f"resolution must be >= 2 on every axis, got {res.tolist()}")
    lo, hi = domain.bounds
    axes = tuple(_lattice_axis(lo[k], hi[k], int(res[k])) for k in range(dim))
    spacing = (hi - lo) / res
    mesh = np.meshgrid(*axes, indexing="ij")
    lattice_pts = np.stack([m.ravel() for m in mesh], axis=1)
    lattice_idx = np.stack(
        [m.ravel() for m in np.meshgrid(*[np.arange(len(a)) for a in axes], indexing="ij")], axis=1
    )
    eps = EPS_GEOM_REL * domain.diameter

    if isinstance(domain, Box):
        nodes, index = lattice_pts, lattice_idx
    else:
        inside = domain.contains_many(lattice_pts, eps)
        nodes, index = lattice_pts[inside], lattice_idx[inside]
        extra, extra_idx = [], []
        for v in domain.vertices:
            if len(nodes) and np.abs(nodes - v).max(axis=1).min() <= eps:
                continue
            extra.append(v)
            extra_idx.append([-1] * dim)
        if extra:
            nodes = np.vstack([nodes, extra])
            index = np.vstack([index, np.array(extra_idx, dtype=index.dtype)])
        order = np.lexsort(nodes.T[::-1])
        nodes, index = nodes[order], index[order]

    ext = domain.extreme_points()
    ext_idx = []
    for v in ext:
        d = np.abs(nodes - v).max(axis=1)
        ext_idx.append(int(np.argmin(d)))
    return Grid(
        domain=domain,
        resolution=tuple(int(r) for r in res),
        nodes=np.ascontiguousarray(nodes, dtype=float),
        spacing=spacing,
        axes=axes,
        lattice_index=index.astype(np.int64),
        extreme_indices=np.array(sorted(set(ext_idx)), dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# sampled functions and friends


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: Grid
    values: np.ndarray
    lower_bound: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        vals = check_ext_real(self.values).copy()
        if vals.shape != (self.grid.size,):
            raise DimensionMismatch(f"expected {self.grid.size} values, got shape {vals.shape}")
        finite = np.isfinite(vals)
        if not finite.any():
            raise AllInfinite("function is identically +inf")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        lb = float(vals[finite].min()) if self.lower_bound is None else float(self.lower_bound)
        if vals[finite].min() < lb:
            raise ValueError(f"values fall below the lower bound {lb}")
        object.__setattr__(self, "lower_bound", lb)

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.values)

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, np.asarray(values, dtype=float))


def sample(grid: Grid, f: Callable[[np.ndarray], float]) -> SampledFunction:
    """Evaluate ``f`` at every node; raises :class:`AllInfinite` if h = inf."""
    vals = np.array([float(f(x)) for x in grid.nodes], dtype=float)
    return SampledFunction(grid, vals)


def infimum(h: SampledFunction) -> float:
    return float(h.values.min())


def lipschitz_estimate(h: SampledFunction) -> float:
    """Euclidean norm of the per-axis maximal finite-difference slopes.

    Only pairs of adjacent finite lattice nodes contribute.
    """
    grid = h.grid
    lat = grid.to_lattice(h.values)
    per_axis = []
    for k in range(grid.dim):
        with np.errstate(invalid="ignore"):
            d = np.diff(lat, axis=k)
        d = d[np.isfinite(d)]
        per_axis.append(np.abs(d).max() / grid.spacing[k] if d.size else 0.0)
    return float(np.linalg.norm(per_axis))


@dataclass(frozen=True, eq=False)
class AffineFunction:
    """``x -> slope . x + intercept``; a linear functional has intercept 0."""

    slope: np.ndarray
    intercept: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "slope", np.atleast_1d(np.asarray(self.slope, dtype=float)))
        object.__setattr__(self, "intercept", float(self.intercept))

    def __call__(self, x):
        """Value at one point (float) or at each row of an ``(n, d)`` array."""
        x = np.asarray(x, dtype=float)
        d = self.slope.size
        if x.ndim == 2:
            return x @ self.slope + self.intercept
        if x.size == d:
            return float(x.ravel() @ self.slope + self.intercept)
        return x.reshape(-1, d) @ self.slope + self.intercept

    def __neg__(self) -> "AffineFunction":
        return AffineFunction(-self.slope, -self.intercept)

    def __repr__(self):
        return f"AffineFunction(slope={self.slope.tolist()}, intercept={self.intercept!r})"


def linear(slope) -> AffineFunction:
    return AffineFunction(slope, 0.0)


def canonical_points(points, eps: float = 0.0) -> np.ndarray:
    """Lexicographically sorted points with near-duplicates (max-norm <= eps) removed."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) == 0:
        return pts.reshape(0, pts.shape[1] if pts.ndim == 2 else 1)
    pts = pts[np.lexsort(pts.T[::-1])]
    kept: list[np.ndarray] = []
    for p in pts:
        # sorted by the first coordinate, so only the tail can collide
        dup = False
        for q in reversed(kept):
            if p[0] - q[0] > eps:
                break
            if np.abs(p - q).max() <= eps:
                dup = True
                break
        if not dup:
            kept.append(p)
    return np.array(kept)


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray
    eps: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "points", canonical_points(self.points, self.eps))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def tolist(self) -> list:
        return self.points.tolist()


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float)
        if len(pts) != len(w) or len(w) == 0:
            raise ValueError("support points and weights must be non-empty and aligned")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        if len(canonical_points(pts)) != len(pts):
            raise ValueError("support points must be pairwise distinct")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def barycenter(self) -> np.ndarray:
        return self.weights @ self.points

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    @property
    def support(self) -> list[tuple[np.ndarray, float]]:
        return list(zip(self.points, self.weights))
