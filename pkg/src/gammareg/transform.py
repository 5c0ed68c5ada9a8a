"""Legendre-Fenchel conjugates and convex envelopes of sampled functions.

Two independent routes to the convex envelope are provided:

* :func:`envelope_hull` reads node values off the lower convex hull of the
  finite lifted samples. This is exact for grid data and is the reference.
* :func:`envelope_biconjugate` conjugates twice through a dual grid of
  slopes using the fast transform. It scales better and is checked against
  the hull route.

Nodes where ``h`` is ``inf`` are skipped in every supremum.
"""

from __future__ import annotations

import numpy as np

from .core import (
    AffineFunction,
    AllInfinite,
    Box,
    GammaRegError,
    Grid,
    SampledFunction,
    build_grid,
    interior_slices,
    lattice_directions,
    lattice_triples,
)
from .geometry import LowerHull, _lower_chain


class DimensionTooHigh(GammaRegError):
    pass


def _memo(h: SampledFunction, key: str, build):
    cache = h.__dict__.setdefault("_memo", {})
    if key not in cache:
        cache[key] = build()
    return cache[key]


# ---------------------------------------------------------------------------
# dual grids


def slope_bounds(h: SampledFunction) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis min and max finite-difference slopes between adjacent finite nodes."""
    grid = h.grid
    lat = grid.to_lattice(h.values)
    lo, hi = np.zeros(grid.dim), np.zeros(grid.dim)
    for k in range(grid.dim):
        with np.errstate(invalid="ignore"):
            d = np.diff(lat, axis=k) / grid.spacing[k]
        d = d[np.isfinite(d)]
        if d.size:
            lo[k], hi[k] = d.min(), d.max()
        else:
            # no adjacent finite pair on this axis; centre the box on the
            # range of the other axes' slopes
            lo[k] = hi[k] = 0.0
    return lo, hi


def default_dual_resolution(grid: Grid) -> tuple[int, ...]:
    factor = 4 if grid.dim == 1 else 2
    return tuple(max(factor * r, 16) for r in grid.resolution)


def dual_grid(h: SampledFunction, resolution=None) -> Grid:
    """Box grid of slopes covering every finite-difference slope of ``h``,
    padded by one dual spacing on each side."""
    res = default_dual_resolution(h.grid) if resolution is None else resolution
    res = np.atleast_1d(np.asarray(res, dtype=int))
    if res.size == 1:
        res = np.repeat(res, h.grid.dim)
    lo, hi = slope_bounds(h)
    lower, upper = np.empty_like(lo), np.empty_like(hi)
    for k in range(len(lo)):
        width = hi[k] - lo[k]
        if width <= 1e-12 * max(1.0, abs(lo[k]), abs(hi[k])):
            mid = 0.5 * (lo[k] + hi[k])
            lower[k], upper[k] = mid - 1.0, mid + 1.0
        else:
            step = width / max(int(res[k]) - 2, 1)
            lower[k], upper[k] = lo[k] - step, hi[k] + step
    return build_grid(Box(lower, upper), res)


# ---------------------------------------------------------------------------
# conjugation


def conjugate_naive(h: SampledFunction, dual: Grid, chunk: int = 256) -> SampledFunction:
    """Reference transform: ``max_j (p . x_j - h_j)`` for every dual node."""
    fin = h.finite
    if not fin.any():
        raise AllInfinite("function is identically +inf")
    x = h.grid.nodes[fin]
    v = h.values[fin]
    p = dual.nodes
    out = np.empty(len(p))
    for s in range(0, len(p), chunk):
        block = p[s : s + chunk]
        acc = block[:, 0:1] * x[None, :, 0]
        for k in range(1, x.shape[1]):
            acc = acc + block[:, k : k + 1] * x[None, :, k]
        out[s : s + chunk] = (acc - v[None, :]).max(axis=1)
    return SampledFunction(dual, out)


def conjugate_line(xs: np.ndarray, f: np.ndarray, ps: np.ndarray, return_index: bool = False):
    """``max_j (p xs_j - f_j)`` for every ``p`` in ``ps``.

    ``xs`` must be increasing. Entries of ``f`` equal to ``inf`` are skipped;
    a line with no finite entry returns ``-inf``. Runs a monotone sweep for
    the lower hull of the data, then assigns each slope its hull vertex.
    With ``return_index`` the maximising positions in ``xs`` come back too.
    """
    fin = np.isfinite(f)
    if not fin.any():
        best = np.full(len(ps), -np.inf)
        return (best, np.zeros(len(ps), dtype=np.intp)) if return_index else best
    pos = np.flatnonzero(fin)
    x, y = xs[fin], f[fin]
    chain = np.asarray(_lower_chain(x, y, 0.0), dtype=np.intp)
    hx, hy = x[chain], y[chain]
    if len(hx) == 1:
        best = ps * hx[0] - hy[0]
        k = np.zeros(len(ps), dtype=np.intp)
    else:
        edge = np.diff(hy) / np.diff(hx)
        k = np.searchsorted(edge, ps)
        best = ps * hx[k] - hy[k]
        # neighbours guard against rounding in the edge slopes
        for shift in (-1, 1):
            j = np.clip(k + shift, 0, len(hx) - 1)
            cand = ps * hx[j] - hy[j]
            better = cand > best
            best = np.where(better, cand, best)
            k = np.where(better, j, k)
    if return_index:
        return best, pos[chain[k]]
    return best


def _conjugate_axis(f: np.ndarray, axis: int, xs: np.ndarray, ps: np.ndarray):
    moved = np.moveaxis(f, axis, -1)
    lines = moved.reshape(-1, moved.shape[-1])
    out = np.empty((lines.shape[0], len(ps)))
    arg = np.empty((lines.shape[0], len(ps)), dtype=np.intp)
    for i, line in enumerate(lines):
        out[i], arg[i] = conjugate_line(xs, line, ps, return_index=True)
    shape = moved.shape[:-1] + (len(ps),)
    return (
        np.moveaxis(out.reshape(shape), -1, axis),
        np.moveaxis(arg.reshape(shape), -1, axis),
    )


def conjugate_lattice(values: np.ndarray, axes_in, axes_out, return_index: bool = False):
    """Conjugate of lattice data by iterated one-dimensional partial conjugation.

    ``sup_x (p.x - F(x))`` factorises as nested one-axis suprema, so each pass
    conjugates the negated output of the previous one along the next axis.
    With ``return_index`` the lattice index of a maximiser is returned as
    one integer array per axis.
    """
    f = np.asarray(values, dtype=float)
    g = f
    args = [None] * f.ndim
    for k in reversed(range(f.ndim)):
        g, args[k] = _conjugate_axis(f, k, axes_in[k], axes_out[k])
        f = -g
    if not return_index:
        return g
    # args[k] is indexed by (primal 0..k-1, dual k..n-1); unwind from axis 0
    dual_idx = np.indices(g.shape)
    chosen = []
    for k in range(f.ndim):
        chosen.append(args[k][tuple(chosen) + tuple(dual_idx[k:])])
    return g, chosen


def conjugate_fast(h: SampledFunction, dual: Grid) -> SampledFunction:
    """Fast transform on the bounding lattice of ``h``'s grid.

    Polytope grids are embedded in their bounding box with ``inf`` outside;
    vertices that are not lattice points are added by direct maximisation.
    The lattice passes locate a maximiser, and the value is recomputed there
    with the same summation order as :func:`conjugate_naive`, so both agree
    to rounding whenever they pick the same node.
    """
    if not isinstance(dual.domain, Box):
        raise ValueError("dual grids must be boxes")
    grid = h.grid
    if not h.finite.any():
        raise AllInfinite("function is identically +inf")
    lat = grid.to_lattice(h.values)
    _, chosen = conjugate_lattice(lat, grid.axes, dual.axes, return_index=True)
    p = dual.nodes
    acc = p[:, 0] * grid.axes[0][chosen[0].ravel()]
    for k in range(1, grid.dim):
        acc = acc + p[:, k] * grid.axes[k][chosen[k].ravel()]
    out = acc - lat[tuple(c.ravel() for c in chosen)]
    off = ~grid.on_lattice & h.finite
    if off.any():
        x, v = grid.nodes[off], h.values[off]
        out = np.maximum(out, (dual.nodes @ x.T - v).max(axis=1))
    return SampledFunction(dual, out)


def conjugate(h: SampledFunction, dual: Grid | None = None, method: str = "fast") -> SampledFunction:
    dual = dual_grid(h) if dual is None else dual
    if method == "naive":
        return conjugate_naive(h, dual)
    return conjugate_fast(h, dual)


# ---------------------------------------------------------------------------
# envelopes


def envelope_biconjugate(h: SampledFunction, dual: Grid | None = None) -> SampledFunction:
    """Convex envelope at the primal nodes as the biconjugate through ``dual``."""
    dual = dual_grid(h) if dual is None else dual
    hstar = conjugate_fast(h, dual)
    grid = h.grid
    lat = hstar.values.reshape(dual.lattice_shape)
    back = conjugate_lattice(lat, dual.axes, grid.axes)
    vals = grid.from_lattice(back)
    off = ~grid.on_lattice
    if off.any():
        x = grid.nodes[off]
        vals[off] = (x @ dual.nodes.T - hstar.values).max(axis=1)
    return SampledFunction(grid, vals)


def lower_hull(h: SampledFunction) -> LowerHull:
    """Lower convex hull of the finite lifted samples of ``h`` (memoised)."""
    if h.grid.dim > 2:
        raise DimensionTooHigh("the epigraph hull needs a 1-d or 2-d domain")

    def build():
        fin = h.finite
        return LowerHull(h.grid.nodes[fin], h.values[fin], h.grid.eps_geom)

    return _memo(h, "lower_hull", build)


def snap_tolerance(h: SampledFunction) -> float:
    fin = h.values[h.finite]
    return 1e-9 * max(1.0, float(np.abs(fin).max()))


def envelope_hull(h: SampledFunction) -> SampledFunction:
    """Convex envelope at the nodes from the lower hull of the lifted data.

    Nodes outside the convex hull of the finite nodes get ``inf``. Values
    within round-off of the data are set to the data, so the envelope of
    grid-convex data reproduces it exactly.
    """

    def build():
        hull = lower_hull(h)
        fin = h.finite
        ids = np.flatnonzero(fin)
        g = hull.evaluate(h.grid.nodes)
        g[ids[hull.vertex_ids]] = h.values[ids[hull.vertex_ids]]
        with np.errstate(invalid="ignore"):
            snap = fin & (h.values - g <= snap_tolerance(h))
        g[snap] = h.values[snap]
        g = np.minimum(g, h.values)
        return SampledFunction(h.grid, g)

    return _memo(h, "envelope_hull", build)


def envelope(h: SampledFunction, dual: Grid | None = None) -> SampledFunction:
    """Convex envelope at the nodes: the exact hull route in one and two
    dimensions, the biconjugate in three."""
    if h.grid.dim <= 2:
        return envelope_hull(h)
    return _memo(h, "envelope_bi", lambda: envelope_biconjugate(h, dual))


def envelope_tolerance(h: SampledFunction, dual: Grid | None = None) -> float:
    """Slack allowed between the envelope routes and between envelope and data.

    A Lipschitz-type term (finite value range over the domain diameter,
    times the largest primal spacing) plus the dual quantisation bound
    ``sum_k dp_k / 2 * width_k``, which caps how far the biconjugate can sit
    below the exact grid envelope.
    """
    dual = dual_grid(h) if dual is None else dual
    grid = h.grid
    fin = h.values[h.finite]
    lip = (fin.max() - fin.min()) / grid.domain.diameter
    lo, hi = grid.domain.bounds
    quant = 0.5 * float(np.sum(dual.spacing * (hi - lo)))
    return float(lip * grid.max_spacing + quant)


def lsc_hull(h: SampledFunction, mode: str = "two-sided") -> SampledFunction:
    """Lower semicontinuous hull surrogate on the grid.

    ``mode="two-sided"`` (default) lowers a node to ``max(h(x - d), h(x + d))``
    whenever that is smaller for some lattice direction ``d``: a value is
    replaced only when the function approaches something lower from both
    sides of a line through the node, which is how an isolated upward jump
    shows up on a grid. Continuous data is left unchanged away from strict
    local maxima.

    ``mode="ball"`` takes the plain minimum over the closed max-norm
    neighbourhood of radius 1.01 * max spacing (erosion by one cell).
    """
    if mode == "ball":
        table = h.grid.neighbor_table
        return SampledFunction(h.grid, h.values[table].min(axis=1))
    if mode != "two-sided":
        raise ValueError(f"unknown lsc mode {mode!r}")
    grid = h.grid
    lat = grid.to_lattice(h.values)
    out = lat.copy()
    for d in lattice_directions(grid.dim):
        if any(s != 0 and lat.shape[k] < 3 for k, s in enumerate(d)):
            continue
        a, b, c = lattice_triples(lat, d)
        idx = interior_slices(lat.shape, d)
        out[idx] = np.minimum(out[idx], np.maximum(a, c))
    vals = h.values.copy()
    on = grid.on_lattice
    vals[on] = np.minimum(vals[on], grid.from_lattice(out)[on])
    return SampledFunction(grid, vals)


def affine_minorant_at(h: SampledFunction, x) -> AffineFunction:
    """Affine minorant of ``h`` on the nodes that touches the envelope at ``x``.

    The slope is the mean slope of the lower-hull facets active at ``x``,
    which is itself a subgradient of the envelope there.
    """
    hull = lower_hull(h)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    slope = hull.subgradient(x)
    i = h.grid.node_index(x)
    gx = envelope_hull(h).values[i]
    return AffineFunction(slope, float(gx - slope @ x))
