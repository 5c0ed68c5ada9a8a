"""Command line front end.

Usage::

    gammareg <command> --spec <path> [--out <dir>] [--tol <real>]
             [--threads <N>] [--dual-res <N>] [--suite theorems|transform|all]

Problem files are flat ``key = value`` text, one key per line, ``#`` starts
a comment. Keys:

==================  ==========================================================
``name``            label copied into reports
``domain``          ``box`` or ``polytope``
``lower``/``upper`` box corners, comma separated
``vertices``        polytope vertices ``x y; x y; ...`` (counter-clockwise)
``resolution``      cells per axis, one integer or one per axis
``expression``      function in the expression language
``samples``         CSV with header ``x[,y[,z]],value`` (path relative to the
                    problem file); exactly one of expression/samples
``tilt``            slope vector for ``subdiff``
``dual_resolution`` dual grid cells per axis
``tol``             minimizer tolerance
``family``          convex body ``x y; x y; ...`` for ``exhaust``; repeatable
``radii``           decreasing radius schedule for limiting gradients
``point``           node for ``measure``
``h_minus``         convex summand for ``bauer`` (expression)
``h_plus``          convex summand for ``bauer`` (expression)
==================  ==========================================================

Exit status: 0 on success, 1 on bad input, 2 when a verification fails.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .bauer import ConvexityHypothesisFails, check_bauer, check_convexity
from .core import (
    Box,
    GammaRegError,
    Grid,
    Polytope2D,
    SampledFunction,
    build_grid,
    infimum,
    sample,
)
from .funclang import Function
from .geometry import convex_hull, hausdorff
from .minimize import (
    check_theorem1,
    check_theorem3_extreme,
    default_tolerance,
    envelope_minimizers,
    generalized_minimizers,
    nested_exhaustion,
    representing_measure,
)
from .subdiff import (
    DensityHypothesisFails,
    check_corollary_LR,
    check_fenchel_young,
    subdifferential,
)
from .transform import (
    conjugate_fast,
    conjugate_naive,
    dual_grid,
    envelope,
    envelope_biconjugate,
    envelope_tolerance,
    lsc_hull,
)

COMMANDS = ("conjugate", "envelope", "lsc-hull", "minimizers", "subdiff", "exhaust", "bauer", "measure", "verify")
KEYS = {
    "name", "domain", "lower", "upper", "vertices", "resolution", "expression", "samples",
    "tilt", "dual_resolution", "tol", "family", "radii", "point", "h_minus", "h_plus",
}
REPEATABLE = {"family"}
COORDS = ("x", "y", "z")
DUAL_COORDS = ("p", "q", "r")


class SpecError(Exception):
    """Bad problem file; the message names the offending key."""


# ---------------------------------------------------------------------------
# problem files


@dataclass
class ProblemSpec:
    path: Path
    sha256: str
    raw: dict
    name: str
    grid: Grid
    h: SampledFunction
    tilt: np.ndarray | None = None
    dual_resolution: list | None = None
    tol: float | None = None
    family: list = field(default_factory=list)
    radii: list | None = None
    point: np.ndarray | None = None
    h_minus: str | None = None
    h_plus: str | None = None


def _floats(key: str, text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise SpecError(f"{key}: expected numbers, got {text!r}") from None


def _points(key: str, text: str) -> np.ndarray:
    rows = [_floats(key, part) for part in text.split(";") if part.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise SpecError(f"{key}: expected points 'x y; x y; ...', got {text!r}")
    return np.array(rows)


def parse_spec_text(text: str) -> dict:
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise SpecError(f"{key}: unknown key (line {lineno})")
        if key in REPEATABLE:
            raw.setdefault(key, []).append(value)
        elif key in raw:
            raise SpecError(f"{key}: given twice (line {lineno})")
        else:
            raw[key] = value
    return raw


def _domain(raw: dict):
    kind = raw.get("domain", "box")
    try:
        if kind == "box":
            for k in ("lower", "upper"):
                if k not in raw:
                    raise SpecError(f"{k}: required for a box domain")
            return Box(np.array(_floats("lower", raw["lower"])), np.array(_floats("upper", raw["upper"])))
        if kind == "polytope":
            if "vertices" not in raw:
                raise SpecError("vertices: required for a polytope domain")
            return Polytope2D(_points("vertices", raw["vertices"]))
    except GammaRegError as e:
        raise SpecError(f"domain: {e}") from None
    raise SpecError(f"domain: expected 'box' or 'polytope', got {kind!r}")


def _read_samples(path: Path, grid: Grid) -> np.ndarray:
    values = np.full(grid.size, np.nan)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [c.strip() for c in next(reader, [])]
        want = list(COORDS[: grid.dim]) + ["value"]
        if header != want:
            raise SpecError(f"samples: header must be {','.join(want)}, got {','.join(header)}")
        for n, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                nums = [float(c) for c in row]
            except ValueError:
                raise SpecError(f"samples: row {n} is not numeric") from None
            if len(nums) != grid.dim + 1:
                raise SpecError(f"samples: row {n} has {len(nums)} fields")
            try:
                i = grid.node_index(nums[:-1])
            except KeyError:
                raise SpecError(f"samples: row {n} does not match a grid node") from None
            values[i] = nums[-1]
    if np.isnan(values).any():
        missing = grid.nodes[np.isnan(values)][0]
        raise SpecError(f"samples: no value for node {missing.tolist()}")
    return values


def load_spec(path) -> ProblemSpec:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise SpecError(f"spec: cannot read {path}: {e.strerror}") from None
    raw = parse_spec_text(data.decode("utf-8"))
    domain = _domain(raw)
    if "resolution" not in raw:
        raise SpecError("resolution: required")
    res = [int(v) for v in _floats("resolution", raw["resolution"])]
    try:
        grid = build_grid(domain, res if len(res) > 1 else res[0])
    except (GammaRegError, ValueError) as e:
        raise SpecError(f"resolution: {e}") from None
    has_e, has_s = "expression" in raw, "samples" in raw
    if has_e == has_s:
        raise SpecError("expression: exactly one of expression/samples is required")
    try:
        if has_e:
            h = sample(grid, Function(raw["expression"]))
        else:
            spath = path.parent / raw["samples"]
            if not spath.exists():
                raise SpecError(f"samples: file {spath} does not exist")
            h = SampledFunction(grid, _read_samples(spath, grid))
    except GammaRegError as e:
        raise SpecError(f"{'expression' if has_e else 'samples'}: {e}") from None
    spec = ProblemSpec(
        path=path,
        sha256=hashlib.sha256(data).hexdigest(),
        raw=raw,
        name=raw.get("name", path.stem),
        grid=grid,
        h=h,
    )
    if "tilt" in raw:
        spec.tilt = np.array(_floats("tilt", raw["tilt"]))
        if spec.tilt.size != grid.dim:
            raise SpecError(f"tilt: expected {grid.dim} entries")
    if "dual_resolution" in raw:
        spec.dual_resolution = [int(v) for v in _floats("dual_resolution", raw["dual_resolution"])]
    if "tol" in raw:
        spec.tol = _floats("tol", raw["tol"])[0]
    for body in raw.get("family", []):
        pts = _points("family", body)
        if pts.shape[1] != grid.dim:
            raise SpecError(f"family: points must be {grid.dim}-d")
        spec.family.append(convex_hull(pts, eps=grid.eps_geom))
    if "radii" in raw:
        spec.radii = _floats("radii", raw["radii"])
    if "point" in raw:
        spec.point = np.array(_floats("point", raw["point"]))
        if spec.point.size != grid.dim:
            raise SpecError(f"point: expected {grid.dim} entries")
    spec.h_minus = raw.get("h_minus")
    spec.h_plus = raw.get("h_plus")
    return spec


def bundled_specs() -> list[Path]:
    root = resources.files("gammareg") / "corpus"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".spec"))


def resolve_spec(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    for b in bundled_specs():
        if b.stem == name:
            return b
    raise SpecError(f"spec: {name} is neither a file nor a bundled problem")


# ---------------------------------------------------------------------------
# output


def fmt(v) -> str:
    """Shortest round-trip decimal; ``inf`` as a bare token."""
    v = float(v)
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    if v == 0.0:
        return "0.0"
    return repr(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    path.write_bytes(buf.getvalue().encode("utf-8"))


def _jsonable(o):
    if isinstance(o, dict):
        return {k: _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, (np.integer, int)):
        return int(o)
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return fmt(v) if math.isinf(v) else v
    return o


def write_json(path: Path, report: dict) -> None:
    text = json.dumps(_jsonable(report), indent=2) + "\n"
    path.write_bytes(text.encode("utf-8"))


class Context:
    def __init__(self, spec: ProblemSpec, args):
        self.spec = spec
        self.h = spec.h
        self.out = Path(args.out)
        self.threads = args.threads
        self.tol = args.tol if args.tol is not None else spec.tol
        res = args.dual_res if args.dual_res is not None else spec.dual_resolution
        self.dual = dual_grid(self.h, res)

    @property
    def min_tol(self) -> float:
        return default_tolerance(self.h) if self.tol is None else self.tol

    def base_report(self, command: str) -> dict:
        g = self.h.grid
        return {
            "schema": 1,
            "tool": "gammareg",
            "version": __version__,
            "command": command,
            "name": self.spec.name,
            "spec_sha256": self.spec.sha256,
            "threads": self.threads,
            "grid": {
                "dim": g.dim,
                "resolution": list(g.resolution),
                "nodes": g.size,
                "spacing": g.spacing.tolist(),
            },
            "dual_grid": {
                "resolution": list(self.dual.resolution),
                "lower": self.dual.domain.lower.tolist(),
                "upper": self.dual.domain.upper.tolist(),
                "spacing": self.dual.spacing.tolist(),
            },
            "tolerances": {
                "delta_env": envelope_tolerance(self.h, self.dual),
                "eps_geom": g.eps_geom,
                "minimizer_tol": self.min_tol,
            },
        }

    def node_header(self, *extra) -> list[str]:
        return list(COORDS[: self.h.grid.dim]) + list(extra)


# ---------------------------------------------------------------------------
# commands


def _require(spec: ProblemSpec, key: str):
    value = getattr(spec, key)
    if value is None or (isinstance(value, list) and not value):
        raise SpecError(f"{key}: required by this command")
    return value


def cmd_conjugate(ctx: Context) -> int:
    hs = conjugate_fast(ctx.h, ctx.dual)
    cols = list(DUAL_COORDS[: ctx.dual.dim]) + ["hstar"]
    write_csv(ctx.out / "conjugate.csv", cols, np.column_stack([ctx.dual.nodes, hs.values]))
    rep = ctx.base_report("conjugate")
    rep["outputs"] = ["conjugate.csv"]
    write_json(ctx.out / "conjugate.json", rep)
    return 0


def cmd_envelope(ctx: Context) -> int:
    g = envelope(ctx.h, ctx.dual)
    rows = np.column_stack([ctx.h.grid.nodes, ctx.h.values, g.values])
    write_csv(ctx.out / "envelope.csv", ctx.node_header("h", "gamma_h"), rows)
    rep = ctx.base_report("envelope")
    rep["method"] = "lower_hull" if ctx.h.grid.dim <= 2 else "biconjugate"
    rep["inf_h"] = infimum(ctx.h)
    rep["inf_gamma_h"] = infimum(g)
    rep["outputs"] = ["envelope.csv"]
    write_json(ctx.out / "envelope.json", rep)
    return 0


def cmd_lsc_hull(ctx: Context) -> int:
    h0 = lsc_hull(ctx.h)
    rows = np.column_stack([ctx.h.grid.nodes, ctx.h.values, h0.values])
    write_csv(ctx.out / "lsc_hull.csv", ctx.node_header("h", "h0"), rows)
    rep = ctx.base_report("lsc-hull")
    rep["inf_h"] = infimum(ctx.h)
    rep["inf_h0"] = infimum(h0)
    rep["outputs"] = ["lsc_hull.csv"]
    write_json(ctx.out / "lsc_hull.json", rep)
    return 0


def cmd_minimizers(ctx: Context) -> int:
    omega = generalized_minimizers(ctx.h, ctx.min_tol)
    m = envelope_minimizers(ctx.h, ctx.min_tol)
    write_csv(ctx.out / "omega.csv", ctx.node_header(), omega.points)
    write_csv(ctx.out / "m_vertices.csv", ctx.node_header(), m.vertices)
    rep = ctx.base_report("minimizers")
    rep["omega_size"] = len(omega)
    rep["m_vertices"] = m.vertices
    rep["outputs"] = ["omega.csv", "m_vertices.csv"]
    write_json(ctx.out / "minimizers.json", rep)
    return 0


def cmd_subdiff(ctx: Context) -> int:
    p = _require(ctx.spec, "tilt")
    body = subdifferential(ctx.h, p, ctx.min_tol)
    fy = check_fenchel_young(ctx.h, p, ctx.min_tol, ctx.dual)
    write_csv(ctx.out / "subdiff.csv", ctx.node_header(), body.vertices)
    rep = ctx.base_report("subdiff")
    rep["slope"] = p
    rep["vertices"] = body.vertices
    rep["conjugate_value"] = fy.conjugate
    rep["fenchel_young_max_gap"] = fy.max_gap
    rep["outputs"] = ["subdiff.csv"]
    write_json(ctx.out / "subdiff.json", rep)
    return 0


def cmd_exhaust(ctx: Context) -> int:
    family = _require(ctx.spec, "family")
    res = nested_exhaustion(ctx.h, family, ctx.min_tol)
    write_csv(ctx.out / "exhaust.csv", ctx.node_header(), res.points.points)
    rep = ctx.base_report("exhaust")
    rep["members"] = [
        {
            "vertices": mb.body.vertices,
            "inf_restricted": mb.inf_restricted,
            "inf_gap": mb.inf_gap,
            "included": mb.included,
            "extreme_points": mb.extreme_points,
            "max_distance_to_omega": mb.max_distance_to_omega,
        }
        for mb in res.members
    ]
    rep["certified"] = res.certified
    rep["outputs"] = ["exhaust.csv"]
    write_json(ctx.out / "exhaust.json", rep)
    return 0 if res.certified else 2


def _bauer_pair(spec: ProblemSpec):
    hm = sample(spec.grid, Function(_require(spec, "h_minus")))
    hp = sample(spec.grid, Function(_require(spec, "h_plus")))
    return hm, hp


def cmd_bauer(ctx: Context) -> int:
    hm, hp = _bauer_pair(ctx.spec)
    r = check_bauer(hm, hp)
    rep = ctx.base_report("bauer")
    rep.update(
        sup_K=r.sup_K,
        sup_extreme=r.sup_extreme,
        gap=r.gap,
        lipschitz=r.lipschitz,
        bound=r.bound,
        argmax=r.argmax,
        passed=r.passed,
        note="on a grid the lsc/usc hypotheses reduce to grid convexity of both summands",
    )
    write_json(ctx.out / "bauer.json", rep)
    return 0 if r.passed else 2


def cmd_measure(ctx: Context) -> int:
    x = _require(ctx.spec, "point")
    try:
        i = ctx.h.grid.node_index(x)
    except KeyError:
        raise SpecError(f"point: {x.tolist()} is not a grid node") from None
    mu = representing_measure(ctx.h, ctx.h.grid.nodes[i])
    vals = np.array([ctx.h.values[ctx.h.grid.node_index(p)] for p in mu.points])
    write_csv(
        ctx.out / "measure.csv",
        ctx.node_header("weight", "h"),
        np.column_stack([mu.points, mu.weights, vals]),
    )
    rep = ctx.base_report("measure")
    rep["point"] = ctx.h.grid.nodes[i]
    rep["barycenter"] = mu.barycenter()
    rep["integral"] = float(mu.weights @ vals)
    rep["gamma_h"] = envelope(ctx.h, ctx.dual).values[i]
    rep["outputs"] = ["measure.csv"]
    write_json(ctx.out / "measure.json", rep)
    return 0


# ---------------------------------------------------------------------------
# verification suites


def _check(name: str, measured: float, tolerance: float, passed: bool | None = None, **extra) -> dict:
    ok = bool(measured <= tolerance) if passed is None else bool(passed)
    return {"name": name, "measured": measured, "tolerance": tolerance, "passed": ok, **extra}


def suite_theorems(ctx: Context, seed: int = 0) -> list[dict]:
    h, dual, tol = ctx.h, ctx.dual, ctx.min_tol
    rng = np.random.default_rng(seed)
    checks = []
    t1 = check_theorem1(h, tol, dual)
    checks.append(_check("inf_gap", t1.inf_gap, t1.delta_env))
    checks.append(_check("inf_gap_biconjugate", t1.inf_gap_biconjugate, t1.delta_env))
    checks.append(_check("set_gap", t1.set_gap, t1.set_tolerance))
    t3 = check_theorem3_extreme(h, tol)
    worst = max((d for _, d in t3.violations), default=0.0)
    checks.append(
        _check("extreme_in_omega", worst, t3.tolerance, passed=t3.passed,
               violations=len(t3.violations), strict=t3.strict)
    )
    h0 = lsc_hull(h)
    checks.append(_check("lsc_inf_equal", abs(infimum(h) - infimum(h0)), 0.0))
    argmin_h0 = h0.values <= infimum(h) + tol
    omega = generalized_minimizers(h, tol)
    same = len(omega) == int(argmin_h0.sum())
    checks.append(_check("omega_is_argmin_h0", 0.0 if same else 1.0, 0.0))

    conv = check_convexity(h)
    g = envelope(h, dual)
    fin = h.finite
    if conv.is_grid_convex and h.grid.dim <= 2:
        diff = float(np.abs(g.values[fin] - h.values[fin]).max())
        checks.append(_check("envelope_fixed_point", diff, 0.0))
    elif not conv.is_grid_convex:
        below = int(np.sum(g.values[fin] < h.values[fin]))
        checks.append(_check("envelope_strictly_below", 0.0, 0.0, passed=below >= 1, nodes_below=below))

    delta = t1.delta_env
    fy_worst, fy_tol = 0.0, delta + tol
    picks = rng.choice(dual.size, size=min(20, dual.size), replace=False)
    for k in np.sort(picks):
        r = check_fenchel_young(h, dual.nodes[k], tol, dual)
        fy_worst = max(fy_worst, r.max_gap)
        fy_tol = r.tolerance
    checks.append(_check("fenchel_young", fy_worst, fy_tol))

    nodes = np.flatnonzero(fin)
    picks = np.sort(rng.choice(nodes, size=min(50, nodes.size), replace=False))
    bary, mass, integ = 0.0, 0.0, 0.0
    for i in picks:
        mu = representing_measure(h, h.grid.nodes[i])
        bary = max(bary, float(np.linalg.norm(mu.barycenter() - h.grid.nodes[i])))
        mass = max(mass, abs(float(mu.weights.sum()) - 1.0))
        vals = np.array([h.values[h.grid.node_index(p)] for p in mu.points])
        integ = max(integ, abs(float(mu.weights @ vals) - g.values[i]))
    checks.append(_check("measure_barycenter", bary, h.grid.eps_geom))
    checks.append(_check("measure_mass", mass, 1e-12))
    checks.append(_check("measure_integral", integ, delta))

    if ctx.spec.family:
        ex = nested_exhaustion(h, ctx.spec.family, tol)
        far = max((mb.max_distance_to_omega for mb in ex.members if mb.included), default=0.0)
        checks.append(
            _check("exhaustion_within_omega", far, ex.tolerance, passed=ex.certified,
                   recovered=ex.points.points)
        )
    if ctx.spec.radii is not None and ctx.spec.tilt is not None:
        try:
            lr = check_corollary_LR(h, ctx.spec.tilt, ctx.spec.radii, dual, tol)
            checks.append(_check("subdiff_in_hull_of_limits", lr.excess, lr.tolerance, passed=lr.included))
        except DensityHypothesisFails as e:
            checks.append(_check("subdiff_in_hull_of_limits", math.inf, 0.0, passed=False, error=str(e)))
    if ctx.spec.h_minus and ctx.spec.h_plus:
        hm, hp = _bauer_pair(ctx.spec)
        try:
            b = check_bauer(hm, hp)
            checks.append(_check("bauer_gap", b.gap, b.bound, passed=b.passed))
        except ConvexityHypothesisFails as e:
            checks.append(_check("bauer_gap", math.inf, 0.0, passed=False, error=str(e)))
    return checks


def ulp_tolerance(h: SampledFunction, dual: Grid) -> np.ndarray:
    """Four units in the last place of the largest term in each supremum."""
    fin = h.finite
    xs, vs = h.grid.nodes[fin], h.values[fin]
    px = np.abs(dual.nodes @ np.abs(xs).max(axis=0))
    scale = px + np.abs(vs).max()
    return 4 * np.spacing(scale)


def suite_transform(ctx: Context) -> list[dict]:
    h, dual = ctx.h, ctx.dual
    checks = []
    fast = conjugate_fast(h, dual).values
    naive = conjugate_naive(h, dual).values
    ulp = ulp_tolerance(h, dual)
    excess = float(np.max(np.abs(fast - naive) - ulp))
    checks.append(_check("fast_vs_naive", float(np.abs(fast - naive).max()), float(ulp.min()),
                         passed=excess <= 0))
    lat = naive.reshape(dual.lattice_shape)
    worst = 0.0
    for k in range(dual.dim):
        d2 = np.diff(lat, 2, axis=k)
        if d2.size:
            worst = min(worst, float(d2.min()))
    checks.append(_check("conjugate_convex", -worst, 1e-9))
    delta = envelope_tolerance(h, dual)
    bi = envelope_biconjugate(h, dual).values
    g = envelope(h, dual).values
    fin = np.isfinite(g)
    checks.append(_check("biconjugate_vs_hull", float(np.abs(bi[fin] - g[fin]).max()), delta))
    h0 = lsc_hull(h).values
    left = float(np.max(g - h0, initial=-math.inf, where=np.isfinite(h0)))
    right = float(np.max(h0 - h.values, initial=-math.inf, where=np.isfinite(h.values)))
    checks.append(_check("lsc_sandwich", max(left, 0.0), delta, passed=left <= delta and right <= 0.0))
    return checks


def cmd_verify(ctx: Context, suite: str) -> int:
    checks = []
    if suite in ("theorems", "all"):
        checks += suite_theorems(ctx)
    if suite in ("transform", "all"):
        checks += suite_transform(ctx)
    rep = ctx.base_report("verify")
    rep["suite"] = suite
    rep["checks"] = checks
    rep["passed"] = all(c["passed"] for c in checks)
    write_json(ctx.out / "verify.json", rep)
    return 0 if rep["passed"] else 2


HANDLERS = {
    "conjugate": cmd_conjugate,
    "envelope": cmd_envelope,
    "lsc-hull": cmd_lsc_hull,
    "minimizers": cmd_minimizers,
    "subdiff": cmd_subdiff,
    "exhaust": cmd_exhaust,
    "bauer": cmd_bauer,
    "measure": cmd_measure,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gammareg", description="Convex envelopes and generalized minimizers on grids.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--spec", required=True, help="problem file, or the name of a bundled problem")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--tol", type=float, default=None, help="minimizer tolerance")
    ap.add_argument("--threads", type=int, default=1, help="accepted for compatibility; work is serial")
    ap.add_argument("--dual-res", type=int, default=None, help="dual grid cells per axis")
    ap.add_argument("--suite", choices=("theorems", "transform", "all"), default="all")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.tol is not None and not args.tol >= 0:
            raise SpecError("tol: must be >= 0")
        if args.threads < 1:
            raise SpecError("threads: must be >= 1")
        spec = load_spec(resolve_spec(args.spec))
        Path(args.out).mkdir(parents=True, exist_ok=True)
        ctx = Context(spec, args)
        if args.command == "verify":
            return cmd_verify(ctx, args.suite)
        return HANDLERS[args.command](ctx)
    except SpecError as e:
        print(f"gammareg: error: {e}", file=sys.stderr)
        return 1
    except GammaRegError as e:
        print(f"gammareg: error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
