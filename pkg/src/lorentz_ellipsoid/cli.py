"""Command-line front end.

Exit codes: 0 success, 1 numerical failure or failed verification, 2 usage
error.  Traces and orbits are written as CSV (17 significant digits), scalar
results as JSON.  Relative --out paths are resolved against
$LORENTZ_ELLIPSOID_OUTDIR when it is set.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import acceptance
from .confocal import Line3, confocal_through_point, tangent_quadrics_of_line
from .geodesic_flow import (
    IntegrationError,
    IntegratorOptions,
    integrate,
    integrate_with_reflections,
    make_state,
)
from .null_poncelet import PonceletMap, ShiftSpreadError, closure_search, rotation_estimate
from .oval_billiard import DirectionPair, Oval, orbit, rotation_number_of_orbit
from .surface import (
    EllipsoidShape,
    classify,
    degeneracy,
    gauss_curvature,
    null_directions,
    project_to_surface,
    quadric_residual,
    random_surface_points,
    tangent_frame,
)

OUTDIR_ENV = "LORENTZ_ELLIPSOID_OUTDIR"
POINT_TOL = 1e-6


class UsageError(ValueError):
    pass


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} numbers, got {text!r}")
    return vals


def parse_shape(text: str) -> EllipsoidShape:
    try:
        return EllipsoidShape(*_floats(text, 3))
    except ValueError as exc:
        raise UsageError(f"bad --shape {text!r}: {exc}") from None


def parse_start(shape: EllipsoidShape, text: str) -> np.ndarray:
    """``equator:t``, ``cap:north:t`` / ``cap:south:t`` or ``point:x,y,z``.

    A cap start sits at longitude t, halfway in latitude between the tropic
    and the pole.
    """
    kind, _, rest = text.partition(":")
    if kind == "equator":
        return shape.equator_point(_floats(rest, 1)[0])
    if kind == "cap":
        side, _, t = rest.partition(":")
        if side not in ("north", "south"):
            raise UsageError("cap start must be cap:north:t or cap:south:t")
        phi = _floats(t, 1)[0]
        theta = 0.5 * (shape.tropic_latitude(phi) + math.pi / 2)
        return shape.embed(theta if side == "north" else -theta, phi)
    if kind == "point":
        p = np.array(_floats(rest, 3))
        if abs(quadric_residual(shape, p)) > POINT_TOL:
            raise UsageError(f"point {rest} is not on the ellipsoid")
        return project_to_surface(shape, p)
    raise UsageError(f"unknown start point {text!r}")


def parse_direction(shape: EllipsoidShape, p: np.ndarray, text: str) -> np.ndarray:
    """``null:right|left``, ``angle:alpha`` (from east toward north) or ``vector:u,v,w``."""
    kind, _, rest = text.partition(":")
    if kind == "null":
        if degeneracy(shape, p) < 0:
            raise UsageError("null directions exist only in the belt")
        right, left = null_directions(shape, p)
        if rest not in ("right", "left"):
            raise UsageError("null direction must be null:right or null:left")
        return right if rest == "right" else left
    if kind == "angle":
        alpha = _floats(rest, 1)[0]
        h, m = tangent_frame(shape, p)
        return math.cos(alpha) * h / np.linalg.norm(h) + math.sin(alpha) * m / np.linalg.norm(m)
    if kind == "vector":
        return np.array(_floats(rest, 3))
    raise UsageError(f"unknown direction {text!r}")


def _resolve(path: str | None) -> Path | None:
    if path is None or path == "-":
        return None
    out = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


@contextmanager
def _open_out(path: str | None):
    target = _resolve(path)
    if target is None:
        yield sys.stdout
    else:
        with open(target, "w", newline="") as fh:
            yield fh


def _emit_json(obj, path: str | None = None) -> None:
    with _open_out(path) as fh:
        fh.write(json.dumps(obj, sort_keys=True) + "\n")


def _fmt(x) -> str:
    return f"{float(x):.17g}"


# -- subcommands ---------------------------------------------------------


def cmd_trace(args) -> int:
    shape = parse_shape(args.shape)
    p = parse_start(shape, args.start)
    v = parse_direction(shape, p, args.dir)
    state = make_state(shape, p, v)
    opts = IntegratorOptions(rtol=args.rtol, atol=args.atol)
    run = integrate_with_reflections if args.reflect else integrate
    trace = run(shape, state, args.tmax, opts)
    with _open_out(args.out) as fh:
        trace.to_csv(fh)
    summary = {"samples": len(trace), "t_end": float(trace.times[-1]), "class": state.klass.name,
               "events": [[float(t), k.value] for t, k in trace.events]}
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 0


def cmd_poncelet_map(args) -> int:
    shape = parse_shape(args.shape)
    tmap = PonceletMap(shape, method=args.method)
    with _open_out(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "T(t)", "s(t)", "s(T(t))", "delta"])
        for t in np.linspace(0.0, 2.0 * math.pi, args.samples, endpoint=False):
            smp = tmap.sample(t)
            writer.writerow([_fmt(smp.t), _fmt(smp.t1 % (2 * math.pi)), _fmt(smp.s), _fmt(smp.s1), _fmt(smp.delta)])
    return 0


def cmd_poncelet_rotation(args) -> int:
    shape = parse_shape(args.shape)
    est = rotation_estimate(shape, args.samples)
    if args.verbose:
        _emit_json({"delta": est.delta, "spread": est.spread, "samples": est.samples})
    else:
        _emit_json(est.delta)
    return 0


def parse_family(text: str):
    """``a=4,b=2,c=0.01:10``: exactly one of a, b, c given as lo:hi."""
    fixed, free = {}, None
    for part in text.split(","):
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in ("a", "b", "c") or not val:
            raise UsageError(f"bad family component {part!r}")
        if ":" in val:
            if free is not None:
                raise UsageError("family must have exactly one free parameter")
            lo, hi = _floats(val.replace(":", ","), 2)
            free = (key, lo, hi)
        else:
            fixed[key] = _floats(val, 1)[0]
    if free is None or len(fixed) != 2:
        raise UsageError("family needs two fixed values and one range, e.g. a=4,b=2,c=0.01:10")
    key, lo, hi = free

    def family(x: float) -> EllipsoidShape:
        return EllipsoidShape(**{**fixed, key: x})

    return family, lo, hi


def cmd_poncelet_search(args) -> int:
    family, lo, hi = parse_family(args.family)
    res = closure_search(family, lo, hi, args.k, args.r)
    out = {"found": res.found, "message": res.message}
    if res.shape is not None:
        out.update(shape=[res.shape.a, res.shape.b, res.shape.c], parameter=res.parameter,
                   shift=res.shift, max_return_error=res.max_return_error)
    _emit_json(out, args.out)
    return 0 if res.found else 1


def cmd_confocal_point(args) -> int:
    shape = parse_shape(args.shape)
    q = np.array(_floats(args.point, 3))
    params = confocal_through_point(shape, q)
    _emit_json([{"lambda": r.lam + 0.0, "kind": r.kind.name} for r in params])
    return 0


def cmd_confocal_line(args) -> int:
    shape = parse_shape(args.shape)
    p = np.array(_floats(args.point, 3))
    d = np.array(_floats(args.dir, 3))
    params = tangent_quadrics_of_line(shape, Line3(p, d))
    _emit_json([{"lambda": r.lam + 0.0, "kind": r.kind.name} for r in params])
    return 0


def cmd_curvature(args) -> int:
    shape = parse_shape(args.shape)
    if args.point:
        pts = [project_to_surface(shape, parse_start(shape, args.point))]
    else:
        pts = random_surface_points(shape, np.random.default_rng(args.seed), args.samples, region="offtropic")
    rows = [{"point": [float(x) for x in p], "region": classify(shape, p).name, "K": gauss_curvature(shape, p)}
            for p in pts]
    _emit_json(rows[0] if args.point else rows, args.out)
    return 0


def parse_oval(tokens: list[str]) -> Oval:
    text = " ".join(tokens)
    kind, _, rest = text.replace(" ", ":", 1).partition(":") if " " in text else text.partition(":")
    if kind == "ellipse":
        return Oval.ellipse(*_floats(rest, 2))
    if kind == "perturbed":
        a, c, eps = _floats(rest, 3)
        return Oval.perturbed_ellipse(a, c, eps)
    path = Path(text)
    if path.suffix == ".csv" and path.exists():
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        if data.shape[1] != 2:
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return Oval.from_samples(data)
    raise UsageError(f"unknown oval {text!r}; use 'ellipse a,c', 'perturbed a,c,eps' or a CSV file")


def cmd_billiard(args) -> int:
    oval = parse_oval(args.oval)
    if args.dirs == "null":
        dirs = DirectionPair.null()
    else:
        th1, th2 = _floats(args.dirs, 2)
        dirs = DirectionPair.from_angles(th1, th2)
    pts = orbit(oval, dirs, args.t0, args.iters)
    rho = rotation_number_of_orbit(pts)
    with _open_out(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "t", "x", "z"])
        xy = oval.point(pts)
        for i, (t, (x, z)) in enumerate(zip(pts, xy)):
            writer.writerow([i, _fmt(t % (2 * math.pi)), _fmt(x), _fmt(z)])
    print(json.dumps({"rotation_number": rho, "iterates": args.iters}), file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    shape = parse_shape(args.shape) if args.shape else None
    numbers = sorted({int(n) for n in args.only.split(",")}) if args.only else None
    if numbers and any(n not in acceptance.CHECKS for n in numbers):
        raise UsageError(f"--only accepts criteria 1..{len(acceptance.CHECKS)}")
    results = acceptance.run_all(numbers, report=print, shape=shape)
    if args.json:
        _emit_json([r.as_dict() for r in results], args.json)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {failed}" if failed else ""))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lorentz-ellipsoid", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("trace", help="integrate one geodesic and write a CSV trace")
    tr.add_argument("--shape", required=True, help="a,b,c")
    tr.add_argument("--start", required=True, help="equator:t | cap:north:t | cap:south:t | point:x,y,z")
    tr.add_argument("--dir", required=True, help="null:right | null:left | angle:alpha | vector:u,v,w")
    tr.add_argument("--tmax", type=float, default=5.0)
    tr.add_argument("--reflect", action="store_true", help="continue past tropic hits by reflection")
    tr.add_argument("--rtol", type=float, default=IntegratorOptions.rtol)
    tr.add_argument("--atol", type=float, default=IntegratorOptions.atol)
    tr.add_argument("--out", help="CSV path (default stdout)")
    tr.set_defaults(func=cmd_trace)

    po = sub.add_parser("poncelet", help="the null closure map T")
    psub = po.add_subparsers(dest="action", required=True)
    pm = psub.add_parser("map", help="tabulate T on equally spaced equator points")
    pm.add_argument("--shape", required=True)
    pm.add_argument("--samples", type=int, default=100)
    pm.add_argument("--method", choices=["cusp", "events"], default="cusp")
    pm.add_argument("--out")
    pm.set_defaults(func=cmd_poncelet_map)
    pr = psub.add_parser("rotation", help="shift constant Delta of T")
    pr.add_argument("--shape", required=True)
    pr.add_argument("--samples", type=int, default=16)
    pr.add_argument("--verbose", action="store_true")
    pr.set_defaults(func=cmd_poncelet_rotation)
    ps = psub.add_parser("search", help="find a shape with Delta = r/k on a one-parameter family")
    ps.add_argument("--family", required=True, help="e.g. a=4,b=2,c=0.01:10")
    ps.add_argument("--k", type=int, required=True)
    ps.add_argument("--r", type=int, required=True)
    ps.add_argument("--out")
    ps.set_defaults(func=cmd_poncelet_search)

    co = sub.add_parser("confocal", help="pseudo-confocal quadrics")
    csub = co.add_subparsers(dest="action", required=True)
    cp = csub.add_parser("through-point")
    cp.add_argument("--shape", required=True)
    cp.add_argument("--point", required=True, help="x,y,z")
    cp.set_defaults(func=cmd_confocal_point)
    cl = csub.add_parser("tangent-line")
    cl.add_argument("--shape", required=True)
    cl.add_argument("--point", required=True, help="x,y,z")
    cl.add_argument("--dir", required=True, help="u,v,w")
    cl.set_defaults(func=cmd_confocal_line)

    cu = sub.add_parser("curvature", help="Gauss curvature at a point or random points")
    cu.add_argument("--shape", required=True)
    cu.add_argument("--point", help="start point, e.g. equator:0.3")
    cu.add_argument("--samples", type=int, default=10)
    cu.add_argument("--seed", type=int, default=0)
    cu.add_argument("--out")
    cu.set_defaults(func=cmd_curvature)

    bi = sub.add_parser("billiard", help="orbit of the circle map T_(u,v) on an oval")
    bi.add_argument("--oval", nargs="+", required=True, help="'ellipse a,c', 'perturbed a,c,eps' or file.csv")
    bi.add_argument("--dirs", default="null", help="theta1,theta2 in radians, or 'null'")
    bi.add_argument("--iters", type=int, default=1000)
    bi.add_argument("--t0", type=float, default=0.0)
    bi.add_argument("--out")
    bi.set_defaults(func=cmd_billiard)

    ve = sub.add_parser("verify", help="run the acceptance suite")
    ve.add_argument("--shape", help="override the default shape 4,2,1 where a check is shape-generic")
    ve.add_argument("--only", help="comma-separated criterion numbers")
    ve.add_argument("--json", help="also write results as JSON")
    ve.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        st = exc.last_state
        where = f" at t={exc.time:.17g}, pos={st.pos.tolist()}, vel={st.vel.tolist()}" if st is not None else ""
        print(f"integration failed: {exc}{where}", file=sys.stderr)
        return 1
    except (ShiftSpreadError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


run = main
