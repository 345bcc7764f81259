"""Command-line front end.

Exit status: 0 on success, 1 when a verification check fails, 2 on usage or
validation errors (a JSON error record is written to stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .geometry import (
    GeometryError,
    Line,
    Polygon,
    area,
    centroid,
    diameter,
    min_interior_angle,
    steiner_symmetrize,
)
from .schedules import (
    RectParams,
    quad_to_rectangle,
    rect_to_square_schedule,
    rectangle_frame,
    triangle_schedule,
)
from .stochastic import (
    DEFAULT_SEED,
    InsufficientSamplesError,
    SimParams,
    check_alpha,
    estimate_eigenvalue,
    estimate_exit_curve,
)
from .verify import CSV_HEADER, default_suite


class UsageError(ValueError):
    pass


# -- canonical serialisation -------------------------------------------------


def format_float(x: float) -> str:
    if math.isfinite(x):
        return format(x, ".17g")
    return json.dumps(repr(x))


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and floats written to 17 significant digits."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(_plain(v), (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- input -------------------------------------------------------------------


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc})") from exc
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc


def load_polygon(path: str) -> Polygon:
    """Polygon from ``{"vertices": [[x, y], ...]}`` or a bare vertex list."""
    data = _read_json(path)
    if isinstance(data, dict):
        data = data.get("vertices")
    try:
        pts = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: vertices must be a list of [x, y] pairs") from exc
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise UsageError(f"{path}: vertices must be a list of [x, y] pairs")
    return Polygon(pts)


def polygon_record(P: Polygon) -> dict[str, Any]:
    return {"vertices": P.vertices.tolist()}


def load_line(path: str) -> Line:
    """Line from ``{"anchor": [x, y], "direction": [dx, dy]}`` or ``{"through": [p, q]}``."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise UsageError(f"{path}: line must be a JSON object")
    try:
        if "through" in data:
            p, q = data["through"]
            return Line.through(p, q)
        return Line(tuple(data["anchor"]), tuple(data["direction"]))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"{path}: line needs anchor and direction, or through") from exc


def line_record(line: Line) -> dict[str, Any]:
    return {"anchor": line.anchor.tolist(), "direction": line.direction.tolist()}


def _sim_params(args, t: float) -> SimParams:
    return SimParams(t=t, m=args.m, n=args.n, seed=args.seed, bridge_correction=args.bridge)


def _horizons(args) -> list[float]:
    if args.t_list:
        values = [float(v) for v in args.t_list.split(",") if v.strip()]
        if not values:
            raise UsageError("--t-list is empty")
        return values
    return [args.t]


def _start(args, P: Polygon) -> tuple[float, float]:
    return tuple(args.x0) if args.x0 is not None else tuple(centroid(P))


def _wants_csv(args) -> bool:
    return args.format == "csv" or (args.format is None and bool(args.out) and args.out.endswith(".csv"))


# -- commands ----------------------------------------------------------------


def cmd_symmetrize(args) -> int:
    P = load_polygon(args.polygon)
    line = load_line(args.line)
    S = steiner_symmetrize(P, line)
    record = {
        "command": "symmetrize",
        "params": {"polygon": polygon_record(P), "line": line_record(line)},
        "vertices": S.vertices.tolist(),
        "area": area(S),
        "diameter": diameter(S),
        "input_area": area(P),
        "input_diameter": diameter(P),
    }
    _emit(dumps(record), args.out)
    print(f"area {area(P):.12g} -> {area(S):.12g}; diameter {diameter(P):.12g} -> {diameter(S):.12g}", file=sys.stderr)
    return 0


def _schedule_states(args):
    x0 = tuple(args.x0) if args.x0 is not None else None
    if args.kind == "rect":
        if args.rect is not None:
            r = RectParams(*args.rect)
        elif args.polygon:
            r, _ = rectangle_frame(load_polygon(args.polygon))
        else:
            raise UsageError("rect schedule needs --rect A B or --polygon")
        return {"rect": {"a": r.a, "b": r.b}}, rect_to_square_schedule(r, args.steps)
    if not args.polygon:
        raise UsageError(f"{args.kind} schedule needs --polygon")
    P = load_polygon(args.polygon)
    x0 = x0 if x0 is not None else tuple(centroid(P))
    params = {"polygon": polygon_record(P), "x0": list(x0)}
    if args.kind == "triangle":
        return params, triangle_schedule(P, x0, args.steps)
    return params, quad_to_rectangle(P, x0)


def cmd_schedule(args) -> int:
    params, states = _schedule_states(args)
    params.update({"kind": args.kind, "steps": args.steps})
    if _wants_csv(args):
        rows = []
        for s in states:
            rows.append(
                [
                    s.step,
                    s.info.get("kind", args.kind),
                    float(s.tracked[0]),
                    float(s.tracked[1]),
                    area(s.polygon),
                    diameter(s.polygon),
                    min_interior_angle(s.polygon),
                    float(s.info["c"]) if "c" in s.info else "",
                ]
            )
        header = ["step", "kind", "tracked_x", "tracked_y", "area", "diameter", "min_angle", "c"]
        _emit(csv_text(header, rows), args.out)
    else:
        _emit(dumps({"command": "schedule", "params": params, "states": [s.to_dict() for s in states]}), args.out)
    return 0


def cmd_exitprob(args) -> int:
    P = load_polygon(args.polygon)
    alpha = check_alpha(args.alpha)
    horizons = _horizons(args)
    x0 = _start(args, P)
    params = _sim_params(args, args.t if not args.t_list else max(horizons))
    curve = estimate_exit_curve(P, x0, alpha, params, horizons, args.workers)
    if _wants_csv(args):
        rows = [[e.t, e.p_hat, e.std_err, e.n, e.m, e.alpha, e.seed, e.bridge, float(x0[0]), float(x0[1])] for e in curve]
        header = ["t", "p_hat", "std_err", "n", "m", "alpha", "seed", "bridge", "x0", "y0"]
        _emit(csv_text(header, rows), args.out)
    else:
        record = {
            "command": "exitprob",
            "params": {
                "polygon": polygon_record(P),
                "x0": list(x0),
                "alpha": alpha,
                "t": params.t,
                "t_list": horizons,
                "m": params.m,
                "n": params.n,
                "seed": params.seed,
                "bridge": params.bridge_correction,
            },
            "estimates": [e.to_dict() for e in curve],
        }
        _emit(dumps(record), args.out)
    return 0


def cmd_eigen(args) -> int:
    P = load_polygon(args.polygon)
    a = area(P)
    t1 = 0.3 * a if args.t1 is None else args.t1
    t2 = 0.5 * a if args.t2 is None else args.t2
    x0 = _start(args, P)
    params = _sim_params(args, t2)
    est = estimate_eigenvalue(P, x0, 2.0, params, t1, t2, args.workers)
    record = {
        "command": "eigen",
        "params": {
            "polygon": polygon_record(P),
            "x0": list(x0),
            "alpha": 2.0,
            "t1": t1,
            "t2": t2,
            "m": params.m,
            "n": params.n,
            "seed": params.seed,
            "bridge": params.bridge_correction,
        },
        "estimate": est.to_dict(),
    }
    _emit(dumps(record), args.out)
    return 0


def cmd_verify(args) -> int:
    reports = default_suite(seed=args.seed, workers=args.workers)
    if _wants_csv(args):
        _emit(csv_text(CSV_HEADER, [r.csv_row() for r in reports]), args.out)
    else:
        record = {"command": "verify", "params": {"seed": args.seed}, "reports": [r.to_dict() for r in reports]}
        _emit(dumps(record), args.out)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} statistic={r.statistic:.4g} threshold={r.threshold:g}", file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


# -- parser ------------------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steiner-exit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_out(p):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=["json", "csv"], help="output format (default: json, or csv for a .csv --out)")

    def common_sim(p, m_default):
        p.add_argument("--m", type=_positive_int, default=m_default, help="skeleton steps over [0, t], t the largest horizon")
        p.add_argument("--n", type=_positive_int, default=100_000, help="number of paths")
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
        p.add_argument("--bridge", action="store_true", help="Brownian bridge correction (alpha = 2 only)")
        p.add_argument("--workers", type=_positive_int, default=None, help="threads for path chunks")

    p = sub.add_parser("symmetrize", help="Steiner symmetrize a polygon about a line")
    p.add_argument("--polygon", required=True)
    p.add_argument("--line", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_symmetrize)

    p = sub.add_parser("schedule", help="run a symmetrization schedule")
    p.add_argument("--kind", choices=["triangle", "quad", "rect"], required=True)
    p.add_argument("--polygon")
    p.add_argument("--rect", type=float, nargs=2, metavar=("A", "B"), help="half-width and half-height")
    p.add_argument("--steps", type=int, default=30, help="triangle steps or rectangle stages")
    p.add_argument("--x0", type=float, nargs=2)
    common_out(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("exitprob", help="estimate survival probabilities")
    p.add_argument("--polygon", required=True)
    p.add_argument("--x0", type=float, nargs=2, help="start (default: centroid)")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--t", type=float, default=0.3)
    p.add_argument("--t-list", help="comma-separated ascending horizons")
    common_sim(p, 64)
    common_out(p)
    p.set_defaults(func=cmd_exitprob)

    p = sub.add_parser("eigen", help="estimate the principal Dirichlet eigenvalue (alpha = 2)")
    p.add_argument("--polygon", required=True)
    p.add_argument("--x0", type=float, nargs=2)
    p.add_argument("--t1", type=float)
    p.add_argument("--t2", type=float)
    common_sim(p, 64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("verify", help="run the default verification suite")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--workers", type=_positive_int, default=None)
    common_out(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GeometryError, InsufficientSamplesError, ValueError) as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
