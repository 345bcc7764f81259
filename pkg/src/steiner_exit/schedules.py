"""Symmetrization schedules that drive triangles and quadrilaterals to regular shapes.

* triangles: cycle through the perpendicular bisectors of the sides;
* quadrilaterals: at most three symmetrizations reach a rectangle;
* rectangles: alternate rhombus and rectangle stages until a square.

Each schedule returns a list of :class:`ScheduleState`, starting with the
input, and tracks the orthogonal projection of a starting point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .geometry import (
    Line,
    Point2,
    Polygon,
    Transform,
    UnsupportedInputError,
    area,
    centroid,
    hausdorff_distance,
    interior_angles,
    project_point,
    side_lengths,
    steiner_symmetrize,
    vertex_sets_close,
)

QUAD_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class ScheduleState:
    step: int
    polygon: Polygon
    tracked: Point2
    last_line: Line | None = None
    info: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        line = None
        if self.last_line is not None:
            line = {
                "anchor": self.last_line.anchor.tolist(),
                "direction": self.last_line.direction.tolist(),
            }
        return {
            "step": self.step,
            "vertices": self.polygon.vertices.tolist(),
            "tracked": [self.tracked.x, self.tracked.y],
            "line": line,
            "info": dict(self.info),
        }


@dataclass(frozen=True)
class RectParams:
    """Half-width ``a`` and half-height ``b`` of an origin-centred rectangle."""

    a: float
    b: float

    def __post_init__(self):
        for name in ("a", "b"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")
            object.__setattr__(self, name, v)

    def vertices(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, b], [-a, b], [-a, -b], [a, -b]])


def _point(p) -> Point2:
    x, y = np.asarray(p, dtype=float).reshape(2)
    return Point2(float(x), float(y))


def _rotate(points: np.ndarray, angle: float) -> np.ndarray:
    return Transform(angle).apply(points)


# -- triangles ---------------------------------------------------------------


def _require_triangle(P: Polygon) -> None:
    if len(P) != 3:
        raise UnsupportedInputError(f"expected a triangle, got {len(P)} vertices")


def triangle_step(state: ScheduleState, side_index: int) -> ScheduleState:
    """Symmetrize about the mediator of side ``side_index`` (vertices i, i+1).

    The output keeps the input's vertex labelling: the two endpoints of the
    chosen side stay put and the opposite vertex moves onto the mediator.
    """
    T = state.polygon
    _require_triangle(T)
    if side_index not in (0, 1, 2):
        raise ValueError(f"side_index must be 0, 1 or 2, got {side_index}")
    v = T.vertices
    i, j, k = side_index, (side_index + 1) % 3, (side_index + 2) % 3
    line = Line.mediator(v[i], v[j])
    sym = steiner_symmetrize(T, line)
    _require_triangle(sym)

    out = sym.vertices
    labelled = np.empty((3, 2))
    free = [0, 1, 2]
    for label in (i, j):
        pick = min(free, key=lambda r: float(np.hypot(*(out[r] - v[label]))))
        labelled[label] = out[pick]
        free.remove(pick)
    labelled[k] = out[free[0]]

    return ScheduleState(
        step=state.step + 1,
        polygon=Polygon(labelled),
        tracked=project_point(state.tracked, line),
        last_line=line,
        info={"side": side_index},
    )


def triangle_schedule(T: Polygon, x0, n_steps: int) -> list[ScheduleState]:
    """Mediator cycling over sides 0, 1, 2, 0, ... for ``n_steps`` steps."""
    _require_triangle(T)
    states = [ScheduleState(0, T, _point(x0))]
    for m in range(n_steps):
        states.append(triangle_step(states[-1], m % 3))
    return states


def equilateral_projection_schedule(x0, n_steps: int) -> list[Point2]:
    """Track a point through symmetrizations of the origin-centred equilateral
    triangle about the lines joining 0 to its vertices, in cyclic order.

    The triangle itself is invariant, so only the point moves. Entry ``m`` is
    the point after ``m + 1`` projections; entry 0 is the projection of ``x0``
    onto the first vertex line. Consecutive lines meet at 60 degrees, so each
    further projection halves the norm.
    """
    dirs = [(math.cos(2 * math.pi * k / 3), math.sin(2 * math.pi * k / 3)) for k in range(3)]
    lines = [Line((0.0, 0.0), d) for d in dirs]
    p = project_point(x0, lines[0])
    out = [p]
    for m in range(1, n_steps + 1):
        p = project_point(p, lines[m % 3])
        out.append(p)
    return out


# -- quadrilaterals ----------------------------------------------------------


def _close(x: float, y: float, rtol: float = QUAD_RTOL) -> bool:
    return abs(x - y) <= rtol * max(abs(x), abs(y))


def _parallel(u: np.ndarray, w: np.ndarray, rtol: float = QUAD_RTOL) -> bool:
    cross = u[0] * w[1] - u[1] * w[0]
    return abs(cross) <= rtol * float(np.hypot(*u) * np.hypot(*w))


def classify_quadrilateral(Q: Polygon) -> str:
    """One of ``"rectangle"``, ``"parallelogram"``, ``"kite"``, ``"general"``."""
    if len(Q) != 4:
        raise UnsupportedInputError(f"expected a quadrilateral, got {len(Q)} vertices")
    _, e = Q.edges
    if _parallel(e[0], e[2]) and _parallel(e[1], e[3]):
        if np.all(np.abs(interior_angles(Q) - math.pi / 2) <= QUAD_RTOL * math.pi):
            return "rectangle"
        return "parallelogram"
    s = side_lengths(Q)
    if (_close(s[0], s[1]) and _close(s[2], s[3])) or (_close(s[1], s[2]) and _close(s[3], s[0])):
        return "kite"
    return "general"


def _quad_line(Q: Polygon, kind: str) -> Line:
    v = Q.vertices
    if kind == "general":
        diagonals = [(0, 2), (1, 3)]
        lengths = [float(np.hypot(*(v[a] - v[b]))) for a, b in diagonals]
        if _close(lengths[0], lengths[1]):
            def endpoints(d):
                pa, pb = sorted([tuple(v[d[0]]), tuple(v[d[1]])])
                return pa + pb
            a, b = min(diagonals, key=endpoints)
        else:
            a, b = diagonals[int(np.argmax(lengths))]
        return Line.mediator(v[a], v[b])
    if kind == "kite":
        s = side_lengths(Q)
        # sides i-1 and i meet at vertex i
        if _close(s[0], s[1]) and _close(s[2], s[3]):
            a, b = 1, 3
        else:
            a, b = 0, 2
        return Line.mediator(v[a], v[b])
    if kind == "parallelogram":
        _, e = Q.edges
        s = side_lengths(Q)
        side = e[0] if s[0] >= s[1] else e[1]
        return Line(tuple(centroid(Q)), (-side[1], side[0]))
    raise ValueError(f"no symmetrization line for kind {kind!r}")


def quad_to_rectangle(Q: Polygon, x0) -> list[ScheduleState]:
    """Drive a simple quadrilateral to a rectangle in at most three steps.

    general -> kite (mediator of the longer diagonal), kite -> parallelogram
    (mediator of the segment joining the apexes of the equal-side pairs),
    parallelogram -> rectangle (line perpendicular to the longer side pair).
    """
    kind = classify_quadrilateral(Q)
    states = [ScheduleState(0, Q, _point(x0), info={"kind": kind})]
    while kind != "rectangle":
        if len(states) > 3:
            raise RuntimeError("quadrilateral did not reach a rectangle in 3 steps")
        prev = states[-1]
        line = _quad_line(prev.polygon, kind)
        sym = steiner_symmetrize(prev.polygon, line)
        kind = classify_quadrilateral(sym)
        states.append(
            ScheduleState(prev.step + 1, sym, project_point(prev.tracked, line), line, {"kind": kind})
        )
    return states


def rectangle_frame(R: Polygon) -> tuple[RectParams, Transform]:
    """Half-sides of a rectangle and the rigid motion centring and axis-aligning it.

    ``a`` is half the longer side; the transform maps ``R`` onto the
    rectangle with vertices ``(+-a, +-b)``.
    """
    if classify_quadrilateral(R) != "rectangle":
        raise UnsupportedInputError("polygon is not a rectangle")
    _, e = R.edges
    s = side_lengths(R)
    long = 0 if s[0] >= s[1] else 1
    angle = math.atan2(e[long][1], e[long][0])
    c = np.asarray(centroid(R))
    to_origin = Transform(0.0, -c)
    motion = Transform(-angle).compose(to_origin)
    return RectParams(s[long] / 2.0, s[1 - long] / 2.0), motion


# -- rectangle to square -----------------------------------------------------


def rhombus_vertices(r: RectParams) -> list[Point2]:
    """Rhombus obtained from the rectangle ``(+-a, +-b)`` by symmetrizing about
    the line through 0 perpendicular to the diagonal from ``(-a,-b)`` to ``(a,b)``."""
    a, b = r.a, r.b
    q = a * a + b * b
    return [
        Point2(a, b),
        Point2(-2 * a * b * b / q, 2 * a * a * b / q),
        Point2(-a, -b),
        Point2(2 * a * b * b / q, -2 * a * a * b / q),
    ]


def rhombus_side(r: RectParams) -> float:
    a, b = r.a, r.b
    return math.sqrt(a**6 + 7 * a**4 * b**2 + 7 * a**2 * b**4 + b**6) / (a * a + b * b)


def next_rect_sides(r: RectParams) -> tuple[float, float]:
    """Full side lengths ``(a', b')`` of the rectangle after one rhombus stage.

    ``a'`` is the rhombus side (perpendicular to the second line) and ``b'``
    the extent along it; ``a' * b' == 4 * a * b``.
    """
    a, b = r.a, r.b
    q = a * a + b * b
    quartic = a**4 + 6 * a * a * b * b + b**4
    return math.sqrt(quartic / q), 4 * a * b * math.sqrt(q / quartic)


def side_ratio_step(c: float) -> float:
    """Side ratio of the next rectangle: ``(4c^3 + 4c) / (c^4 + 6c^2 + 1)``."""
    if not c > 0:
        raise ValueError(f"side ratio must be positive, got {c!r}")
    c2 = c * c
    return (4 * c2 * c + 4 * c) / (c2 * c2 + 6 * c2 + 1)


def _rhombus_line(r: RectParams) -> np.ndarray:
    return np.array([r.b, -r.a])


def _rectangle_line(r: RectParams) -> np.ndarray:
    a, b = r.a, r.b
    # slope -(a^3 + 3ab^2) / (b^3 - a^2 b); the direction form is vertical at a == b
    return np.array([b**3 - a * a * b, -(a**3 + 3 * a * b * b)])


def rect_to_square_schedule(r: RectParams, n_stages: int) -> list[ScheduleState]:
    """Alternate rhombus and rectangle symmetrizations for ``n_stages`` stages.

    Every line passes through the origin, so the tracked point stays at 0.
    Each emitted polygon comes from :func:`steiner_symmetrize`; its distance
    to the closed-form prediction is stored in ``info["closed_form_error"]``.
    """
    origin = Point2(0.0, 0.0)
    R = Polygon(r.vertices())
    states = [
        ScheduleState(0, R, origin, None, {"kind": "rectangle", "stage": 0, "a": r.a, "b": r.b, "c": r.b / r.a})
    ]
    params, angle = r, 0.0
    for stage in range(1, n_stages + 1):
        rect = states[-1].polygon

        d1 = _rotate(_rhombus_line(params), angle)
        l1 = Line((0.0, 0.0), d1)
        rhombus = steiner_symmetrize(rect, l1)
        expected = _rotate(np.array(rhombus_vertices(params)), angle)
        states.append(
            ScheduleState(
                states[-1].step + 1, rhombus, project_point(origin, l1), l1,
                {"kind": "rhombus", "stage": stage, "closed_form_error": _set_distance(rhombus.vertices, expected)},
            )
        )

        d2 = _rotate(_rectangle_line(params), angle)
        l2 = Line((0.0, 0.0), d2)
        square_ish = steiner_symmetrize(rhombus, l2)
        long_side, short_side = next_rect_sides(params)
        across = math.atan2(l2.direction[1], l2.direction[0]) - math.pi / 2
        expected = _rotate(RectParams(long_side / 2, short_side / 2).vertices(), across)

        params, motion = rectangle_frame(square_ish)
        angle = -motion.angle
        states.append(
            ScheduleState(
                states[-1].step + 1, square_ish, project_point(origin, l2), l2,
                {
                    "kind": "rectangle", "stage": stage, "a": params.a, "b": params.b,
                    "c": params.b / params.a,
                    "closed_form_error": _set_distance(square_ish.vertices, expected),
                },
            )
        )
    return states


def _set_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest nearest-neighbour distance between two equal-size point sets."""
    if a.shape != b.shape:
        return math.inf
    d = np.hypot(*(a[:, None, :] - b[None, :, :]).transpose(2, 0, 1))
    return float(max(d.min(axis=0).max(), d.min(axis=1).max()))


# -- regular targets ---------------------------------------------------------


def regular_polygon(n: int, area_: float, center=(0.0, 0.0), rotation: float = 0.0) -> Polygon:
    """Regular ``n``-gon (n = 3 or 4) of the given area; first vertex on the +x ray."""
    if n not in (3, 4):
        raise UnsupportedInputError(f"regular targets are only used for n = 3, 4, got {n}")
    if not area_ > 0:
        raise ValueError("area must be positive")
    radius = math.sqrt(2.0 * area_ / (n * math.sin(2 * math.pi / n)))
    k = np.arange(n)
    theta = rotation + 2 * math.pi * k / n
    pts = radius * np.column_stack([np.cos(theta), np.sin(theta)]) + np.asarray(center, dtype=float)
    return Polygon(pts)


def align_regular(P: Polygon, n: int | None = None) -> tuple[Polygon, float]:
    """Equal-area regular ``n``-gon centred at the centroid of ``P``, rotated
    to minimise the Hausdorff distance to ``P``.

    A coarse scan over one symmetry period brackets the minimum, then a
    golden-section search refines it. Returns the polygon and the distance.
    """
    n = len(P) if n is None else n
    c = centroid(P)
    a = area(P)
    period = 2 * math.pi / n

    def dist(theta: float) -> float:
        return hausdorff_distance(P, regular_polygon(n, a, c, theta))

    grid = np.linspace(0.0, period, 73)[:-1]
    values = [dist(t) for t in grid]
    best = int(np.argmin(values))
    step = grid[1] - grid[0]
    lo, hi = grid[best] - step, grid[best] + step
    invphi = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    f1, f2 = dist(x1), dist(x2)
    for _ in range(80):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = dist(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = dist(x2)
        if hi - lo < 1e-14:
            break
    theta = x1 if f1 <= f2 else x2
    target = regular_polygon(n, a, c, theta % period)
    return target, min(f1, f2)


__all__ = [
    "RectParams",
    "ScheduleState",
    "align_regular",
    "classify_quadrilateral",
    "equilateral_projection_schedule",
    "next_rect_sides",
    "quad_to_rectangle",
    "rect_to_square_schedule",
    "rectangle_frame",
    "regular_polygon",
    "rhombus_side",
    "rhombus_vertices",
    "side_ratio_step",
    "triangle_schedule",
    "triangle_step",
    "vertex_sets_close",
]
