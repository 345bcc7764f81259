"""Planar polygons, lines, and Steiner symmetrization about a line.

Everything here works on closures of polygons: boundary points count as
inside. Polygons are stored as counterclockwise vertex loops in an
``(N, 2)`` float array that is made read-only on construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

TOL = 1e-12
"""Absolute tolerance for geometric predicates on unit-scale inputs."""

DEFAULT_SAMPLES_PER_DIAMETER = 2048


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class DegeneratePolygonError(GeometryError):
    """A construction produced (or was given) a polygon of zero area."""


class UnsupportedInputError(GeometryError):
    """The operation is defined only for a narrower class of polygons."""


class Point2(NamedTuple):
    x: float
    y: float


def _as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(arr)):
        raise GeometryError(f"non-finite point {p!r}")
    return arr


def _rot90(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


@dataclass(frozen=True, eq=False)
class Line:
    """Oriented line through ``anchor`` along the unit vector ``direction``."""

    anchor: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        anchor = _as_point(self.anchor)
        direction = _as_point(self.direction)
        norm = math.hypot(direction[0], direction[1])
        if norm == 0.0:
            raise GeometryError("line direction must be non-zero")
        direction = direction / norm
        anchor.setflags(write=False)
        direction.setflags(write=False)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "direction", direction)

    @classmethod
    def through(cls, p, q) -> "Line":
        p, q = _as_point(p), _as_point(q)
        return cls(p, q - p)

    @classmethod
    def mediator(cls, a, b) -> "Line":
        """Perpendicular bisector of the segment ``ab``."""
        a, b = _as_point(a), _as_point(b)
        if np.allclose(a, b, rtol=0.0, atol=TOL):
            raise GeometryError("mediator of a zero-length segment is undefined")
        return cls((a + b) / 2.0, _rot90(b - a))

    @property
    def normal(self) -> np.ndarray:
        """Unit normal, the direction rotated a quarter turn counterclockwise."""
        return _rot90(self.direction)

    def __repr__(self) -> str:
        a, d = self.anchor, self.direction
        return f"Line(anchor=({a[0]!r}, {a[1]!r}), direction=({d[0]!r}, {d[1]!r}))"


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class Transform:
    """Rigid motion ``p -> R(angle) @ p + translation``."""

    angle: float = 0.0
    translation: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle))
        t = _as_point(self.translation)
        t.setflags(write=False)
        object.__setattr__(self, "translation", t)

    @property
    def matrix(self) -> np.ndarray:
        return _rotation(self.angle)

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.matrix.T + self.translation

    def inverse(self) -> "Transform":
        rinv = _rotation(-self.angle)
        return Transform(-self.angle, -(rinv @ self.translation))

    def compose(self, other: "Transform") -> "Transform":
        """Return ``self ∘ other`` (apply ``other`` first)."""
        return Transform(self.angle + other.angle, self.matrix @ other.translation + self.translation)

    def apply_polygon(self, poly: "Polygon") -> "Polygon":
        return Polygon(self.apply(poly.vertices))


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """Continuous-between-breakpoints function given by ``(abscissa, value)`` pairs.

    Abscissae are non-decreasing. A jump is encoded by two consecutive pairs
    with the same abscissa (left limit first, then right limit). The first and
    last values are zero, so the function vanishes outside its support.
    """

    abscissae: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.abscissae, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if s.ndim != 1 or s.shape != v.shape or s.size < 2:
            raise ValueError("need matching 1-D arrays with at least two breakpoints")
        if np.any(np.diff(s) < 0):
            raise ValueError("abscissae must be non-decreasing")
        if np.any(v < 0):
            raise ValueError("values must be non-negative")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValueError("values must vanish at both extreme breakpoints")
        s.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "abscissae", s)
        object.__setattr__(self, "values", v)

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.abscissae.tolist(), self.values.tolist()))

    def integral(self) -> float:
        s, v = self.abscissae, self.values
        return float(np.sum(np.diff(s) * (v[1:] + v[:-1])) / 2.0)

    def __call__(self, z: float) -> float:
        s, v = self.abscissae, self.values
        if z < s[0] or z > s[-1]:
            return 0.0
        hits = np.flatnonzero(s == z)
        if hits.size:
            # closure: a jump takes the larger one-sided limit
            return float(v[hits].max())
        k = int(np.searchsorted(s, z)) - 1
        w = (z - s[k]) / (s[k + 1] - s[k])
        return float((1.0 - w) * v[k] + w * v[k + 1])


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _scale(v: np.ndarray) -> float:
    return max(float(np.ptp(v[:, 0])), float(np.ptp(v[:, 1])), 1e-300)


def _orient(a, b, c):
    """Cross product (b - a) x (c - a), broadcast over leading axes."""
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def _segments_intersect(p1, p2, q1, q2, tol):
    """Closed-segment intersection test, vectorised over leading axes."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    proper = (((d1 > tol) & (d2 < -tol)) | ((d1 < -tol) & (d2 > tol))) & (
        ((d3 > tol) & (d4 < -tol)) | ((d3 < -tol) & (d4 > tol))
    )

    def on_segment(a, b, p, d):
        lo = np.minimum(a, b) - tol
        hi = np.maximum(a, b) + tol
        inside = np.all((p >= lo) & (p <= hi), axis=-1)
        return (np.abs(d) <= tol) & inside

    touching = on_segment(q1, q2, p1, d1) | on_segment(q1, q2, p2, d2) | on_segment(p1, p2, q1, d3) | on_segment(p1, p2, q2, d4)
    return proper | touching


def is_simple(vertices) -> bool:
    """True if the closed vertex loop bounds a non-degenerate simple polygon."""
    if isinstance(vertices, Polygon):
        vertices = vertices.vertices
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3 or not np.all(np.isfinite(v)):
        return False
    n = v.shape[0]
    scale = _scale(v)
    tol = TOL * scale
    nxt = np.roll(v, -1, axis=0)
    if np.any(np.hypot(*(nxt - v).T) <= tol):
        return False
    if abs(_signed_area(v)) <= tol * scale:
        return False
    # adjacent edges may only share their common vertex: reject backtracking
    prv = np.roll(v, 1, axis=0)
    e_in, e_out = v - prv, nxt - v
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.sum(e_in * e_out, axis=1)
    if np.any((np.abs(cross) <= tol * scale) & (dot < 0)):
        return False
    if n == 3:
        return True
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    hits = _segments_intersect(v[i], nxt[i], v[j], nxt[j], tol * scale)
    return not bool(np.any(hits))


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon stored as a counterclockwise vertex loop.

    Clockwise input is reversed. A repeated closing vertex is dropped.
    Raises :class:`DegeneratePolygonError` for zero-area input and
    :class:`GeometryError` for other invalid loops.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError(f"vertices must have shape (N, 2), got {v.shape}")
        if v.shape[0] > 3 and np.array_equal(v[0], v[-1]):
            v = v[:-1]
        if v.shape[0] < 3:
            raise GeometryError("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise GeometryError("vertices must be finite")
        signed = _signed_area(v)
        if abs(signed) <= TOL * _scale(v) ** 2:
            raise DegeneratePolygonError("polygon has zero area")
        if signed < 0:
            v = v[::-1].copy()
        if not is_simple(v):
            raise GeometryError("polygon is not simple")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def _from_simple(cls, vertices: np.ndarray) -> "Polygon":
        """Build from a loop already known to be simple, skipping the O(N^2) test."""
        v = np.array(vertices, dtype=float)
        signed = _signed_area(v)
        if abs(signed) <= TOL * _scale(v) ** 2:
            raise DegeneratePolygonError("polygon has zero area")
        if signed < 0:
            v = v[::-1].copy()
        v.setflags(write=False)
        P = object.__new__(cls)
        object.__setattr__(P, "vertices", v)
        return P

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __iter__(self):
        return (Point2(float(x), float(y)) for x, y in self.vertices)

    def __repr__(self) -> str:
        pts = ", ".join(f"({x:.6g}, {y:.6g})" for x, y in self.vertices)
        return f"Polygon([{pts}])"

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge start points and edge vectors, each ``(N, 2)``."""
        v = self.vertices
        return v, np.roll(v, -1, axis=0) - v


def area(P: Polygon) -> float:
    return _signed_area(P.vertices)


def centroid(P: Polygon) -> Point2:
    v = P.vertices
    w = np.roll(v, -1, axis=0)
    cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
    a = cross.sum() / 2.0
    cx = np.sum((v[:, 0] + w[:, 0]) * cross) / (6.0 * a)
    cy = np.sum((v[:, 1] + w[:, 1]) * cross) / (6.0 * a)
    return Point2(float(cx), float(cy))


def diameter(P: Polygon) -> float:
    v = P.vertices
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())


def interior_angles(P: Polygon) -> np.ndarray:
    v = P.vertices
    e_in = v - np.roll(v, 1, axis=0)
    e_out = np.roll(v, -1, axis=0) - v
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.sum(e_in * e_out, axis=1)
    return math.pi - np.arctan2(cross, dot)


def min_interior_angle(P: Polygon) -> float:
    return float(interior_angles(P).min())


def is_convex(P: Polygon) -> bool:
    v = P.vertices
    e_in = v - np.roll(v, 1, axis=0)
    e_out = np.roll(v, -1, axis=0) - v
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    return bool(np.all(cross >= -TOL * _scale(v) ** 2))


def side_lengths(P: Polygon) -> np.ndarray:
    _, e = P.edges
    return np.hypot(e[:, 0], e[:, 1])


def _point_segment_distances(points: np.ndarray, P: Polygon) -> np.ndarray:
    """Distance from each point to each edge segment, shape ``(K, N)``."""
    start, e = P.edges
    rel = points[:, None, :] - start[None, :, :]
    len2 = np.sum(e * e, axis=1)
    w = np.clip(np.sum(rel * e[None], axis=2) / len2[None], 0.0, 1.0)
    foot = start[None] + w[..., None] * e[None]
    return np.hypot(*(points[:, None, :] - foot).transpose(2, 0, 1))


def contains(P: Polygon, points) -> np.ndarray | bool:
    """Closed point-in-polygon test (boundary counts as inside)."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 2)
    v = P.vertices
    w = np.roll(v, -1, axis=0)
    px, py = pts[:, 0:1], pts[:, 1:2]
    straddle = (v[None, :, 1] > py) != (w[None, :, 1] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = v[None, :, 0] + (py - v[None, :, 1]) * (w[None, :, 0] - v[None, :, 0]) / (w[None, :, 1] - v[None, :, 1])
    inside = (np.count_nonzero(straddle & (px < xcross), axis=1) % 2) == 1
    on_boundary = _point_segment_distances(pts, P).min(axis=1) <= TOL * _scale(v)
    result = inside | on_boundary
    return bool(result[0]) if single else result


def distance_to_polygon(points, P: Polygon) -> np.ndarray:
    """Euclidean distance from points to the closed polygon (0 inside)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    d = _point_segment_distances(pts, P).min(axis=1)
    d[contains(P, pts)] = 0.0
    return d


def project_point(p, line: Line) -> Point2:
    """Foot of the perpendicular from ``p`` to ``line``."""
    p = _as_point(p)
    q, d = line.anchor, line.direction
    foot = q + np.dot(p - q, d) * d
    return Point2(float(foot[0]), float(foot[1]))


def to_canonical(line: Line) -> Transform:
    """Rigid motion taking ``line`` onto the vertical axis ``{x = 0}``.

    The line's direction is first flipped, if needed, into the upper half
    plane; it is then rotated onto ``(0, 1)`` and shifted horizontally. The
    y-axis maps to the identity and the x-axis to a rotation by ``+pi/2``.
    """
    d = line.direction
    if d[1] < 0 or (d[1] == 0 and d[0] < 0):
        d = -d
    angle = math.pi / 2 - math.atan2(d[1], d[0])
    rotated_anchor = _rotation(angle) @ line.anchor
    return Transform(angle, np.array([-rotated_anchor[0], 0.0]))


def reflect(P: Polygon, line: Line) -> Polygon:
    """Mirror image of ``P`` across ``line``."""
    q, n = line.anchor, line.normal
    v = P.vertices
    offset = (v - q) @ n
    return Polygon(v - 2.0 * offset[:, None] * n[None, :])


def _line_coords(v: np.ndarray, line: Line) -> tuple[np.ndarray, np.ndarray]:
    rel = v - line.anchor
    return rel @ line.direction, rel @ line.normal


def _merge_close(sorted_vals: np.ndarray, tol: float) -> np.ndarray:
    """Group ids for values that chain together within ``tol``."""
    return np.concatenate([[0], np.cumsum(np.diff(sorted_vals) > tol)])


def chord_length_function(P: Polygon, line: Line) -> PiecewiseLinear:
    """Length of the slice of ``P`` perpendicular to ``line``, as a function of
    the coordinate along ``line`` measured from its anchor."""
    v = P.vertices
    s, u = _line_coords(v, line)
    tol = TOL * _scale(v)

    order = np.argsort(s, kind="stable")
    group = _merge_close(s[order], tol)
    keys = np.array([s[order][group == g].mean() for g in range(group[-1] + 1)])
    snapped = np.empty_like(s)
    snapped[order] = keys[group]

    sa, sb = snapped, np.roll(snapped, -1)
    ua, ub = u, np.roll(u, -1)
    ds = sb - sa
    slanted = ds != 0.0
    sa, sb, ua, ub, ds = sa[slanted], sb[slanted], ua[slanted], ub[slanted], ds[slanted]
    lo, hi = np.minimum(sa, sb), np.maximum(sa, sb)
    # CCW loop: the signed sum of edge offsets across a slice is its length
    sign = -np.sign(ds)

    left, right = keys[:-1], keys[1:]
    active = (lo[None, :] <= left[:, None]) & (hi[None, :] >= right[:, None])

    def offsets_at(z):
        return ua[None, :] + (z[:, None] - sa[None, :]) / ds[None, :] * (ub - ua)[None, :]

    start_len = np.where(active, sign[None, :] * offsets_at(left), 0.0).sum(axis=1)
    end_len = np.where(active, sign[None, :] * offsets_at(right), 0.0).sum(axis=1)
    start_len = np.where(start_len > tol, start_len, 0.0)
    end_len = np.where(end_len > tol, end_len, 0.0)

    abscissae: list[float] = []
    values: list[float] = []
    n_keys = keys.size
    for k in range(n_keys):
        from_left = end_len[k - 1] if k > 0 else 0.0
        from_right = start_len[k] if k < n_keys - 1 else 0.0
        if abs(from_left - from_right) <= tol:
            abscissae.append(keys[k])
            values.append(0.5 * (from_left + from_right))
        else:
            abscissae += [keys[k], keys[k]]
            values += [from_left, from_right]
    return PiecewiseLinear(np.array(abscissae), np.array(values))


def _drop_redundant(pts: np.ndarray, tol: float) -> np.ndarray:
    """Remove repeated and collinear pass-through vertices from a loop."""
    changed = True
    while changed and pts.shape[0] >= 3:
        changed = False
        nxt = np.roll(pts, -1, axis=0)
        dup = np.hypot(*(nxt - pts).T) <= tol
        if dup.any():
            pts = pts[~dup]
            changed = True
            continue
        prv = np.roll(pts, 1, axis=0)
        nxt = np.roll(pts, -1, axis=0)
        base = nxt - prv
        base_len = np.hypot(base[:, 0], base[:, 1])
        off = np.abs(_orient(prv, nxt, pts)) / np.where(base_len > 0, base_len, 1.0)
        flat = off <= tol
        if flat.any():
            # drop one at a time so neighbours are re-evaluated
            pts = np.delete(pts, int(np.flatnonzero(flat)[0]), axis=0)
            changed = True
    return pts


def steiner_symmetrize(P: Polygon, line: Line) -> Polygon:
    """Steiner symmetrization of ``P`` about ``line``.

    Each slice perpendicular to ``line`` is replaced by the interval of the
    same length centred on ``line``. Works for any simple polygon via a slab
    sweep over the vertex projections.
    """
    f = chord_length_function(P, line)
    s, half = f.abscissae, f.values / 2.0
    local = np.concatenate(
        [np.column_stack([s, -half]), np.column_stack([s[::-1], half[::-1]])]
    )
    local = _drop_redundant(local, TOL * _scale(P.vertices))
    if local.shape[0] < 3:
        raise DegeneratePolygonError("symmetrization collapsed to a segment")
    world = line.anchor + local[:, :1] * line.direction + local[:, 1:] * line.normal
    # centred chords stacked along the line always bound a simple region
    return Polygon._from_simple(world)


def vertex_sets_close(A, B, tol: float = 1e-9) -> bool:
    """Whether two vertex loops have the same vertex set up to ``tol``."""
    a = np.asarray(A.vertices if isinstance(A, Polygon) else A, dtype=float)
    b = np.asarray(B.vertices if isinstance(B, Polygon) else B, dtype=float)
    if a.shape != b.shape:
        return False
    d = np.hypot(*(a[:, None, :] - b[None, :, :]).transpose(2, 0, 1))
    return bool(d.min(axis=1).max() <= tol and d.min(axis=0).max() <= tol)


def boundary_samples(P: Polygon, step: float) -> np.ndarray:
    """Points along the boundary no farther than ``step`` apart, vertices included."""
    start, e = P.edges
    lengths = np.hypot(e[:, 0], e[:, 1])
    chunks = []
    for a, vec, length in zip(start, e, lengths):
        k = max(1, int(math.ceil(length / step)))
        w = np.arange(k) / k
        chunks.append(a + w[:, None] * vec)
    return np.concatenate(chunks)


def _directed_hausdorff(A: Polygon, B: Polygon, step: float | None) -> float:
    if is_convex(B):
        # distance to a convex set is convex, so the max over A sits at a vertex
        return float(distance_to_polygon(A.vertices, B).max())
    if step is None:
        step = diameter(A) / DEFAULT_SAMPLES_PER_DIAMETER
    return float(distance_to_polygon(boundary_samples(A, step), B).max())


def hausdorff_distance(A: Polygon, B: Polygon, step: float | None = None) -> float:
    """Hausdorff distance between the closed polygons ``A`` and ``B``.

    Exact when the target of each directed distance is convex. Otherwise the
    source boundary is sampled every ``step`` (default ``diameter / 2048``),
    which can under-report the distance along the boundary by at most ``step``.
    Interior points of a non-convex source are not sampled.
    """
    return max(_directed_hausdorff(A, B, step), _directed_hausdorff(B, A, step))


def min_vertex_side_distance(P: Polygon) -> float:
    """Smallest distance from a vertex to an edge not incident to it."""
    v = P.vertices
    n = v.shape[0]
    d = _point_segment_distances(v, P)
    idx = np.arange(n)
    d[idx, idx] = np.inf
    d[idx, (idx - 1) % n] = np.inf
    return float(d.min())


def epsilon_cone_radius(P: Polygon) -> float:
    """Cone-condition radius ``min(smallest angle, smallest height) / 4``.

    For a triangle the height term is its smallest altitude; for other convex
    polygons it is the smallest vertex-to-non-incident-edge distance.
    """
    if not is_convex(P):
        raise UnsupportedInputError("epsilon_cone_radius needs a convex polygon")
    return 0.25 * min(min_interior_angle(P), min_vertex_side_distance(P))


def as_polygon(points: Sequence[Sequence[float]] | Polygon) -> Polygon:
    return points if isinstance(points, Polygon) else Polygon(points)
