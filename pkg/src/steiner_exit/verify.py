"""Statistical checks of the symmetrization inequalities at desk scale.

Each check returns a :class:`VerifyReport`. Monte Carlo comparisons use a
threshold of three combined standard errors, ``sqrt(se1^2 + se2^2)``, and
report the comparison as a z-score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .geometry import (
    Line,
    Polygon,
    area,
    as_polygon,
    centroid,
    contains,
    diameter,
    hausdorff_distance,
    project_point,
    steiner_symmetrize,
)
from .schedules import ScheduleState, align_regular, regular_polygon, triangle_schedule
from .stochastic import (
    DEFAULT_SEED,
    SimParams,
    check_alpha,
    estimate_eigenvalue,
    estimate_exit_curve,
    estimate_exit_probability,
    stable_step,
    stable_subordinator_step,
)

Z_THRESHOLD = 3.0
GRID_CAVEAT = (
    "grid maximum is a lower bound for the supremum over the polygon; "
    "the result holds at the reported resolution only"
)


@dataclass(frozen=True)
class VerifyReport:
    name: str
    passed: bool
    statistic: float
    threshold: float
    details: dict[str, Any] = field(default_factory=dict)
    seed: int = DEFAULT_SEED

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "seed": self.seed,
            "details": self.details,
        }

    def csv_row(self) -> list[Any]:
        return [self.name, self.passed, self.statistic, self.threshold, self.seed]


CSV_HEADER = ["name", "passed", "statistic", "threshold", "seed"]


def z_score(diff: float, se: float) -> float:
    """``diff / se``, with an exact zero difference scoring 0 even when ``se`` is 0."""
    if se > 0:
        return diff / se
    if diff == 0:
        return 0.0
    return math.copysign(math.inf, diff)


def combined_se(*errors: float) -> float:
    return math.sqrt(sum(e * e for e in errors))


def _xy(p) -> list[float]:
    x, y = np.asarray(p, dtype=float).reshape(2)
    return [float(x), float(y)]


# -- symmetrization monotonicity --------------------------------------------


def check_symmetrization_monotonicity(
    D: Polygon, line: Line, x0, alpha: float, params: SimParams, workers: int | None = None
) -> VerifyReport:
    """``P_x0(tau_D > t) <= P_x#(tau_D# > t)`` for the Steiner symmetral ``D#``.

    Passes unless the symmetral's estimate falls more than three combined
    standard errors below the original's.
    """
    D = as_polygon(D)
    alpha = check_alpha(alpha)
    if not contains(D, x0):
        raise ValueError("starting point must lie in the polygon")
    sym = steiner_symmetrize(D, line)
    x_sym = project_point(x0, line)
    before = estimate_exit_probability(D, x0, alpha, params, workers)
    after = estimate_exit_probability(sym, x_sym, alpha, params, workers)
    diff = after.p_hat - before.p_hat
    se = combined_se(before.std_err, after.std_err)
    z = z_score(diff, se)
    return VerifyReport(
        name="symmetrization_monotonicity",
        passed=z >= -Z_THRESHOLD,
        statistic=z,
        threshold=-Z_THRESHOLD,
        details={
            "alpha": alpha,
            "original": before.to_dict(),
            "symmetrized": after.to_dict(),
            "difference": diff,
            "combined_std_err": se,
            "x0": _xy(x0),
            "x_sym": _xy(x_sym),
            "sym_vertices": sym.vertices.tolist(),
        },
        seed=params.seed,
    )


# -- schedule convergence ----------------------------------------------------


def check_schedule_convergence(
    schedule: Sequence[ScheduleState],
    target: Polygon,
    alpha: float,
    params: SimParams,
    target_point=None,
    tol: float | None = None,
    stride: int = 1,
    workers: int | None = None,
) -> VerifyReport:
    """Convergence of domains and exit probabilities along a schedule.

    Three conditions, all required:

    * the Hausdorff distance from the last polygon to ``target`` is below
      ``tol`` (default ``1e-3 * diameter(target)``);
    * the last estimate agrees with the estimate on ``target`` started at
      ``target_point`` (default: the last tracked point) within three
      combined standard errors;
    * estimates along the schedule (every ``stride``-th state and the last)
      never drop by more than three combined standard errors.

    ``statistic`` is the worst z-score among the last two conditions.
    """
    if not schedule:
        raise ValueError("schedule must not be empty")
    target = as_polygon(target)
    alpha = check_alpha(alpha)
    tol = 1e-3 * diameter(target) if tol is None else float(tol)
    x_target = schedule[-1].tracked if target_point is None else target_point

    h = [hausdorff_distance(s.polygon, target) for s in schedule]
    picked = list(range(0, len(schedule), max(1, int(stride))))
    if picked[-1] != len(schedule) - 1:
        picked.append(len(schedule) - 1)
    ests = [estimate_exit_probability(schedule[k].polygon, schedule[k].tracked, alpha, params, workers) for k in picked]
    limit = estimate_exit_probability(target, x_target, alpha, params, workers)

    drops = [
        z_score(b.p_hat - a.p_hat, combined_se(a.std_err, b.std_err)) for a, b in zip(ests, ests[1:])
    ]
    worst_drop = -min(drops) if drops else 0.0
    final_diff = ests[-1].p_hat - limit.p_hat
    final_z = abs(z_score(final_diff, combined_se(ests[-1].std_err, limit.std_err)))
    statistic = max(final_z, worst_drop)
    hausdorff_ok = h[-1] < tol
    return VerifyReport(
        name="schedule_convergence",
        passed=bool(hausdorff_ok and statistic <= Z_THRESHOLD),
        statistic=statistic,
        threshold=Z_THRESHOLD,
        details={
            "alpha": alpha,
            "hausdorff": h,
            "hausdorff_tol": tol,
            "hausdorff_passed": hausdorff_ok,
            "hausdorff_non_increasing": all(b <= a + 1e-12 for a, b in zip(h, h[1:])),
            "steps": [schedule[k].step for k in picked],
            "estimates": [e.to_dict() for e in ests],
            "limit": limit.to_dict(),
            "limit_point": _xy(x_target),
            "final_z": final_z,
            "worst_drop_z": worst_drop,
        },
        seed=params.seed,
    )


# -- Polya-Szego -------------------------------------------------------------


def interior_grid(P: Polygon, resolution: int) -> np.ndarray:
    """Interior sample points of a triangle or quadrilateral.

    Triangles: barycentric coordinates ``(i, j) / (r + 1)`` with
    ``i, j >= 1`` and ``i + j <= r``. Quadrilaterals: the cell centres of an
    ``r x r`` grid mapped through the bilinear patch of the vertices, keeping
    points inside the polygon.
    """
    r = int(resolution)
    if r < 1:
        raise ValueError("grid resolution must be at least 1")
    v = P.vertices
    if len(P) == 3:
        k = np.arange(1, r + 1) / (r + 1)
        u, w = np.meshgrid(k, k, indexing="ij")
        keep = u + w < 1 - 1e-12
        u, w = u[keep], w[keep]
        pts = np.outer(1 - u - w, v[0]) + np.outer(u, v[1]) + np.outer(w, v[2])
    elif len(P) == 4:
        k = (np.arange(r) + 0.5) / r
        u, w = (a.ravel() for a in np.meshgrid(k, k, indexing="ij"))
        pts = (
            np.outer((1 - u) * (1 - w), v[0])
            + np.outer(u * (1 - w), v[1])
            + np.outer(u * w, v[2])
            + np.outer((1 - u) * w, v[3])
        )
        pts = pts[np.asarray(contains(P, pts))]
    else:
        raise ValueError(f"grid is defined for triangles and quadrilaterals, got {len(P)} vertices")
    return pts


def check_polya_szego(
    n: int,
    P: Polygon,
    alpha: float,
    params: SimParams,
    grid_resolution: int = 15,
    center_n: int | None = None,
    t_list: Sequence[float] | None = None,
    workers: int | None = None,
) -> VerifyReport:
    """``sup_x P_x(tau_P > t) <= P_0(tau_R > t)`` with ``R`` the regular
    ``n``-gon of the same area centred at 0.

    The supremum is taken over :func:`interior_grid`; every grid point uses
    the same seed. The centre of ``R`` is estimated with ``center_n`` paths
    (default ``params.n``). With ``t_list`` every horizon is checked on one
    set of paths. ``statistic`` is the largest z-score of grid max minus
    centre estimate over the horizons.
    """
    P = as_polygon(P)
    alpha = check_alpha(alpha)
    if len(P) != n:
        raise ValueError(f"expected a {n}-gon, got {len(P)} vertices")
    R = regular_polygon(n, area(P))
    horizons = [params.t] if t_list is None else list(t_list)
    grid = interior_grid(P, grid_resolution)

    curves = np.array(
        [[(e.p_hat, e.std_err) for e in estimate_exit_curve(P, x, alpha, params, horizons, workers)] for x in grid]
    )
    center_params = replace(params, n=int(center_n or params.n))
    center = estimate_exit_curve(R, (0.0, 0.0), alpha, center_params, horizons, workers)

    per_horizon = []
    for h, t in enumerate(horizons):
        k = int(np.argmax(curves[:, h, 0]))
        p_max, se_max = curves[k, h]
        se = combined_se(se_max, center[h].std_err)
        z = z_score(p_max - center[h].p_hat, se)
        per_horizon.append(
            {
                "t": float(t),
                "grid_max": float(p_max),
                "grid_max_std_err": float(se_max),
                "argmax": grid[k].tolist(),
                "center": center[h].to_dict(),
                "combined_std_err": se,
                "z": z,
            }
        )
    statistic = max(d["z"] for d in per_horizon)
    return VerifyReport(
        name=f"polya_szego_n{n}",
        passed=statistic <= Z_THRESHOLD,
        statistic=statistic,
        threshold=Z_THRESHOLD,
        details={
            "alpha": alpha,
            "grid_resolution": int(grid_resolution),
            "grid_points": int(len(grid)),
            "m": params.m,
            "n_grid": params.n,
            "n_center": center_params.n,
            "horizons": per_horizon,
            "caveat": GRID_CAVEAT,
        },
        seed=params.seed,
    )


# -- eigenvalue ordering -----------------------------------------------------


def check_eigenvalue_ordering(
    n: int,
    P: Polygon,
    params: SimParams,
    t1: float | None = None,
    t2: float | None = None,
    workers: int | None = None,
) -> VerifyReport:
    """``lambda(P) >= lambda(R)`` for the regular ``n``-gon ``R`` of equal area,
    Brownian case, both estimated from the centroid.

    Horizons default to ``0.3 * area`` and ``0.5 * area``. For squares the
    report also compares ``lambda(R)`` with ``pi^2 / area``.
    """
    P = as_polygon(P)
    if len(P) != n:
        raise ValueError(f"expected a {n}-gon, got {len(P)} vertices")
    a = area(P)
    t1 = 0.3 * a if t1 is None else float(t1)
    t2 = 0.5 * a if t2 is None else float(t2)
    R = regular_polygon(n, a)
    lam_p = estimate_eigenvalue(P, centroid(P), 2.0, params, t1, t2, workers)
    lam_r = estimate_eigenvalue(R, (0.0, 0.0), 2.0, params, t1, t2, workers)
    se = combined_se(lam_p.std_err, lam_r.std_err)
    z = z_score(lam_p.value - lam_r.value, se)
    details: dict[str, Any] = {
        "polygon": lam_p.to_dict(),
        "regular": lam_r.to_dict(),
        "difference": lam_p.value - lam_r.value,
        "combined_std_err": se,
    }
    if n == 4:
        exact = math.pi**2 / a
        details["square_exact"] = exact
        details["square_z"] = z_score(lam_r.value - exact, lam_r.std_err)
    return VerifyReport(
        name=f"eigenvalue_ordering_n{n}",
        passed=z >= -Z_THRESHOLD,
        statistic=z,
        threshold=-Z_THRESHOLD,
        details=details,
        seed=params.seed,
    )


# -- sampler calibration -----------------------------------------------------


def _mean_check(name: str, samples: np.ndarray, target: float) -> dict[str, Any]:
    mean = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(samples.size))
    z = z_score(mean - target, se)
    return {"name": name, "estimate": mean, "target": target, "std_err": se, "z": z, "ratio": abs(z) / Z_THRESHOLD}


def check_sampler_calibration(alpha: float, params: SimParams) -> VerifyReport:
    """Sampler moments against their closed forms, ``params.n`` draws at
    time step ``params.t``.

    * characteristic function at ``xi = (1, 0)`` against ``exp(-t)``;
    * alpha = 2: per-coordinate variance within 1% of ``2 t``;
    * alpha < 2: subordinator Laplace transform at ``l = 0.5, 1, 2``
      against ``exp(-t l^(alpha/2))``.

    ``statistic`` is the largest ratio of a deviation to its tolerance.
    """
    alpha = check_alpha(alpha)
    t = params.t
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([params.seed, 0x5A17])))
    checks = []
    z = stable_step(t, alpha, rng, size=params.n)
    checks.append(_mean_check("characteristic_function", np.cos(z[:, 0]), math.exp(-t)))
    if alpha == 2.0:
        for axis in (0, 1):
            var = float(z[:, axis].var())
            rel = abs(var / (2 * t) - 1)
            checks.append({"name": f"variance_{axis}", "estimate": var, "target": 2 * t, "relative_error": rel, "ratio": rel / 0.01})
    else:
        s = stable_subordinator_step(t, alpha / 2, rng, size=params.n)
        for lam in (0.5, 1.0, 2.0):
            checks.append(_mean_check(f"laplace_{lam:g}", np.exp(-lam * s), math.exp(-t * lam ** (alpha / 2))))
    statistic = max(c["ratio"] for c in checks)
    return VerifyReport(
        name=f"sampler_calibration_alpha{alpha:g}",
        passed=statistic <= 1.0,
        statistic=statistic,
        threshold=1.0,
        details={"alpha": alpha, "t": t, "draws": params.n, "checks": checks},
        seed=params.seed,
    )


# -- default suite -----------------------------------------------------------

DEFAULT_ALPHAS = (2.0, 1.5, 1.0, 0.5)


def unit_area(vertices) -> Polygon:
    """Polygon scaled about its centroid to area 1."""
    P = Polygon(vertices)
    c = np.asarray(centroid(P))
    return Polygon(c + (P.vertices - c) / math.sqrt(area(P)))


def default_suite(seed: int = DEFAULT_SEED, workers: int | None = None) -> list[VerifyReport]:
    """A quick run of every check, a minute or so on one core."""
    reports = []
    for alpha in DEFAULT_ALPHAS:
        reports.append(check_sampler_calibration(alpha, SimParams(1.0, 1, 200_000, seed)))

    scalene = unit_area([(0, 0), (3, 0), (0, 4)])
    v = scalene.vertices
    mediator = Line.mediator(v[0], v[1])
    x0 = tuple(0.5 * v[0] + 0.3 * v[1] + 0.2 * v[2])
    for alpha in (2.0, 1.0):
        reports.append(
            check_symmetrization_monotonicity(scalene, mediator, x0, alpha, SimParams(0.3, 64, 20_000, seed), workers)
        )

    schedule = triangle_schedule(unit_area([(0, 0), (1, 0), (0, 1)]), (0.1, 0.1), 30)
    target, _ = align_regular(schedule[-1].polygon, 3)
    reports.append(
        check_schedule_convergence(schedule, target, 2.0, SimParams(0.1, 32, 20_000, seed), stride=5, workers=workers)
    )

    reports.append(
        check_polya_szego(3, scalene, 2.0, SimParams(0.1, 32, 5_000, seed), grid_resolution=5, center_n=50_000, workers=workers)
    )
    quad = unit_area([(0, 0), (2, 0), (1.6, 1.0), (0.3, 0.8)])
    reports.append(
        check_polya_szego(4, quad, 1.0, SimParams(0.1, 32, 5_000, seed), grid_resolution=5, center_n=50_000, workers=workers)
    )
    reports.append(check_eigenvalue_ordering(3, scalene, SimParams(0.5, 50, 50_000, seed, bridge_correction=True), workers=workers))
    return reports


__all__ = [
    "CSV_HEADER",
    "DEFAULT_ALPHAS",
    "GRID_CAVEAT",
    "VerifyReport",
    "check_eigenvalue_ordering",
    "check_polya_szego",
    "check_sampler_calibration",
    "check_schedule_convergence",
    "check_symmetrization_monotonicity",
    "combined_se",
    "default_suite",
    "interior_grid",
    "unit_area",
    "z_score",
]
