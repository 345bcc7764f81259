"""Acceptance criteria. Each test records one PASS/FAIL line, printed in the
pytest terminal summary, and asserts its runtime budget."""

import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES, random_convex_polygon, random_line, random_star_polygon
from steiner_exit.geometry import (
    Line,
    Polygon,
    area,
    diameter,
    interior_angles,
    is_convex,
    reflect,
    steiner_symmetrize,
    vertex_sets_close,
)
from steiner_exit.schedules import (
    RectParams,
    align_regular,
    equilateral_projection_schedule,
    quad_to_rectangle,
    rect_to_square_schedule,
    side_ratio_step,
    triangle_schedule,
)
from steiner_exit.stochastic import (
    SimParams,
    estimate_eigenvalue,
    estimate_exit_probability,
    rectangle_eigenvalue,
    rectangle_survival_exact,
)
from steiner_exit.verify import (
    check_eigenvalue_ordering,
    check_polya_szego,
    check_sampler_calibration,
    check_schedule_convergence,
    check_symmetrization_monotonicity,
    unit_area,
)

SEED = 20240611
UNIT_SQUARE = Polygon([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])


class Criterion:
    """Collects failures for one criterion and records a single summary line."""

    def __init__(self, number, title, budget):
        self.number = number
        self.title = title
        self.budget = budget
        self.failures = []
        self.notes = []
        self.start = time.perf_counter()

    def check(self, ok, message):
        if not ok:
            self.failures.append(message)

    def note(self, message):
        self.notes.append(message)

    def finish(self):
        elapsed = time.perf_counter() - self.start
        self.check(elapsed < self.budget, f"runtime {elapsed:.1f}s exceeds {self.budget}s")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures[:3] if self.failures else self.notes)
        line = f"criterion {self.number:2d} {status} [{elapsed:6.1f}s] {self.title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert not self.failures, line


def test_criterion_01_geometry_suite():
    c = Criterion(1, "random polygons x random lines", budget=10)
    rng = np.random.default_rng(SEED)
    worst_area = worst_diam = 0.0
    convex_cases = 0
    for k in range(1000):
        P = random_convex_polygon(rng) if k % 4 == 0 else random_star_polygon(rng)
        line = random_line(rng)
        S = steiner_symmetrize(P, line)
        worst_area = max(worst_area, abs(area(S) - area(P)) / area(P))
        c.check(vertex_sets_close(reflect(S, line), S, 1e-9), f"case {k}: not symmetric")
        c.check(vertex_sets_close(steiner_symmetrize(S, line), S, 1e-9), f"case {k}: not idempotent")
        worst_diam = max(worst_diam, diameter(S) - diameter(P))
        if is_convex(P):
            convex_cases += 1
            c.check(is_convex(S), f"case {k}: convexity lost")
    c.check(worst_area <= 1e-10, f"area error {worst_area:.2e}")
    c.check(worst_diam <= 1e-9, f"diameter grew by {worst_diam:.2e}")
    c.note(f"max rel area error {worst_area:.1e}, max diameter change {worst_diam:.1e}, {convex_cases} convex inputs")
    c.finish()


def test_criterion_02_closed_form_cross_check():
    c = Criterion(2, "rectangle-to-square closed forms", budget=5)
    rng = np.random.default_rng(SEED + 2)
    worst_vertex = worst_ratio = 0.0
    stages_needed = []
    for k in range(50):
        r = RectParams(*rng.uniform(0.1, 3.0, 2))
        states = rect_to_square_schedule(r, 40)
        for s in states[1:]:
            worst_vertex = max(worst_vertex, s.info["closed_form_error"])
        cs = [s.info["c"] for s in states if s.info["kind"] == "rectangle"]
        iterate = cs[0]
        reached = None
        for m in range(1, len(cs)):
            iterate = side_ratio_step(iterate)
            worst_ratio = max(worst_ratio, abs(cs[m] - iterate))
            if reached is None:
                c.check(abs(cs[m] - 1) < abs(cs[m - 1] - 1), f"rectangle {k}: |c-1| not decreasing at stage {m}")
                if abs(cs[m] - 1) < 1e-9:
                    reached = m
        c.check(reached is not None, f"rectangle {k}: |c-1| never below 1e-9")
        stages_needed.append(reached or 99)
    c.check(worst_vertex < 1e-9, f"vertex deviation {worst_vertex:.2e}")
    c.check(worst_ratio < 1e-9, f"ratio deviation {worst_ratio:.2e}")
    c.note(f"max vertex deviation {worst_vertex:.1e}, max ratio deviation {worst_ratio:.1e}, stages to 1e-9 <= {max(stages_needed)}")
    c.finish()


def test_criterion_03_triangle_schedule():
    c = Criterion(3, "triangle mediator cycling", budget=5)
    states = triangle_schedule(Polygon([(0, 0), (1, 0), (0, 1)]), (0.2, 0.2), 30)
    last = states[-1].polygon
    angle_err = float(np.max(np.abs(interior_angles(last) - math.pi / 3)))
    c.check(angle_err < 1e-3, f"angle error {angle_err:.2e}")
    _, dist = align_regular(last, 3)
    c.check(dist < 1e-3 * diameter(last), f"aligned Hausdorff {dist:.2e}")
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(100):
        pts = equilateral_projection_schedule(tuple(rng.uniform(-0.3, 0.3, 2)), 20)
        n0 = math.hypot(*pts[0])
        worst = max(worst, max(abs(math.hypot(*p) * 2**m / n0 - 1) for m, p in enumerate(pts)))
    c.check(worst < 1e-14, f"contraction error {worst:.2e}")
    c.note(f"angle error {angle_err:.1e}, aligned Hausdorff {dist:.1e}, contraction rel error {worst:.1e}")
    c.finish()


def test_criterion_04_quadrilaterals():
    c = Criterion(4, "quadrilateral to rectangle", budget=5)
    rng = np.random.default_rng(SEED + 4)
    most_steps = 0
    nonconvex = 0
    for k in range(200):
        Q = random_star_polygon(rng, 4, 4)
        nonconvex += not is_convex(Q)
        states = quad_to_rectangle(Q, (0.0, 0.0))
        final = states[-1].polygon
        most_steps = max(most_steps, len(states) - 1)
        c.check(len(states) - 1 <= 3, f"quad {k}: {len(states) - 1} steps")
        c.check(len(final) == 4 and np.max(np.abs(interior_angles(final) - math.pi / 2)) < 1e-9, f"quad {k}: not a rectangle")
        c.check(abs(area(final) - area(Q)) <= 1e-10 * area(Q), f"quad {k}: area changed")
    c.note(f"at most {most_steps} steps, {nonconvex} non-convex inputs")
    c.finish()


def test_criterion_05_sampler_calibration():
    c = Criterion(5, "sampler calibration", budget=120)
    summary = []
    for alpha in (2.0, 1.5, 1.0, 0.5):
        r = check_sampler_calibration(alpha, SimParams(1.0, 1, 10**6, SEED))
        c.check(r.passed, f"alpha {alpha}: {r.details['checks']}")
        summary.append(f"alpha {alpha:g} worst/tol {r.statistic:.2f}")
    c.note(", ".join(summary))
    c.finish()


def test_criterion_06_oracle_agreement():
    c = Criterion(6, "unit square oracle", budget=180)
    parts = []
    for t in (0.1, 0.2, 0.4):
        exact = rectangle_survival_exact(1, 1, (0, 0), t)
        e = estimate_exit_probability(UNIT_SQUARE, (0, 0), 2.0, SimParams(t, 256, 10**6, SEED, bridge_correction=True))
        z = (e.p_hat - exact) / e.std_err
        c.check(abs(z) <= 3, f"t={t}: bridge {e.p_hat:.5f} vs {exact:.5f} (z={z:.2f})")
        parts.append(f"t={t:g} z={z:+.2f}")
    exact = rectangle_survival_exact(1, 1, (0, 0), 0.2)
    ladder = []
    for m in (32, 64, 128, 256):
        e = estimate_exit_probability(UNIT_SQUARE, (0, 0), 2.0, SimParams(0.2, m, 10**6, SEED))
        ladder.append(e.p_hat)
        c.check(e.p_hat - exact > 3 * e.std_err, f"m={m}: plain {e.p_hat:.5f} not above {exact:.5f}")
    c.check(all(b < a for a, b in zip(ladder, ladder[1:])), f"plain ladder not decreasing: {ladder}")
    parts.append("plain t=0.2 " + " > ".join(f"{p:.4f}" for p in ladder) + f" > {exact:.4f}")
    c.note(", ".join(parts))
    c.finish()


def _random_case(rng):
    while True:
        v = rng.uniform(-1, 1, (3, 2))
        try:
            T = Polygon(v)
        except ValueError:
            continue
        if np.min(interior_angles(T)) > math.radians(10):
            break
    T = unit_area(T.vertices)
    v = T.vertices
    side = int(rng.integers(3))
    line = Line.mediator(v[side], v[(side + 1) % 3])
    x0 = tuple(rng.dirichlet([2.0, 2.0, 2.0]) @ v)
    return T, line, x0


def test_criterion_07_symmetrization_monotonicity():
    c = Criterion(7, "symmetrization increases survival", budget=180)
    rng = np.random.default_rng(SEED + 7)
    cases = [_random_case(rng) for _ in range(10)]
    worst = math.inf
    for alpha in (2.0, 1.0):
        for k, (T, line, x0) in enumerate(cases):
            r = check_symmetrization_monotonicity(T, line, x0, alpha, SimParams(0.3, 128, 10**5, SEED))
            c.check(r.passed, f"alpha {alpha} case {k}: z={r.statistic:.2f}")
            worst = min(worst, r.statistic)
    c.note(f"20 comparisons, smallest z {worst:+.2f}")
    c.finish()


def test_criterion_08_polya_szego():
    c = Criterion(8, "regular polygon maximises survival", budget=600)
    shapes = [
        (3, unit_area([(0, 0), (4, 0), (0, 3)]), "3-4-5 triangle"),
        (4, unit_area([(0, 0), (2, 0), (1.6, 1.0), (0.3, 0.8)]), "convex quadrilateral"),
    ]
    parts = []
    for n, P, label in shapes:
        for alpha in (2.0, 1.0):
            params = SimParams(0.6, 64, 10**4, SEED, bridge_correction=alpha == 2.0)
            r = check_polya_szego(n, P, alpha, params, grid_resolution=15, center_n=10**6, t_list=[0.3, 0.6])
            c.check(r.passed, f"{label} alpha {alpha}: z={r.statistic:.2f}")
            parts.append(f"{label} a={alpha:g} max z {r.statistic:+.1f}")
    c.note(", ".join(parts))
    c.finish()


def test_criterion_09_eigenvalues():
    c = Criterion(9, "principal eigenvalue", budget=300)
    params = SimParams(0.5, 100, 10**6, SEED, bridge_correction=True)
    sq = estimate_eigenvalue(UNIT_SQUARE, (0, 0), 2.0, params, 0.3, 0.5)
    c.check(abs(sq.value / math.pi**2 - 1) < 0.1, f"square {sq.value:.3f} vs {math.pi ** 2:.3f}")
    L1, L2 = math.sqrt(2), 1 / math.sqrt(2)
    rect = Polygon([(-L1 / 2, -L2 / 2), (L1 / 2, -L2 / 2), (L1 / 2, L2 / 2), (-L1 / 2, L2 / 2)])
    rl = estimate_eigenvalue(rect, (0, 0), 2.0, params, 0.3, 0.5)
    target = rectangle_eigenvalue(L1, L2)
    c.check(abs(rl.value / target - 1) < 0.1, f"2:1 rectangle {rl.value:.3f} vs {target:.3f}")
    order = check_eigenvalue_ordering(3, unit_area([(0, 0), (4, 0), (0, 3)]), SimParams(0.5, 100, 2 * 10**5, SEED, bridge_correction=True))
    c.check(order.passed, f"triangle ordering z={order.statistic:.2f}")
    c.note(
        f"square {sq.value:.3f} (pi^2 {math.pi ** 2:.3f}), 2:1 rectangle {rl.value:.3f} ({target:.3f}), "
        f"scalene {order.details['polygon']['value']:.2f} >= equilateral {order.details['regular']['value']:.2f}"
    )
    c.finish()


def test_criterion_10_schedule_convergence():
    c = Criterion(10, "survival along schedules", budget=300)
    parts = []
    tri = triangle_schedule(unit_area([(0, 0), (1, 0), (0, 1)]), (0.1, 0.0), 30)
    tri_target, _ = align_regular(tri[-1].polygon, 3)
    a = math.sqrt(2) / 2
    rect = rect_to_square_schedule(RectParams(a, a / 2), 20)
    rect_target, _ = align_regular(rect[-1].polygon, 4)
    for label, states, target in (("triangle", tri, tri_target), ("rectangle", rect, rect_target)):
        for alpha in (2.0, 1.0):
            r = check_schedule_convergence(states, target, alpha, SimParams(0.2, 64, 10**5, SEED))
            c.check(r.passed, f"{label} alpha {alpha}: stat {r.statistic:.2f}, hausdorff {r.details['hausdorff'][-1]:.1e}")
            ests = r.details["estimates"]
            parts.append(f"{label} a={alpha:g} p {ests[0]['p_hat']:.3f}->{ests[-1]['p_hat']:.3f} stat {r.statistic:.2f}")
    c.note(", ".join(parts))
    c.finish()
