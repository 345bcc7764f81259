import math

import numpy as np
import pytest

from steiner_exit.geometry import Line, Polygon


def random_star_polygon(rng, n_min=3, n_max=12):
    """Simple polygon: sorted angles, random radii about a random centre."""
    n = int(rng.integers(n_min, n_max + 1))
    while True:
        theta = np.sort(rng.uniform(0, 2 * math.pi, n))
        if np.min(np.diff(np.r_[theta, theta[0] + 2 * math.pi])) < 0.05:
            continue
        r = rng.uniform(0.3, 2.0, n)
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)]) + rng.uniform(-1, 1, 2)
        try:
            return Polygon(pts)
        except ValueError:
            continue


def random_convex_polygon(rng, n_min=3, n_max=10):
    """Points on a random rotated ellipse, in angular order."""
    n = int(rng.integers(n_min, n_max + 1))
    while True:
        theta = np.sort(rng.uniform(0, 2 * math.pi, n))
        if np.min(np.diff(np.r_[theta, theta[0] + 2 * math.pi])) < 0.05:
            continue
        ax, ay = rng.uniform(0.3, 2.0, 2)
        phi = rng.uniform(0, math.pi)
        rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        pts = np.column_stack([ax * np.cos(theta), ay * np.sin(theta)]) @ rot.T + rng.uniform(-1, 1, 2)
        try:
            return Polygon(pts)
        except ValueError:
            continue


def random_line(rng):
    phi = rng.uniform(0, 2 * math.pi)
    return Line(tuple(rng.uniform(-1.5, 1.5, 2)), (math.cos(phi), math.sin(phi)))


def random_triangle_with_point(rng):
    while True:
        v = rng.uniform(-1, 1, (3, 2))
        try:
            T = Polygon(v)
        except ValueError:
            continue
        if T.vertices is not None and abs(np.cross(v[1] - v[0], v[2] - v[0])) > 0.2:
            w = rng.dirichlet([2, 2, 2])
            return T, tuple(w @ T.vertices)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
