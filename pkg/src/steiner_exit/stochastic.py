"""Monte Carlo exit probabilities for Brownian motion and symmetric alpha-stable
processes in planar polygons.

Conventions:

* ``alpha = 2`` in the exit estimators is standard Brownian motion
  (variance ``t`` per coordinate, generator one half of the Laplacian).
* ``alpha < 2`` is the subordinated process ``A_t = B_{2 sigma_t}`` with
  ``sigma`` a one-sided stable subordinator of index ``alpha / 2``; its
  characteristic function is ``exp(-t |xi|^alpha)``.
* :func:`stable_step` follows the same subordination for every alpha, so at
  ``alpha = 2`` it returns a Gaussian increment over time ``2 t``.

A path survives to time ``t`` when every skeleton position on the time grid
lies in the polygon. Paths are simulated in chunks of 4096 with one Philox
stream per chunk, so results depend only on the seed and not on threading.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .geometry import Polygon, as_polygon, contains, is_convex

CHUNK_SIZE = 4096
DEFAULT_SEED = 20240611
_GRID_RTOL = 1e-9


class InsufficientSamplesError(ValueError):
    """Raised when an estimate is too noisy to take its logarithm."""


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha <= 2.0):
        raise ValueError(f"stability index must lie in (0, 2], got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class SimParams:
    """Horizon ``t``, skeleton steps ``m`` over ``[0, t]``, paths ``n``.

    ``bridge_correction`` is honoured only for ``alpha = 2``.
    """

    t: float
    m: int
    n: int
    seed: int = DEFAULT_SEED
    bridge_correction: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t > 0):
            raise ValueError(f"t must be positive, got {self.t!r}")
        for name in ("m", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "bridge_correction", bool(self.bridge_correction))


@dataclass(frozen=True)
class ExitEstimate:
    p_hat: float
    std_err: float
    n: int
    m: int
    t: float
    alpha: float = 2.0
    seed: int = DEFAULT_SEED
    bridge: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EigenvalueEstimate:
    """Log-slope eigenvalue estimate with a delta-method standard error."""

    value: float
    std_err: float
    t1: float
    t2: float
    p1: ExitEstimate
    p2: ExitEstimate

    def __float__(self) -> float:
        return self.value

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        return self.value - z * self.std_err, self.value + z * self.std_err

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_err": self.std_err,
            "t1": self.t1,
            "t2": self.t2,
            "p1": self.p1.to_dict(),
            "p2": self.p2.to_dict(),
        }


# -- samplers ----------------------------------------------------------------


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Independent Philox stream for path chunk ``chunk``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def _positive(t_step: float) -> float:
    t_step = float(t_step)
    if not (math.isfinite(t_step) and t_step > 0):
        raise ValueError(f"time step must be positive, got {t_step!r}")
    return t_step


def gaussian_step(t_step: float, rng=None, size: int | None = None) -> np.ndarray:
    """Planar Gaussian increment with variance ``t_step`` per coordinate.

    Returns shape ``(2,)``, or ``(size, 2)`` when ``size`` is given.
    """
    t_step = _positive(t_step)
    out = _kernels.increment_many(_generator(rng), t_step, 2.0, 1 if size is None else int(size))
    return out[0] if size is None else out


def stable_subordinator_step(t_step: float, index: float, rng=None, size: int | None = None):
    """Positive stable increment with ``E exp(-l S) = exp(-t_step l^index)``."""
    t_step = _positive(t_step)
    index = float(index)
    if not (0.0 < index < 1.0):
        raise ValueError(f"subordinator index must lie in (0, 1), got {index!r}")
    out = _kernels.subordinator_many(_generator(rng), t_step, index, 1 if size is None else int(size))
    return float(out[0]) if size is None else out


def stable_step(t_step: float, alpha: float, rng=None, size: int | None = None) -> np.ndarray:
    """Increment of the process with characteristic function ``exp(-t_step |xi|^alpha)``."""
    t_step = _positive(t_step)
    alpha = check_alpha(alpha)
    dt = 2.0 * t_step if alpha == 2.0 else t_step
    out = _kernels.increment_many(_generator(rng), dt, alpha, 1 if size is None else int(size))
    return out[0] if size is None else out


# -- exit estimation ---------------------------------------------------------


def _time_grid(step: float, t_list: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Step lengths of the grid ``{j step} U t_list`` up to ``max(t_list)``
    and, for each horizon, the index of the step ending there.

    A grid node within a relative 1e-9 of a horizon is moved onto it.
    """
    t_max = float(t_list[-1])
    nodes = step * np.arange(1, int(math.floor(t_max / step * (1 + _GRID_RTOL))) + 1)
    extra = []
    for t in t_list:
        k = int(np.argmin(np.abs(nodes - t))) if nodes.size else -1
        if k >= 0 and abs(nodes[k] - t) <= _GRID_RTOL * max(t, step):
            nodes[k] = t
        else:
            extra.append(t)
    nodes = np.unique(np.concatenate([nodes, extra]))
    nodes = nodes[nodes <= t_max]
    record = np.searchsorted(nodes, t_list).astype(np.int64)
    dts = np.diff(np.concatenate([[0.0], nodes]))
    return dts, record


def _edge_data(D: Polygon):
    v = D.vertices
    e = np.roll(v, -1, axis=0) - v
    normals = np.column_stack([-e[:, 1], e[:, 0]]) / np.hypot(e[:, 0], e[:, 1])[:, None]
    offsets = np.einsum("ij,ij->i", normals, v)
    return np.ascontiguousarray(v), np.ascontiguousarray(normals), offsets


def _run(D, x0, alpha, params, t_list, workers):
    """Per-horizon weight sums and second moments over all paths."""
    dts, record = _time_grid(params.t / params.m, t_list)
    verts, normals, offsets = _edge_data(D)
    convex = is_convex(D)
    bridge = params.bridge_correction and alpha == 2.0
    n_chunks = -(-params.n // CHUNK_SIZE)

    def chunk(c):
        size = min(CHUNK_SIZE, params.n - c * CHUNK_SIZE)
        w = _kernels.simulate_chunk(
            chunk_generator(params.seed, c), size, float(x0[0]), float(x0[1]), dts, record,
            alpha, verts, normals, offsets, convex, bridge,
        )
        return w.sum(axis=0), w.T @ w

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, range(n_chunks)))
    else:
        parts = [chunk(c) for c in range(n_chunks)]
    total = np.zeros(len(t_list))
    gram = np.zeros((len(t_list), len(t_list)))
    for s, g in parts:
        total += s
        gram += g
    return total / params.n, gram / params.n, bridge


def _validated_horizons(t_list) -> np.ndarray:
    t_arr = np.asarray(t_list, dtype=float).reshape(-1)
    if t_arr.size == 0:
        raise ValueError("t_list must not be empty")
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr <= 0):
        raise ValueError("horizons must be positive")
    if np.any(np.diff(t_arr) < 0):
        raise ValueError("t_list must be sorted ascending")
    return t_arr


def _curve_moments(D, x0, alpha, params, t_list, workers):
    D = as_polygon(D)
    alpha = check_alpha(alpha)
    t_arr = _validated_horizons(t_list)
    x0 = np.asarray(x0, dtype=float).reshape(2)
    if not contains(D, x0):
        h = len(t_arr)
        return t_arr, np.zeros(h), np.zeros((h, h)), params.bridge_correction and alpha == 2.0, alpha
    mean, second, bridge = _run(D, x0, alpha, params, t_arr, workers)
    return t_arr, mean, second, bridge, alpha


def _std_errs(mean, second, n, bridge):
    if bridge:
        var = np.maximum(np.diag(second) - mean**2, 0.0) * n / max(n - 1, 1)
    else:
        var = mean * (1.0 - mean)
    return np.sqrt(np.maximum(var, 0.0) / n)


def estimate_exit_curve(
    D: Polygon,
    x0,
    alpha: float,
    params: SimParams,
    t_list: Sequence[float],
    workers: int | None = None,
) -> list[ExitEstimate]:
    """Survival probabilities ``P_x0(tau_D > t)`` at every horizon in ``t_list``.

    One set of paths serves all horizons, so the curve is exactly
    non-increasing. The time grid is ``{j t/m}`` (with ``t = params.t``)
    merged with ``t_list``; ``m`` in each returned estimate counts the grid
    steps up to that horizon.
    """
    t_arr, mean, second, bridge, alpha = _curve_moments(D, x0, alpha, params, t_list, workers)
    se = _std_errs(mean, second, params.n, bridge)
    steps = _time_grid(params.t / params.m, t_arr)[1] + 1
    return [
        ExitEstimate(
            p_hat=float(min(max(p, 0.0), 1.0)), std_err=float(s), n=params.n, m=int(k),
            t=float(t), alpha=alpha, seed=params.seed, bridge=bridge,
        )
        for p, s, k, t in zip(mean, se, steps, t_arr)
    ]


def estimate_exit_probability(
    D: Polygon, x0, alpha: float, params: SimParams, workers: int | None = None
) -> ExitEstimate:
    """Skeleton estimate of ``P_x0(tau_D > params.t)`` with ``params.m`` steps.

    Returns exactly 0 with zero standard error when ``x0`` is outside ``D``.
    """
    return estimate_exit_curve(D, x0, alpha, params, [params.t], workers)[0]


def estimate_eigenvalue(
    D: Polygon,
    x0,
    alpha: float,
    params: SimParams,
    t1: float,
    t2: float,
    workers: int | None = None,
) -> EigenvalueEstimate:
    """Principal Dirichlet eigenvalue from the decay of the survival tail,
    ``-(log p(t2) - log p(t1)) / (t2 - t1)``.

    Both horizons use the same paths; the standard error accounts for their
    correlation. Raises :class:`InsufficientSamplesError` unless both
    estimates exceed ten standard errors.
    """
    if not (0 < t1 < t2):
        raise ValueError(f"need 0 < t1 < t2, got t1={t1!r}, t2={t2!r}")
    t_arr, mean, second, bridge, alpha = _curve_moments(D, x0, alpha, params, [t1, t2], workers)
    se = _std_errs(mean, second, params.n, bridge)
    for p, s, t in zip(mean, se, t_arr):
        if p <= 0 or p <= 10 * s:
            raise InsufficientSamplesError(
                f"survival estimate {p:.3g} at t={t:g} is within 10 standard errors of 0"
            )
    p1, p2 = mean
    n = params.n
    cov = second - np.outer(mean, mean)
    var_log = (cov[0, 0] / p1**2 + cov[1, 1] / p2**2 - 2 * cov[0, 1] / (p1 * p2)) / n
    value = -(math.log(p2) - math.log(p1)) / (t2 - t1)
    std_err = math.sqrt(max(var_log, 0.0)) / (t2 - t1)
    steps = _time_grid(params.t / params.m, t_arr)[1] + 1
    ests = [
        ExitEstimate(float(p), float(s), n, int(k), float(t), alpha, params.seed, bridge)
        for p, s, k, t in zip(mean, se, steps, t_arr)
    ]
    return EigenvalueEstimate(value, std_err, float(t1), float(t2), ests[0], ests[1])


# -- exact oracles -----------------------------------------------------------


def _phi(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _interval_images(y: float, length: float, t: float, n_images: int = 6) -> float:
    s = math.sqrt(t)
    total = 0.0
    for k in range(-n_images, n_images + 1):
        shift = 2 * k * length
        total += (
            _phi((length - y + shift) / s)
            - _phi((-y + shift) / s)
            - _phi((length + y + shift) / s)
            + _phi((y + shift) / s)
        )
    return total


def _interval_eigen(y: float, length: float, t: float, n_terms: int | None) -> float:
    rate = math.pi**2 * t / (2 * length**2)
    total = 0.0
    k = 1
    count = 0
    while True:
        coef = 4.0 / (k * math.pi)
        decay = math.exp(-k * k * rate)
        if n_terms is None and coef * decay < 1e-13:
            break
        total += coef * math.sin(k * math.pi * y / length) * decay
        count += 1
        if n_terms is not None and count >= n_terms:
            break
        k += 2
    return total


def interval_survival_series(a: float, x: float, t: float, n_terms: int | None = None) -> float:
    """Probability that 1-D Brownian motion (variance ``t``) from ``x`` stays in
    ``(-a, a)`` up to time ``t``.

    Uses the sine-series expansion, truncated once the first omitted term is
    below 1e-12 or after ``n_terms`` terms. For short times and automatic
    truncation the method-of-images series is used instead, which converges
    there in a handful of terms.
    """
    if not (a > 0):
        raise ValueError("half-width must be positive")
    if t < 0:
        raise ValueError("time must be non-negative")
    if abs(x) >= a:
        return 0.0
    if t == 0:
        return 1.0
    y, length = x + a, 2.0 * a
    if n_terms is None and t < 0.05 * length**2:
        value = _interval_images(y, length, t)
    else:
        value = _interval_eigen(y, length, t, n_terms)
    return min(max(value, 0.0), 1.0)


def rectangle_survival_exact(L1: float, L2: float, x0, t: float) -> float:
    """Brownian survival probability in the ``L1 x L2`` rectangle centred at 0."""
    x, y = np.asarray(x0, dtype=float).reshape(2)
    return interval_survival_series(L1 / 2, x, t) * interval_survival_series(L2 / 2, y, t)


def rectangle_eigenvalue(L1: float, L2: float) -> float:
    """Principal Dirichlet eigenvalue of minus one half the Laplacian on an ``L1 x L2`` rectangle."""
    return 0.5 * math.pi**2 * (1.0 / L1**2 + 1.0 / L2**2)


def equilateral_eigenvalue(area_: float) -> float:
    """Principal Dirichlet eigenvalue of minus one half the Laplacian on an
    equilateral triangle of the given area."""
    return 2.0 * math.pi**2 / (math.sqrt(3.0) * area_)


__all__ = [
    "CHUNK_SIZE",
    "DEFAULT_SEED",
    "EigenvalueEstimate",
    "ExitEstimate",
    "InsufficientSamplesError",
    "SimParams",
    "check_alpha",
    "equilateral_eigenvalue",
    "estimate_eigenvalue",
    "estimate_exit_curve",
    "estimate_exit_probability",
    "gaussian_step",
    "interval_survival_series",
    "rectangle_eigenvalue",
    "rectangle_survival_exact",
    "stable_step",
    "stable_subordinator_step",
]
