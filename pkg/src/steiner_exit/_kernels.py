"""Compiled path kernels.

Every step draws the same amount of randomness whether or not the path is
still alive, so two domains simulated with one seed see identical increments.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def subordinator_draw(rng, scale, beta):
    """One-sided stable increment with E exp(-l S) = exp(-dt l^beta), 0 < beta < 1,
    given ``scale = dt ** (1 / beta)``.

    Kanter's representation, evaluated in logs to keep small indices finite.
    """
    u = math.pi * rng.random()
    while u == 0.0:
        u = math.pi * rng.random()
    e = rng.standard_exponential()
    log_s = (
        math.log(math.sin(beta * u))
        - math.log(math.sin(u)) / beta
        + (1.0 - beta) / beta * (math.log(math.sin((1.0 - beta) * u)) - math.log(e))
    )
    return scale * math.exp(log_s)


@njit(cache=True, nogil=True, inline="always")
def increment_draw(rng, scale, alpha):
    """Planar increment over a step ``dt`` with ``scale = dt ** (2 / alpha)``:
    Brownian (variance dt) at alpha = 2, subordinated B_{2 sigma} otherwise."""
    if alpha < 2.0:
        var = 2.0 * subordinator_draw(rng, scale, 0.5 * alpha)
    else:
        var = scale
    s = math.sqrt(var)
    return s * rng.standard_normal(), s * rng.standard_normal()


@njit(cache=True, nogil=True)
def subordinator_many(rng, dt, beta, size):
    out = np.empty(size)
    scale = dt ** (1.0 / beta)
    for i in range(size):
        out[i] = subordinator_draw(rng, scale, beta)
    return out


@njit(cache=True, nogil=True)
def increment_many(rng, dt, alpha, size):
    out = np.empty((size, 2))
    scale = dt ** (2.0 / alpha)
    for i in range(size):
        dx, dy = increment_draw(rng, scale, alpha)
        out[i, 0] = dx
        out[i, 1] = dy
    return out


@njit(cache=True, nogil=True, inline="always")
def _inside_convex(x, y, normals, offsets):
    for e in range(normals.shape[0]):
        if normals[e, 0] * x + normals[e, 1] * y < offsets[e]:
            return False
    return True


@njit(cache=True, nogil=True, inline="always")
def _inside_general(x, y, verts):
    # crossing number; boundary points have probability zero
    inside = False
    k = verts.shape[0]
    j = k - 1
    for i in range(k):
        yi = verts[i, 1]
        yj = verts[j, 1]
        if (yi > y) != (yj > y):
            xc = verts[i, 0] + (y - yi) * (verts[j, 0] - verts[i, 0]) / (yj - yi)
            if x < xc:
                inside = not inside
        j = i
    return inside


@njit(cache=True, nogil=True)
def _death_steps_convex(rng, n, x0, y0, scales, alpha, normals, offsets):
    steps = scales.shape[0]
    death = np.full(n, steps, dtype=np.int64)
    for i in range(n):
        x = x0
        y = y0
        alive = True
        for k in range(steps):
            dx, dy = increment_draw(rng, scales[k], alpha)
            if alive:
                x += dx
                y += dy
                if not _inside_convex(x, y, normals, offsets):
                    alive = False
                    death[i] = k
    return death


@njit(cache=True, nogil=True)
def _death_steps_general(rng, n, x0, y0, scales, alpha, verts):
    steps = scales.shape[0]
    death = np.full(n, steps, dtype=np.int64)
    for i in range(n):
        x = x0
        y = y0
        alive = True
        for k in range(steps):
            dx, dy = increment_draw(rng, scales[k], alpha)
            if alive:
                x += dx
                y += dy
                if not _inside_general(x, y, verts):
                    alive = False
                    death[i] = k
    return death


@njit(cache=True, nogil=True)
def _bridge_weights(rng, n, x0, y0, dts, record, verts, normals, offsets, convex):
    steps = dts.shape[0]
    horizons = record.shape[0]
    k_edges = verts.shape[0]
    out = np.zeros((n, horizons))
    for i in range(n):
        x = x0
        y = y0
        w = 1.0
        h = 0
        for k in range(steps):
            dt = dts[k]
            dx, dy = increment_draw(rng, dt, 2.0)
            if w > 0.0:
                nx = x + dx
                ny = y + dy
                if convex:
                    ok = _inside_convex(nx, ny, normals, offsets)
                else:
                    ok = _inside_general(nx, ny, verts)
                if not ok:
                    w = 0.0
                else:
                    for e in range(k_edges):
                        d0 = normals[e, 0] * x + normals[e, 1] * y - offsets[e]
                        d1 = normals[e, 0] * nx + normals[e, 1] * ny - offsets[e]
                        if d0 > 0.0 and d1 > 0.0:
                            a = 2.0 * d0 * d1 / dt
                            # crossing probability below 3e-16
                            if a < 36.0:
                                w *= max(0.0, 1.0 - math.exp(-a))
                x = nx
                y = ny
            while h < horizons and record[h] == k:
                out[i, h] = w
                h += 1
    return out


def simulate_chunk(rng, n, x0, y0, dts, record, alpha, verts, normals, offsets, convex, bridge):
    """Survival weights of ``n`` paths at grid indices ``record``.

    ``dts[k]`` is the length of step k; ``record`` lists, in increasing
    order, the step indices after which a column of weights is stored.
    Returns an ``(n, len(record))`` array. Without ``bridge`` the weights
    are 0/1 skeleton survival indicators; with it (Brownian case only) each
    step that stays inside also multiplies in the no-crossing probability of
    the Brownian bridge for every edge's supporting line on which both
    endpoints lie strictly inside.
    """
    if bridge:
        return _bridge_weights(rng, n, x0, y0, dts, record, verts, normals, offsets, convex)
    scales = dts ** (2.0 / alpha)
    if convex:
        death = _death_steps_convex(rng, n, x0, y0, scales, alpha, normals, offsets)
    else:
        death = _death_steps_general(rng, n, x0, y0, scales, alpha, verts)
    return (death[:, None] > record[None, :]).astype(np.float64)
