"""Inner stepping kernels.

``advance`` integrates every ball with constant rolling deceleration on the
fixed time grid until something needs the Python side: a boundary crossing,
a disk footprint entry, a ball-ball contact, a capture, rest, or timeout.
On an interaction the state is moved to the contact point and the consumed
fraction of the current step is returned so integration resumes on-grid.

Two implementations share one contract:

* ``advance_numba`` - the loop below compiled with ``numba.njit``;
* ``advance_numpy`` - a per-step vectorised numpy version.

Set ``PUTTLOOP_NO_NUMBA=1`` (or uninstall numba) to select the fallback.
``nogil``/``fastmath`` stay off: results must be reproducible bit for bit.
"""
from __future__ import annotations

import math
import os

import numpy as np

REST, TIMEOUT, SEGMENT, CIRCLE, BALL, CAPTURE = 0, 1, 2, 3, 4, 5

# hits closer than this to the current position are the one just handled
MIN_TRAVEL = 1e-9


def _advance_impl(pos, vel, segs, circles, caps, scoring, radius, a_roll, dt, rest_speed, k, frac, k_max, samples):
    n = pos.shape[0]
    disp = np.zeros((n, 2))
    s0 = np.zeros(n)
    snew = np.zeros(n)
    stepd = np.zeros(n)
    ux = np.zeros(n)
    uy = np.zeros(n)
    contact2 = 4.0 * radius * radius
    while True:
        h = (1.0 - frac) * dt
        moving = 0
        for i in range(n):
            s = math.sqrt(vel[i, 0] * vel[i, 0] + vel[i, 1] * vel[i, 1])
            s0[i] = s
            if s > 0.0:
                moving += 1
                ux[i] = vel[i, 0] / s
                uy[i] = vel[i, 1] / s
                if s <= a_roll * h:
                    d = s * s / (2.0 * a_roll)
                    snew[i] = 0.0
                else:
                    d = s * h - 0.5 * a_roll * h * h
                    snew[i] = s - a_roll * h
                stepd[i] = d
                disp[i, 0] = ux[i] * d
                disp[i, 1] = uy[i] * d
            else:
                ux[i] = 0.0
                uy[i] = 0.0
                snew[i] = 0.0
                stepd[i] = 0.0
                disp[i, 0] = 0.0
                disp[i, 1] = 0.0
        if moving == 0:
            return REST, -1, -1, k, frac

        best = 2.0
        code = -1
        bi = -1
        bj = -1
        for i in range(n):
            if stepd[i] <= 0.0:
                continue
            px = pos[i, 0]
            py = pos[i, 1]
            dx = disp[i, 0]
            dy = disp[i, 1]
            for m in range(segs.shape[0]):
                ex = segs[m, 2] - segs[m, 0]
                ey = segs[m, 3] - segs[m, 1]
                denom = dx * ey - dy * ex
                if denom == 0.0:
                    continue
                wx = segs[m, 0] - px
                wy = segs[m, 1] - py
                u = (wx * ey - wy * ex) / denom
                v = (wx * dy - wy * dx) / denom
                if v < -1e-12 or v > 1.0 + 1e-12:
                    continue
                if u > 1.0 or u * stepd[i] <= MIN_TRAVEL:
                    continue
                if u < best:
                    best = u
                    code = SEGMENT
                    bi = i
                    bj = m
            for c in range(circles.shape[0]):
                fx = px - circles[c, 0]
                fy = py - circles[c, 1]
                C = fx * fx + fy * fy - circles[c, 2] * circles[c, 2]
                if C <= 0.0:
                    continue
                A = dx * dx + dy * dy
                B = 2.0 * (fx * dx + fy * dy)
                disc = B * B - 4.0 * A * C
                if disc < 0.0:
                    continue
                u = (-B - math.sqrt(disc)) / (2.0 * A)
                if u > 1.0 or u * stepd[i] <= MIN_TRAVEL:
                    continue
                if u < best:
                    best = u
                    code = CIRCLE
                    bi = i
                    bj = c
        for i in range(n):
            for j in range(i + 1, n):
                if stepd[i] <= 0.0 and stepd[j] <= 0.0:
                    continue
                d0x = pos[i, 0] - pos[j, 0]
                d0y = pos[i, 1] - pos[j, 1]
                C = d0x * d0x + d0y * d0y - contact2
                if C < 0.0:
                    continue
                ddx = disp[i, 0] - disp[j, 0]
                ddy = disp[i, 1] - disp[j, 1]
                B = 2.0 * (d0x * ddx + d0y * ddy)
                if B >= 0.0:
                    continue
                A = ddx * ddx + ddy * ddy
                disc = B * B - 4.0 * A * C
                if disc < 0.0:
                    continue
                u = (-B - math.sqrt(disc)) / (2.0 * A)
                if u < 0.0 or u > 1.0:
                    continue
                if u < best:
                    best = u
                    code = BALL
                    bi = i
                    bj = j

        if code >= 0:
            for i in range(n):
                if stepd[i] <= 0.0:
                    continue
                pos[i, 0] += best * disp[i, 0]
                pos[i, 1] += best * disp[i, 1]
                rem = s0[i] * s0[i] - 2.0 * a_roll * best * stepd[i]
                s = math.sqrt(rem) if rem > 0.0 else 0.0
                vel[i, 0] = ux[i] * s
                vel[i, 1] = uy[i] * s
            return code, bi, bj, k, frac + best * (1.0 - frac)

        stopped = 0
        for i in range(n):
            pos[i, 0] += disp[i, 0]
            pos[i, 1] += disp[i, 1]
            s = snew[i]
            if s < rest_speed:
                s = 0.0
                stopped += 1
            vel[i, 0] = ux[i] * s
            vel[i, 1] = uy[i] * s
        k += 1
        frac = 0.0
        for i in range(n):
            samples[k, i, 0] = pos[i, 0]
            samples[k, i, 1] = pos[i, 1]
        sp = math.sqrt(vel[scoring, 0] ** 2 + vel[scoring, 1] ** 2)
        for e in range(caps.shape[0]):
            fx = pos[scoring, 0] - caps[e, 0]
            fy = pos[scoring, 1] - caps[e, 1]
            if fx * fx + fy * fy <= caps[e, 2] * caps[e, 2] and sp <= caps[e, 3]:
                return CAPTURE, scoring, e, k, frac
        if stopped == n:
            return REST, -1, -1, k, frac
        if k >= k_max:
            return TIMEOUT, -1, -1, k, frac


def _step_geometry(vel, a_roll, h):
    s0 = np.sqrt(vel[:, 0] * vel[:, 0] + vel[:, 1] * vel[:, 1])  # not hypot: must match the compiled kernel bit for bit
    moving = s0 > 0.0
    safe = np.where(moving, s0, 1.0)
    u = np.where(moving[:, None], vel / safe[:, None], 0.0)
    short = s0 <= a_roll * h
    d = np.where(short, s0 * s0 / (2.0 * a_roll), s0 * h - 0.5 * a_roll * h * h)
    d = np.where(moving, d, 0.0)
    snew = np.where(short | ~moving, 0.0, s0 - a_roll * h)
    return s0, u, d, snew


def advance_numpy(pos, vel, segs, circles, caps, scoring, radius, a_roll, dt, rest_speed, k, frac, k_max, samples):
    n = pos.shape[0]
    contact2 = 4.0 * radius * radius
    sa, sb = segs[:, 0:2], segs[:, 2:4]
    e = sb - sa
    while True:
        h = (1.0 - frac) * dt
        s0, u, stepd, snew = _step_geometry(vel, a_roll, h)
        if not np.any(stepd > 0.0):
            return REST, -1, -1, k, frac
        disp = u * stepd[:, None]
        best, code, bi, bj = 2.0, -1, -1, -1
        for i in range(n):
            if stepd[i] <= 0.0:
                continue
            dx, dy = disp[i]
            if len(segs):
                denom = dx * e[:, 1] - dy * e[:, 0]
                w = sa - pos[i]
                with np.errstate(divide="ignore", invalid="ignore"):
                    uu = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / denom
                    vv = (w[:, 0] * dy - w[:, 1] * dx) / denom
                ok = (denom != 0.0) & (vv >= -1e-12) & (vv <= 1.0 + 1e-12) & (uu <= 1.0) & (uu * stepd[i] > MIN_TRAVEL)
                if ok.any():
                    m = int(np.argmin(np.where(ok, uu, np.inf)))
                    if uu[m] < best:
                        best, code, bi, bj = float(uu[m]), SEGMENT, i, m
            if len(circles):
                f = pos[i] - circles[:, 0:2]
                C = f[:, 0] * f[:, 0] + f[:, 1] * f[:, 1] - circles[:, 2] * circles[:, 2]
                A = dx * dx + dy * dy
                B = 2.0 * (f[:, 0] * dx + f[:, 1] * dy)
                disc = B * B - 4.0 * A * C
                with np.errstate(invalid="ignore"):
                    uu = (-B - np.sqrt(disc)) / (2.0 * A)
                ok = (C > 0.0) & (disc >= 0.0) & (uu <= 1.0) & (uu * stepd[i] > MIN_TRAVEL)
                if ok.any():
                    c = int(np.argmin(np.where(ok, uu, np.inf)))
                    if uu[c] < best:
                        best, code, bi, bj = float(uu[c]), CIRCLE, i, c
        for i in range(n):
            for j in range(i + 1, n):
                if stepd[i] <= 0.0 and stepd[j] <= 0.0:
                    continue
                d0 = pos[i] - pos[j]
                C = d0[0] * d0[0] + d0[1] * d0[1] - contact2
                if C < 0.0:
                    continue
                dd = disp[i] - disp[j]
                B = 2.0 * (d0[0] * dd[0] + d0[1] * dd[1])
                if B >= 0.0:
                    continue
                A = dd[0] * dd[0] + dd[1] * dd[1]
                disc = B * B - 4.0 * A * C
                if disc < 0.0:
                    continue
                uu = (-B - math.sqrt(disc)) / (2.0 * A)
                if 0.0 <= uu <= 1.0 and uu < best:
                    best, code, bi, bj = uu, BALL, i, j
        if code >= 0:
            mv = stepd > 0.0
            pos[mv] += best * disp[mv]
            rem = s0 * s0 - 2.0 * a_roll * best * stepd
            s = np.sqrt(np.maximum(rem, 0.0))
            vel[mv] = u[mv] * s[mv, None]
            return code, bi, bj, k, frac + best * (1.0 - frac)

        pos += disp
        s = np.where(snew < rest_speed, 0.0, snew)
        vel[:] = u * s[:, None]
        k += 1
        frac = 0.0
        samples[k] = pos
        sp = math.sqrt(vel[scoring, 0] ** 2 + vel[scoring, 1] ** 2)
        for c in range(caps.shape[0]):
            fx = pos[scoring, 0] - caps[c, 0]
            fy = pos[scoring, 1] - caps[c, 1]
            if fx * fx + fy * fy <= caps[c, 2] * caps[c, 2] and sp <= caps[c, 3]:
                return CAPTURE, scoring, c, k, frac
        if not np.any(s > 0.0):
            return REST, -1, -1, k, frac
        if k >= k_max:
            return TIMEOUT, -1, -1, k, frac


def _want_numba() -> bool:
    return os.environ.get("PUTTLOOP_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes", "on")


try:
    from numba import njit

    advance_numba = njit(cache=True)(_advance_impl)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    advance_numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _want_numba()
advance = advance_numba if USE_NUMBA else advance_numpy


def nearest_index_numpy(actions: np.ndarray, v: float, theta: float, theta_scale: float) -> int:
    d2 = (actions[:, 0] - v) ** 2 + ((actions[:, 1] - theta) / theta_scale) ** 2
    return int(np.argmin(d2))


def _nearest_impl(actions, v, theta, theta_scale):
    best = 0
    bd = np.inf
    for i in range(actions.shape[0]):
        dv = actions[i, 0] - v
        dt = (actions[i, 1] - theta) / theta_scale
        d2 = dv * dv + dt * dt
        if d2 < bd:
            bd = d2
            best = i
    return best


if HAVE_NUMBA:
    nearest_index_numba = njit(cache=True)(_nearest_impl)
else:  # pragma: no cover
    nearest_index_numba = None
nearest_index = nearest_index_numba if USE_NUMBA else nearest_index_numpy
