"""Compiled fixed-step RK4 loops for the replicator and Lotka-Volterra fields.

Both kernels release the GIL so callers can fan out over threads. Status
codes: ``>= 0`` index of the sink reached, ``-1`` ran to the step limit,
``-2`` non-finite or diverging state, ``-3`` share dropped below the
projection tolerance.
"""

import numpy as np
from numba import njit

NEG_TOL = 1e-12
LV_BLOWUP = 1e150

RUNNING = -1
NONFINITE = -2
LEFT_SIMPLEX = -3


@njit(cache=True, nogil=True)
def replicator_field(B, x0, x1, x2):
    p0 = B[0, 0] * x0 + B[0, 1] * x1 + B[0, 2] * x2
    p1 = B[1, 0] * x0 + B[1, 1] * x1 + B[1, 2] * x2
    p2 = B[2, 0] * x0 + B[2, 1] * x1 + B[2, 2] * x2
    mean = x0 * p0 + x1 * p1 + x2 * p2
    return x0 * (p0 - mean), x1 * (p1 - mean), x2 * (p2 - mean)


@njit(cache=True, nogil=True)
def run_replicator(B, x_init, h, n_steps, stride, eps_conv, sinks, buf, record):
    """Integrate from ``x_init`` for at most ``n_steps`` steps.

    Returns ``(n_recorded, steps_done, status, x_final, min_pre, max_sum_dev)``
    where ``min_pre`` and ``max_sum_dev`` are measured before projection.
    Recorded rows of ``buf`` are ``(step, x1, x2, x3)``.
    """
    x0 = x_init[0]
    x1 = x_init[1]
    x2 = x_init[2]
    n_sinks = sinks.shape[0]
    n_rec = 0
    if record:
        buf[0, 0] = 0.0
        buf[0, 1] = x0
        buf[0, 2] = x1
        buf[0, 3] = x2
        n_rec = 1
    min_pre = min(x0, min(x1, x2))
    max_dev = abs(x0 + x1 + x2 - 1.0)
    status = RUNNING
    near = -1
    streak = 0
    step = 0
    hh = 0.5 * h
    while step < n_steps:
        k10, k11, k12 = replicator_field(B, x0, x1, x2)
        k20, k21, k22 = replicator_field(B, x0 + hh * k10, x1 + hh * k11, x2 + hh * k12)
        k30, k31, k32 = replicator_field(B, x0 + hh * k20, x1 + hh * k21, x2 + hh * k22)
        k40, k41, k42 = replicator_field(B, x0 + h * k30, x1 + h * k31, x2 + h * k32)
        y0 = x0 + h / 6.0 * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
        y1 = x1 + h / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        y2 = x2 + h / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        step += 1
        if not (np.isfinite(y0) and np.isfinite(y1) and np.isfinite(y2)):
            status = NONFINITE
            break
        lo = min(y0, min(y1, y2))
        if lo < min_pre:
            min_pre = lo
        dev = abs(y0 + y1 + y2 - 1.0)
        if dev > max_dev:
            max_dev = dev
        if lo < -NEG_TOL:
            x0, x1, x2 = y0, y1, y2
            status = LEFT_SIMPLEX
            break
        if y0 < 0.0:
            y0 = 0.0
        if y1 < 0.0:
            y1 = 0.0
        if y2 < 0.0:
            y2 = 0.0
        s = y0 + y1 + y2
        y0 = y0 / s
        y1 = y1 / s
        y2 = y2 / s
        # an exact fixed point of the step map never moves again
        frozen = y0 == x0 and y1 == x1 and y2 == x2
        x0 = y0
        x1 = y1
        x2 = y2

        hit = -1
        for k in range(n_sinks):
            d0 = x0 - sinks[k, 0]
            d1 = x1 - sinks[k, 1]
            d2 = x2 - sinks[k, 2]
            if np.sqrt(d0 * d0 + d1 * d1 + d2 * d2) < eps_conv:
                hit = k
                break
        if hit >= 0 and hit == near:
            streak += 1
        elif hit >= 0:
            near = hit
            streak = 1
        else:
            near = -1
            streak = 0
        done = streak >= stride or (frozen and near >= 0)
        if frozen and not done and not record:
            step = n_steps
            break

        if record and (step % stride == 0 or done or step == n_steps):
            buf[n_rec, 0] = step
            buf[n_rec, 1] = x0
            buf[n_rec, 2] = x1
            buf[n_rec, 3] = x2
            n_rec += 1
        if done:
            status = near
            break

    xf = np.empty(3)
    xf[0] = x0
    xf[1] = x1
    xf[2] = x2
    return n_rec, step, status, xf, min_pre, max_dev


@njit(cache=True, nogil=True)
def lv_field(a, b, d, e, f, X, Y, rescale):
    u = X * (a + b * X)
    v = Y * (d + e * X + f * Y)
    if rescale:
        w = 1.0 / (1.0 + X + Y)
        return u * w, v * w
    return u, v


@njit(cache=True, nogil=True)
def run_lv(a, b, d, e, f, X_init, Y_init, h, n_steps, stride, rescale, buf):
    """Integrate the planar Lotka-Volterra system, recording every ``stride`` steps.

    With ``rescale`` the field is divided by ``1 + X + Y`` so that LV time
    matches replicator time. Returns ``(n_recorded, steps_done, status)``.
    """
    X = X_init
    Y = Y_init
    buf[0, 0] = 0.0
    buf[0, 1] = X
    buf[0, 2] = Y
    n_rec = 1
    status = RUNNING
    step = 0
    hh = 0.5 * h
    while step < n_steps:
        k1x, k1y = lv_field(a, b, d, e, f, X, Y, rescale)
        k2x, k2y = lv_field(a, b, d, e, f, X + hh * k1x, Y + hh * k1y, rescale)
        k3x, k3y = lv_field(a, b, d, e, f, X + hh * k2x, Y + hh * k2y, rescale)
        k4x, k4y = lv_field(a, b, d, e, f, X + h * k3x, Y + h * k3y, rescale)
        nX = X + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        nY = Y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        step += 1
        if not (np.isfinite(nX) and np.isfinite(nY)) or abs(nX) > LV_BLOWUP or abs(nY) > LV_BLOWUP:
            status = NONFINITE
            break
        X = nX
        Y = nY
        if step % stride == 0 or step == n_steps:
            buf[n_rec, 0] = step
            buf[n_rec, 1] = X
            buf[n_rec, 2] = Y
            n_rec += 1
    return n_rec, step, status
