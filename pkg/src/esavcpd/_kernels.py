"""Compiled one-step maps and the fixed-step trajectory loop.

Every kernel works on scalar components and returns a status code first
(see ``fields.OK`` and friends) instead of raising, so a failing step inside
the trajectory loop can hand back the partial trajectory.
"""
from math import exp, inf, sqrt

import numpy as np

from ._jit import njit
from .fields import DOMAIN, NONFINITE, OK, OVERFLOW, eval_b, eval_ue
from .linalg3 import rotate

S1_ESAV = 0
S2_ESAV = 1
S1_MESAV = 2
S2_MESAV = 3
S1_SAV = 4


@njit
def nl_flow(kind, p, x0, x1, x2, v0, v1, v2, log_r, h, c):
    """Explicit propagator of the electric/auxiliary subflow.

    ``c`` is 1 for the plain exponential variable and the MESAV constant C
    otherwise.  The force uses r~/exp(U/c) = exp(log_r - U/c) - (h/2) v.E/c,
    so r itself never has to be materialized.  The last returned value is
    that ratio; it is negative exactly when r~ is.
    """
    hh = 0.5 * h
    m0 = x0 + hh * v0
    m1 = x1 + hh * v1
    m2 = x2 + hh * v2
    status, u, e0, e1, e2 = eval_ue(kind, p, m0, m1, m2)
    if status != OK:
        return status, x0, x1, x2, v0, v1, v2, log_r, 0.0
    ic = 1.0 / c
    w = exp(log_r - u * ic)
    if not w < inf:
        return OVERFLOW, x0, x1, x2, v0, v1, v2, log_r, 0.0
    ratio = w - hh * (v0 * e0 + v1 * e1 + v2 * e2) * ic
    f0 = e0 * ratio
    f1 = e1 * ratio
    f2 = e2 * ratio
    d0 = h * v0 + hh * h * f0
    d1 = h * v1 + hh * h * f1
    d2 = h * v2 + hh * h * f2
    lr = log_r - (d0 * f0 + d1 * f1 + d2 * f2) * ic
    return OK, x0 + d0, x1 + d1, x2 + d2, v0 + h * f0, v1 + h * f1, v2 + h * f2, lr, ratio


@njit
def esav_step(kind, p, order, x0, x1, x2, v0, v1, v2, log_r, h, c):
    """Lie (order 1) or Strang (order 2) composition of rotation and ``nl_flow``."""
    b0, b1, b2 = eval_b(kind, p, x0, x1, x2)
    t = h if order == 1 else 0.5 * h
    w0, w1, w2 = rotate(b0, b1, b2, t, v0, v1, v2)
    status, y0, y1, y2, u0, u1, u2, lr, ratio = nl_flow(kind, p, x0, x1, x2, w0, w1, w2, log_r, h, c)
    if status != OK or order == 1:
        return status, y0, y1, y2, u0, u1, u2, lr, ratio
    b0, b1, b2 = eval_b(kind, p, y0, y1, y2)
    u0, u1, u2 = rotate(b0, b1, b2, 0.5 * h, u0, u1, u2)
    return status, y0, y1, y2, u0, u1, u2, lr, ratio


@njit
def sav_step(kind, p, x0, x1, x2, v0, v1, v2, s, h, c0):
    """First-order linearly implicit SAV step, coupling eliminated in closed form.

    With a = E(x^)/(2 sqrt(U(x^) + c0)) and w the rotated velocity, the
    midpoint value s_half = (s_new + s)/2 solves
    s_half (2 + h^2 |a|^2) = 2 s - h w.a.
    """
    b0, b1, b2 = eval_b(kind, p, x0, x1, x2)
    w0, w1, w2 = rotate(b0, b1, b2, h, v0, v1, v2)
    hh = 0.5 * h
    status, u, e0, e1, e2 = eval_ue(kind, p, x0 + hh * w0, x1 + hh * w1, x2 + hh * w2)
    if status != OK:
        return status, x0, x1, x2, v0, v1, v2, s, 0.0
    q = u + c0
    if not q > 0.0:
        return DOMAIN, x0, x1, x2, v0, v1, v2, s, 0.0
    isq = 1.0 / sqrt(q)
    a0 = 0.5 * e0 * isq
    a1 = 0.5 * e1 * isq
    a2 = 0.5 * e2 * isq
    s_half = (2.0 * s - h * (w0 * a0 + w1 * a1 + w2 * a2)) / (2.0 + h * h * (a0 * a0 + a1 * a1 + a2 * a2))
    g = s_half * isq
    f0 = e0 * g
    f1 = e1 * g
    f2 = e2 * g
    d0 = h * w0 + hh * h * f0
    d1 = h * w1 + hh * h * f1
    d2 = h * w2 + hh * h * f2
    s_new = s - (d0 * a0 + d1 * a1 + d2 * a2)
    return OK, x0 + d0, x1 + d1, x2 + d2, w0 + h * f0, w1 + h * f1, w2 + h * f2, s_new, s_half


@njit
def step(scheme, kind, p, x0, x1, x2, v0, v1, v2, aux, h, c):
    """Dispatch one step; ``c`` is C for MESAV, C0 for SAV and 1 otherwise."""
    if scheme == S1_SAV:
        return sav_step(kind, p, x0, x1, x2, v0, v1, v2, aux, h, c)
    order = 1 if scheme == S1_ESAV or scheme == S1_MESAV else 2
    return esav_step(kind, p, order, x0, x1, x2, v0, v1, v2, aux, h, c)


@njit
def integrate(scheme, kind, p, x, v, aux, h, n, c):
    """Advance ``n`` fixed steps from ``(x, v, aux)``.

    Returns ``(status, n_done, n_negative, xs, vs, auxs)``; rows past
    ``n_done`` are unset when ``status != OK``.  ``n_negative`` counts steps
    whose midpoint auxiliary estimate went negative (ESAV family only).
    """
    xs = np.empty((n + 1, 3))
    vs = np.empty((n + 1, 3))
    auxs = np.empty(n + 1)
    x0, x1, x2 = x[0], x[1], x[2]
    v0, v1, v2 = v[0], v[1], v[2]
    xs[0, 0], xs[0, 1], xs[0, 2] = x0, x1, x2
    vs[0, 0], vs[0, 1], vs[0, 2] = v0, v1, v2
    auxs[0] = aux
    n_negative = 0
    for i in range(n):
        status, x0, x1, x2, v0, v1, v2, aux, ratio = step(scheme, kind, p, x0, x1, x2, v0, v1, v2, aux, h, c)
        if status != OK:
            return status, i, n_negative, xs, vs, auxs
        total = x0 + x1 + x2 + v0 + v1 + v2 + aux
        if not abs(total) < inf:
            return NONFINITE, i, n_negative, xs, vs, auxs
        if scheme != S1_SAV and ratio < 0.0:
            n_negative += 1
        xs[i + 1, 0], xs[i + 1, 1], xs[i + 1, 2] = x0, x1, x2
        vs[i + 1, 0], vs[i + 1, 1], vs[i + 1, 2] = v0, v1, v2
        auxs[i + 1] = aux
    return OK, n, n_negative, xs, vs, auxs
