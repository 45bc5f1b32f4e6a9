"""3x3 helpers for the magnetic rotation subflow.

``skew(B)`` is the matrix with ``skew(B) @ v == np.cross(v, B)``, so the
linear subflow dv/dt = skew(B) v is a rigid rotation of the velocity and its
exact flow is ``exp(t skew(B))``.  ``rotate`` evaluates that exponential in
closed form (Rodrigues) without forming any matrix.
"""
from math import cos, sin, sqrt

import numpy as np

from ._jit import njit

SMALL_ANGLE = 1e-8


def skew(b):
    b1, b2, b3 = np.asarray(b, dtype=np.float64)
    return np.array([[0.0, b3, -b2],
                     [-b3, 0.0, b1],
                     [b2, -b1, 0.0]])


@njit
def rotate(b0, b1, b2, t, v0, v1, v2):
    """exp(t skew(b)) v on scalar components.

    With K = skew(b) and a = |b|, K^3 = -a^2 K, hence
    exp(tK) = I + sin(ta)/a K + (1 - cos(ta))/a^2 K^2.
    """
    a2 = b0 * b0 + b1 * b1 + b2 * b2
    a = sqrt(a2)
    th = t * a
    if abs(th) < SMALL_ANGLE:
        th2 = th * th
        c1 = t * (1.0 - th2 / 6.0)
        c2 = 0.5 * t * t * (1.0 - th2 / 12.0)
    else:
        c1 = sin(th) / a
        s = sin(0.5 * th)
        c2 = 2.0 * s * s / a2
    # K v = v x b, K^2 v = (v x b) x b
    k0 = v1 * b2 - v2 * b1
    k1 = v2 * b0 - v0 * b2
    k2 = v0 * b1 - v1 * b0
    kk0 = k1 * b2 - k2 * b1
    kk1 = k2 * b0 - k0 * b2
    kk2 = k0 * b1 - k1 * b0
    return v0 + c1 * k0 + c2 * kk0, v1 + c1 * k1 + c2 * kk1, v2 + c1 * k2 + c2 * kk2


def rot_exp_apply(b, t, v):
    """Return ``exp(t * skew(b)) @ v`` for 3-vectors ``b`` and ``v``."""
    b = np.asarray(b, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return np.array(rotate(b[0], b[1], b[2], float(t), v[0], v[1], v[2]))
