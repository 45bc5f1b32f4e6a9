"""Adaptive Dormand-Prince 5(4) reference solver for x' = v, v' = v x B(x) + E(x).

Used as the accuracy oracle for the convergence studies, so it integrates
the original (non-split, non-auxiliary) system directly.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .fields import eval_b, eval_ue, OK, DomainError
from .integrators import ParticleState

# standard 7-stage FSAL tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0
# PI controller memory exponent (Hairer & Wanner, DOPRI5)
BETA = 0.04


class StepSizeUnderflow(RuntimeError):
    pass


class MaxStepsExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class AdaptiveConfig:
    rtol: float = 1e-12
    atol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-14
    max_steps: int = 1_000_000
    # error per unit step: scale the local test by h / t_end so the global
    # error tracks the tolerance; False gives plain per-step control (ode45)
    per_unit_step: bool = True

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not 0 < self.h_min < self.h_init:
            raise ValueError("need 0 < h_min < h_init")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")

    def halved(self):
        return replace(self, rtol=self.rtol / 2, atol=self.atol / 2)


@dataclass
class ReferenceSolution:
    final: ParticleState
    t_end: float
    n_accepted: int
    n_rejected: int
    cfg: AdaptiveConfig
    # accepted mesh, used for Hermite dense output
    ts: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    fs: np.ndarray = field(repr=False)

    def __call__(self, t):
        """Cubic Hermite interpolation of the state vector (x, v) at time(s) ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if np.any(t < self.ts[0]) or np.any(t > self.ts[-1]):
            raise ValueError("dense output requested outside the integration interval")
        i = np.clip(np.searchsorted(self.ts, t, side="right") - 1, 0, len(self.ts) - 2)
        t0, t1 = self.ts[i], self.ts[i + 1]
        dt = (t1 - t0)[:, None]
        s = ((t - t0) / (t1 - t0))[:, None]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * self.ys[i] + h10 * dt * self.fs[i] + h01 * self.ys[i + 1] + h11 * dt * self.fs[i + 1]


def _rhs(model):
    kind, p = model.kind, model.array

    def f(y):
        status, u, e0, e1, e2 = eval_ue(kind, p, y[0], y[1], y[2])
        if status != OK:
            raise DomainError(f"{model.name} field is singular at x={y[:3].tolist()}")
        b0, b1, b2 = eval_b(kind, p, y[0], y[1], y[2])
        v0, v1, v2 = y[3], y[4], y[5]
        return np.array([v0, v1, v2, v1 * b2 - v2 * b1 + e0, v2 * b0 - v0 * b2 + e1, v0 * b1 - v1 * b0 + e2])

    return f


def reference_solve(model, init, t_end, cfg=AdaptiveConfig()):
    """Integrate from t=0 to ``t_end`` with embedded 5(4) error control.

    A step is accepted when every component of the embedded error estimate
    satisfies ``|err_i| <= atol + rtol max(|y_i|, |y_new_i|)``, tightened by
    the factor ``h / t_end`` under per-unit-step control.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    f = _rhs(model)
    q = 4.0 if cfg.per_unit_step else 5.0
    alpha = 1.0 / q - 0.75 * BETA
    y = np.concatenate([init.x, init.v])
    t = 0.0
    h = min(cfg.h_init, t_end)
    k = np.empty((7, 6))
    k[0] = f(y)
    err_prev = 1e-4
    ts, ys, fs = [t], [y.copy()], [k[0].copy()]
    n_acc = n_rej = 0
    rejected = False
    while t < t_end:
        if n_acc + n_rej >= cfg.max_steps:
            raise MaxStepsExceeded(f"more than {cfg.max_steps} steps before t={t_end}")
        if h < cfg.h_min:
            raise StepSizeUnderflow(f"step size {h:.3e} below h_min at t={t:.6g}")
        last = t + h >= t_end
        if last:
            h = t_end - t
        for s in range(1, 7):
            k[s] = f(y + h * (np.array(_A[s]) @ k[:s]))
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_E @ k)
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.max(np.abs(err_vec) / scale)
        if cfg.per_unit_step:
            err *= t_end / h
        if err <= 1.0:
            t = t_end if last else t + h
            y = y_new
            k[0] = k[6]  # FSAL: last stage is f(y_new)
            ts.append(t)
            ys.append(y.copy())
            fs.append(k[0].copy())
            n_acc += 1
            err = max(err, 1e-10)
            fac = SAFETY * err ** -alpha * err_prev ** BETA
            fac = min(FAC_MAX, max(FAC_MIN, fac))
            if rejected:
                fac = min(fac, 1.0)
            h *= fac
            err_prev = err
            rejected = False
        else:
            n_rej += 1
            h *= max(FAC_MIN, SAFETY * err ** (-1.0 / q))
            rejected = True
    final = ParticleState(y[:3], y[3:])
    return ReferenceSolution(final, t_end, n_acc, n_rej, cfg, np.array(ts), np.array(ys), np.array(fs))
