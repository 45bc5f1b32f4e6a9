"""Energy-preserving splitting integrators for charged-particle dynamics.

The equations of motion are x' = v, v' = v x B(x) + E(x).  Introducing the
auxiliary variable r = exp(U(x)) (or exp(U(x)/C)) and splitting off the
magnetic rotation gives fully explicit schemes which conserve a modified
energy exactly:

=========  ===================================  =========================
scheme     composition                          conserved quantity
=========  ===================================  =========================
S1-ESAV    nonlinear(h) o rotation(h)           |v|^2/2 + ln r
S2-ESAV    rot(h/2) o nonlinear(h) o rot(h/2)   |v|^2/2 + ln r
S1-MESAV   as S1-ESAV with r = exp(U/C)         |v|^2/2 + C ln r
S2-MESAV   as S2-ESAV with r = exp(U/C)         |v|^2/2 + C ln r
S1-SAV     linearly implicit, s = sqrt(U + C0)  |v|^2/2 + s^2 - C0
=========  ===================================  =========================

All states store ``ln r`` rather than ``r``.
"""
from dataclasses import dataclass
from enum import Enum
from math import sqrt

import numpy as np

from . import _kernels as K
from .fields import DOMAIN, OK, OVERFLOW, DomainError, eval_b, eval_potential
from .linalg3 import rotate


class InitError(ValueError):
    """Initial data violates a scheme's preconditions."""


class SchemeId(str, Enum):
    S1_ESAV = "s1-esav"
    S2_ESAV = "s2-esav"
    S1_MESAV = "s1-mesav"
    S2_MESAV = "s2-mesav"
    S1_SAV = "s1-sav"

    @property
    def code(self):
        return _CODES[self]

    @property
    def order(self):
        return 2 if self in (SchemeId.S2_ESAV, SchemeId.S2_MESAV) else 1

    @property
    def family(self):
        return self.value.split("-")[1]

    @classmethod
    def parse(cls, name):
        key = str(name).strip().lower().replace("_", "-")
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {name!r}; valid schemes: {valid}") from None


_CODES = {
    SchemeId.S1_ESAV: K.S1_ESAV,
    SchemeId.S2_ESAV: K.S2_ESAV,
    SchemeId.S1_MESAV: K.S1_MESAV,
    SchemeId.S2_MESAV: K.S2_MESAV,
    SchemeId.S1_SAV: K.S1_SAV,
}


@dataclass(frozen=True)
class ParticleState:
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("x", "v"):
            a = np.array(getattr(self, name), dtype=np.float64)
            if a.shape != (3,):
                raise ValueError(f"{name} must have shape (3,), got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite components: {a}")
            a.setflags(write=False)
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class EsavState:
    state: ParticleState
    log_r: float

    def __post_init__(self):
        if not np.isfinite(self.log_r):
            raise ValueError(f"log_r must be finite, got {self.log_r}")


@dataclass(frozen=True)
class SavState:
    state: ParticleState
    s: float
    c0: float


def energy_H(state, model):
    """Physical energy |v|^2/2 + U(x)."""
    return 0.5 * float(state.v @ state.v) + eval_potential(model, state.x)


def energy_hat(es):
    return 0.5 * float(es.state.v @ es.state.v) + es.log_r


def energy_hat_C(es, C):
    return 0.5 * float(es.state.v @ es.state.v) + C * es.log_r


def energy_tilde(ss):
    return 0.5 * float(ss.state.v @ ss.state.v) + ss.s * ss.s - ss.c0


def _raise(status, x):
    if status == DOMAIN:
        raise DomainError(f"field evaluation failed near x={np.asarray(x).tolist()}")
    if status == OVERFLOW:
        raise OverflowError("exp overflow in the auxiliary variable update")
    raise FloatingPointError("step produced non-finite values")


def _esav_out(res, es):
    status, y0, y1, y2, u0, u1, u2, lr, _ = res
    if status != OK:
        _raise(status, es.state.x)
    return EsavState(ParticleState(np.array([y0, y1, y2]), np.array([u0, u1, u2])), lr)


def phi_L(es, model, t):
    """Exact flow of the magnetic subflow: rotate v about B(x) for time ``t``."""
    x, v = es.state.x, es.state.v
    b = eval_b(model.kind, model.array, x[0], x[1], x[2])
    w = rotate(b[0], b[1], b[2], float(t), v[0], v[1], v[2])
    return EsavState(ParticleState(x, np.array(w)), es.log_r)


def phi_NL(es, model, h, C=1.0):
    """One explicit step of the electric/auxiliary subflow (C != 1 for MESAV)."""
    x, v = es.state.x, es.state.v
    res = K.nl_flow(model.kind, model.array, x[0], x[1], x[2], v[0], v[1], v[2], es.log_r, float(h), float(C))
    return _esav_out(res, es)


def _esav_step(es, model, h, C, order):
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    x, v = es.state.x, es.state.v
    res = K.esav_step(model.kind, model.array, order, x[0], x[1], x[2], v[0], v[1], v[2],
                      es.log_r, float(h), float(C))
    return _esav_out(res, es)


def step_s1_esav(es, model, h):
    return _esav_step(es, model, h, 1.0, 1)


def step_s2_esav(es, model, h):
    return _esav_step(es, model, h, 1.0, 2)


def step_mesav(es, model, h, C, order=1):
    if not C > 0:
        raise ValueError(f"MESAV constant must be positive, got {C}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return _esav_step(es, model, h, C, order)


def step_s1_sav(ss, model, h):
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    x, v = ss.state.x, ss.state.v
    status, y0, y1, y2, u0, u1, u2, s, _ = K.sav_step(
        model.kind, model.array, x[0], x[1], x[2], v[0], v[1], v[2], ss.s, float(h), ss.c0)
    if status != OK:
        _raise(status, x)
    return SavState(ParticleState(np.array([y0, y1, y2]), np.array([u0, u1, u2])), s, ss.c0)


@dataclass(frozen=True)
class Stepper:
    """Uniform one-step interface over every scheme.

    ``constant`` is the MESAV constant C, the SAV shift C0, or 1.0 for ESAV;
    it is also what the compiled kernels receive as their scheme constant.
    """

    scheme: SchemeId
    model: object
    constant: float
    initial: object

    @property
    def energy_name(self):
        return {"esav": "H_hat", "mesav": "H_hat_C", "sav": "H_tilde"}[self.scheme.family]

    def aux(self, state):
        return state.s if self.scheme is SchemeId.S1_SAV else state.log_r

    def step(self, state, h):
        if self.scheme is SchemeId.S1_SAV:
            return step_s1_sav(state, self.model, h)
        return _esav_step(state, self.model, h, self.constant, self.scheme.order)

    def modified_energy(self, state):
        if self.scheme is SchemeId.S1_SAV:
            return energy_tilde(state)
        return energy_hat_C(state, self.constant)

    def modified_energy_many(self, vs, aux):
        kinetic = 0.5 * np.sum(vs * vs, axis=1)
        if self.scheme is SchemeId.S1_SAV:
            return kinetic + aux * aux - self.constant
        return kinetic + self.constant * aux

    def run(self, h, n_steps):
        """Raw kernel trajectory: ``(status, n_done, n_negative, xs, vs, aux)``."""
        p = self.initial.state
        return K.integrate(self.scheme.code, self.model.kind, self.model.array, p.x, p.v,
                           float(self.aux(self.initial)), float(h), int(n_steps), float(self.constant))


def make_stepper(scheme, model, init, c0=None):
    """Initialize the scheme's auxiliary variable and bundle a stepper.

    ``c0`` is required for S1-SAV (with U(x0) + c0 > 0).  MESAV uses
    C = |H(x0, v0)| and rejects initial data with zero energy.
    """
    scheme = SchemeId.parse(scheme) if not isinstance(scheme, SchemeId) else scheme
    try:
        u0 = eval_potential(model, init.x)
    except DomainError as exc:
        raise InitError(str(exc)) from exc
    if scheme is SchemeId.S1_SAV:
        if c0 is None:
            raise InitError("S1-SAV needs the shift constant c0")
        if not u0 + c0 > 0:
            raise InitError(f"U(x0) + c0 = {u0 + c0} must be positive")
        return Stepper(scheme, model, float(c0), SavState(init, sqrt(u0 + c0), float(c0)))
    if scheme.family == "mesav":
        C = abs(0.5 * float(init.v @ init.v) + u0)
        if not C > 0:
            raise InitError("MESAV needs H(x0, v0) != 0")
        return Stepper(scheme, model, C, EsavState(init, u0 / C))
    return Stepper(scheme, model, 1.0, EsavState(init, u0))
