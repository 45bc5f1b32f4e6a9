"""Static field models: scalar potential U, electric field E = -grad U, magnetic field B.

A model is a small immutable record (kind code + parameter vector) so that the
compiled kernels can evaluate it without Python callbacks.  Built-in kinds:

* ``quadratic``: U = k|x|^2/2, E = -k x, uniform B = (b1, b2, b3).  Covers the
  zero field, the harmonic trap and a pure uniform magnetic field.
* ``experiment``: U = 1/(100 rho), B = (0, 0, rho/eps) with rho = sqrt(x1^2 + x2^2),
  the standard charged-particle test configuration.
"""
from dataclasses import dataclass
from math import sqrt

import numpy as np

from ._jit import njit

KIND_QUADRATIC = 0
KIND_EXPERIMENT = 1

# kernel status codes, shared with the steppers
OK = 0
DOMAIN = 1
OVERFLOW = 2
NONFINITE = 3

RHO_MIN = 1e-12


class DomainError(ValueError):
    """A field was evaluated at (or too close to) one of its singularities."""


@njit
def eval_ue(kind, p, x0, x1, x2):
    """Return ``(status, U, E0, E1, E2)`` at a point."""
    if kind == KIND_EXPERIMENT:
        rho = sqrt(x0 * x0 + x1 * x1)
        if not rho >= RHO_MIN:
            return DOMAIN, np.nan, np.nan, np.nan, np.nan
        u = 1.0 / (100.0 * rho)
        c = u / (rho * rho)
        return OK, u, c * x0, c * x1, 0.0
    k = p[0]
    return OK, 0.5 * k * (x0 * x0 + x1 * x1 + x2 * x2), -k * x0, -k * x1, -k * x2


@njit
def eval_b(kind, p, x0, x1, x2):
    if kind == KIND_EXPERIMENT:
        return 0.0, 0.0, sqrt(x0 * x0 + x1 * x1) / p[0]
    return p[1], p[2], p[3]


@njit
def potential_many(kind, p, xs):
    n = xs.shape[0]
    out = np.empty(n)
    for i in range(n):
        status, u, e0, e1, e2 = eval_ue(kind, p, xs[i, 0], xs[i, 1], xs[i, 2])
        out[i] = u
    return out


@dataclass(frozen=True)
class FieldModel:
    """Immutable field description consumed by every integrator.

    Attributes
    ----------
    name : str
        Registry name (``zero``, ``harmonic``, ``uniform``, ``experiment``).
    kind : int
        Kernel dispatch code.
    params : tuple of float
        Kernel parameter vector; layout depends on ``kind``.
    labels : dict
        Human-readable parameters recorded in output metadata.
    """

    name: str
    kind: int
    params: tuple
    labels: tuple = ()

    @property
    def array(self):
        return np.array(self.params, dtype=np.float64)

    def describe(self):
        return {"field": self.name, **dict(self.labels)}

    def potential(self, x):
        return eval_potential(self, x)

    def electric(self, x):
        return eval_electric(self, x)

    def magnetic(self, x):
        return eval_magnetic(self, x)


def _point(x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (3,):
        raise ValueError(f"expected a point in R^3, got shape {x.shape}")
    return x


def _ue(model, x):
    x = _point(x)
    status, u, e0, e1, e2 = eval_ue(model.kind, model.array, x[0], x[1], x[2])
    if status != OK:
        raise DomainError(f"{model.name} field is singular at x={x.tolist()}")
    return u, np.array([e0, e1, e2])


def eval_potential(model, x):
    return _ue(model, x)[0]


def eval_electric(model, x):
    """Closed-form E = -grad U at ``x``; raises DomainError at singularities."""
    return _ue(model, x)[1]


def eval_magnetic(model, x):
    x = _point(x)
    return np.array(eval_b(model.kind, model.array, x[0], x[1], x[2]))


def quadratic_field(k=0.0, b=(0.0, 0.0, 0.0), name="quadratic"):
    b = tuple(float(c) for c in b)
    return FieldModel(name, KIND_QUADRATIC, (float(k),) + b, (("k", float(k)), ("b", b)))


def zero_field():
    return quadratic_field(0.0, (0.0, 0.0, 0.0), name="zero")


def harmonic_field(b=(0.0, 0.0, 0.0), k=1.0):
    return quadratic_field(k, b, name="harmonic")


def uniform_magnetic_field(b=(0.0, 0.0, 1.0)):
    return quadratic_field(0.0, b, name="uniform")


def experiment_field(eps=1.0):
    eps = float(eps)
    if not eps > 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    return FieldModel("experiment", KIND_EXPERIMENT, (eps,), (("eps", eps),))


FIELDS = {
    "experiment": experiment_field,
    "harmonic": harmonic_field,
    "uniform": uniform_magnetic_field,
    "zero": zero_field,
}


def make_field(name, **params):
    try:
        factory = FIELDS[name]
    except KeyError:
        raise KeyError(f"unknown field {name!r}; choose from {sorted(FIELDS)}") from None
    return factory(**params)


@dataclass
class GradientReport:
    max_deviation: float
    worst_point: np.ndarray


def check_gradient_consistency(model, points, fd_step=1e-5):
    """Compare the closed-form electric field with central differences of -U.

    The deviation at a point is ``|E + grad_fd U| / max(1, |E|)``; the report
    carries the worst one over ``points``.
    """
    if not fd_step > 0:
        raise ValueError("fd_step must be positive")
    worst, worst_x = 0.0, None
    for x in np.atleast_2d(np.asarray(points, dtype=np.float64)):
        e = eval_electric(model, x)
        grad = np.empty(3)
        for i in range(3):
            dx = np.zeros(3)
            dx[i] = fd_step
            grad[i] = (eval_potential(model, x + dx) - eval_potential(model, x - dx)) / (2 * fd_step)
        dev = np.linalg.norm(e + grad) / max(1.0, np.linalg.norm(e))
        if worst_x is None or dev > worst:
            worst, worst_x = dev, x.copy()
    return GradientReport(worst, worst_x)
