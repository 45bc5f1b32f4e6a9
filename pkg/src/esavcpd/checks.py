"""Fast invariant suite behind ``esavcpd check``.

Every check compares the production path against an independent oracle
(finite differences, truncated power series, literal fixed-point iteration)
on seeded random inputs.
"""
from dataclasses import dataclass

import numpy as np

from .fields import (experiment_field, harmonic_field, zero_field,
                     check_gradient_consistency, eval_electric, eval_magnetic, eval_potential)
from .integrators import (EsavState, ParticleState, SavState, SchemeId, make_stepper, phi_L,
                          phi_NL, step_s1_esav, step_s1_sav)
from .linalg3 import rot_exp_apply, skew


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def series_exp_apply(m, v, terms=30):
    """exp(m) v by the Taylor series v + sum_{k=1..terms} m^k v / k!."""
    out = np.array(v, dtype=np.float64)
    term = out.copy()
    for k in range(1, terms + 1):
        term = m @ term / k
        out = out + term
    return out


def random_standard_states(rng, n):
    """Random points near the unit cylinder with moderate velocities."""
    rho = rng.uniform(0.5, 2.0, n)
    phi = rng.uniform(0.0, 2 * np.pi, n)
    xs = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), rng.uniform(-1, 1, n)])
    vs = rng.uniform(-0.5, 0.5, (n, 3))
    return xs, vs


def sav_fixed_point(ss, model, h, iterations=50):
    """S1-SAV step by literal fixed-point iteration on the midpoint auxiliary value."""
    x, v, s, c0 = ss.state.x, ss.state.v, ss.s, ss.c0
    w = rot_exp_apply(eval_magnetic(model, x), h, v)
    xh = x + 0.5 * h * w
    e = eval_electric(model, xh)
    q = np.sqrt(eval_potential(model, xh) + c0)
    s_new = s
    for _ in range(iterations):
        s_half = 0.5 * (s_new + s)
        x_new = x + h * w + 0.5 * h * h * e / q * s_half
        v_new = w + h * e / q * s_half
        s_new = s - (x_new - x) @ e / (2 * q)
    return x_new, v_new, s_new


def _check_gradients(rng):
    xs, _ = random_standard_states(rng, 100)
    worst = 0.0
    for model in (experiment_field(1.0), experiment_field(0.25), harmonic_field((0, 0, 1)), zero_field()):
        worst = max(worst, check_gradient_consistency(model, xs, 1e-5).max_deviation)
    return worst <= 1e-6, f"max relative deviation {worst:.2e} (tol 1e-6)"


def _check_skew(rng):
    worst = 0.0
    for _ in range(200):
        b, v = rng.normal(size=3), rng.normal(size=3)
        m = skew(b)
        worst = max(worst, np.max(np.abs(m @ v - np.cross(v, b))), np.max(np.abs(m + m.T)))
    return worst <= 1e-14, f"max |skew(B) v - v x B| or asymmetry {worst:.2e} (tol 1e-14)"


def _check_rotation(rng):
    series_err = norm_err = 0.0
    for _ in range(200):
        b, v = rng.normal(size=3), rng.normal(size=3)
        v /= np.linalg.norm(v)
        t = rng.uniform(-5, 5) / max(1.0, np.linalg.norm(b))
        got = rot_exp_apply(b, t, v)
        series_err = max(series_err, np.max(np.abs(got - series_exp_apply(t * skew(b), v))))
        norm_err = max(norm_err, abs(np.linalg.norm(got) - np.linalg.norm(v)) / max(1.0, np.linalg.norm(v)))
    ok = series_err <= 1e-12 and norm_err <= 1e-14
    return ok, f"series deviation {series_err:.2e} (tol 1e-12), norm drift {norm_err:.2e} (tol 1e-14)"


def _check_energy_identity(rng):
    xs, vs = random_standard_states(rng, 100)
    worst = 0.0
    for i in range(len(xs)):
        model = experiment_field(rng.choice([1.0, 0.25, 0.0625]))
        init = ParticleState(xs[i], vs[i])
        h = rng.uniform(1e-6, 0.1)
        for scheme in SchemeId:
            stepper = make_stepper(scheme, model, init, c0=1.0)
            e0 = stepper.modified_energy(stepper.initial)
            e1 = stepper.modified_energy(stepper.step(stepper.initial, h))
            worst = max(worst, abs(e1 - e0) / abs(e0))
    return worst <= 1e-13, f"max relative one-step change {worst:.2e} (tol 1e-13)"


def _check_composition(rng):
    xs, vs = random_standard_states(rng, 100)
    model = experiment_field(0.25)
    worst = 0.0
    for i in range(len(xs)):
        es = EsavState(ParticleState(xs[i], vs[i]), rng.uniform(-1, 1))
        h = rng.uniform(1e-4, 0.1)
        a = step_s1_esav(es, model, h)
        b = phi_NL(phi_L(es, model, h), model, h)
        worst = max(worst, np.max(np.abs(a.state.x - b.state.x)), np.max(np.abs(a.state.v - b.state.v)),
                    abs(a.log_r - b.log_r))
    return worst <= 1e-15, f"S1-ESAV vs phi_NL o phi_L {worst:.2e} (tol 1e-15)"


def _check_sav(rng):
    xs, vs = random_standard_states(rng, 200)
    model = experiment_field(1.0)
    worst = 0.0
    for i in range(len(xs)):
        init = ParticleState(xs[i], vs[i])
        ss = SavState(init, np.sqrt(eval_potential(model, xs[i]) + 1.0), 1.0)
        h = rng.uniform(1e-4, 0.1)
        got = step_s1_sav(ss, model, h)
        x, v, s = sav_fixed_point(ss, model, h)
        worst = max(worst, np.max(np.abs(got.state.x - x)), np.max(np.abs(got.state.v - v)), abs(got.s - s))
    return worst <= 1e-14, f"closed form vs fixed point {worst:.2e} (tol 1e-14)"


CHECKS = (
    ("gradient consistency E = -grad U", _check_gradients),
    ("skew(B) v = v x B, antisymmetry", _check_skew),
    ("rotation vs series, norm preservation", _check_rotation),
    ("per-step modified-energy identity", _check_energy_identity),
    ("Lie composition consistency", _check_composition),
    ("S1-SAV closed form vs fixed point", _check_sav),
)


def run_checks(seed=20240501):
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, not an aborted suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    return results
