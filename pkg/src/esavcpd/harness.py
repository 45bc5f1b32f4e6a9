"""Experiment drivers: energy-error time series, convergence study, timing.

Each driver returns a plain record that ``esavcpd.io`` knows how to write.
"""
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._jit import BACKEND
from .fields import DOMAIN, NONFINITE, OVERFLOW, experiment_field, potential_many
from .integrators import ParticleState, SchemeId, energy_H, make_stepper
from .reference import AdaptiveConfig, reference_solve

STATUS_NAMES = {DOMAIN: "domain", OVERFLOW: "overflow", NONFINITE: "nonfinite"}

STANDARD_INIT = ParticleState([0.0, 1.0, 0.1], [0.09, 0.05, 0.2])
ENERGY_EPS = (1.0, 2.0**-2, 2.0**-4)
TIMING_EPS = tuple(2.0**-k for k in range(7))
TIMING_H = (1e-2, 5e-3, 1e-3)


@dataclass
class TrajectoryRecord:
    scheme: str
    h: float
    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    aux: np.ndarray
    H: np.ndarray
    modified_energy: np.ndarray
    relative_energy_error: np.ndarray
    metadata: dict = field(default_factory=dict)
    error: str = None

    def __len__(self):
        return len(self.times)

    @property
    def max_relative_energy_error(self):
        return float(np.max(self.relative_energy_error)) if len(self) else 0.0


@dataclass
class ConvergenceReport:
    scheme: str
    stepsizes: np.ndarray
    errors: np.ndarray
    fitted_order: float
    used: np.ndarray
    exact_regime: bool
    metadata: dict = field(default_factory=dict)


@dataclass
class TimingReport:
    schemes: tuple
    eps_values: tuple
    stepsizes: tuple
    repetitions: int
    cells: list
    metadata: dict = field(default_factory=dict)

    def median(self, scheme, eps, h):
        for c in self.cells:
            if c["scheme"] == scheme and c["eps"] == eps and c["h"] == h:
                return c["median_seconds"]
        raise KeyError((scheme, eps, h))


def _n_steps(T, h):
    n = int(round(T / h))
    if n < 1:
        raise ValueError(f"T={T} shorter than one step h={h}")
    if abs(n * h - T) > 1e-9 * T:
        warnings.warn(f"T/h = {T / h} is not an integer; running {n} steps to T={n * h}")
    return n


def _scheme(s):
    return s if isinstance(s, SchemeId) else SchemeId.parse(s)


def run_energy_experiment(scheme, model, init, h, T, c0=1.0):
    """Integrate to ``T`` and record the scheme's modified energy against H(x0, v0).

    The relative error is |E_mod - H0| / |H0| (absolute when H0 == 0).  The
    physical energy H(x_n, v_n) is recorded alongside but is not expected to
    be conserved.  A failing step ends the run; the partial record carries
    an ``error`` tag.
    """
    scheme = _scheme(scheme)
    n = _n_steps(T, h)
    stepper = make_stepper(scheme, model, init, c0=c0)
    status, n_done, n_negative, xs, vs, aux = stepper.run(h, n)
    m = n_done + 1
    xs, vs, aux = xs[:m].copy(), vs[:m].copy(), aux[:m].copy()
    H0 = energy_H(init, model)
    modified = stepper.modified_energy_many(vs, aux)
    H = 0.5 * np.sum(vs * vs, axis=1) + potential_many(model.kind, model.array, xs)
    scale = abs(H0) if H0 != 0 else 1.0
    meta = {
        "scheme": scheme.value,
        "h": h,
        "T_requested": T,
        "T": n * h,
        "n_steps": n,
        **model.describe(),
        "H0": H0,
        "modified_energy": stepper.energy_name,
        "error_normalization": "relative" if H0 != 0 else "absolute",
        "negative_midpoint_r": int(n_negative),
        "backend": BACKEND,
    }
    if scheme is SchemeId.S1_SAV:
        meta["c0"] = stepper.constant
    elif scheme.family == "mesav":
        meta["C"] = stepper.constant
    return TrajectoryRecord(
        scheme=scheme.value,
        h=h,
        times=np.arange(m) * h,
        x=xs,
        v=vs,
        aux=aux,
        H=H,
        modified_energy=modified,
        relative_energy_error=np.abs(modified - H0) / scale,
        metadata=meta,
        error=STATUS_NAMES.get(status),
    )


def _rel(a, b):
    nb = np.linalg.norm(b)
    return np.linalg.norm(a - b) / (nb if nb > 0 else 1.0)


def fit_order(stepsizes, errors):
    """Least-squares slope of log2(error) against log2(h)."""
    return float(np.polyfit(np.log2(stepsizes), np.log2(errors), 1)[0])


def run_convergence_study(scheme, model, init, t_end=1.0, k_range=range(6, 13),
                          cfg=AdaptiveConfig(), c0=1.0, reference=None):
    """Global errors at h = 2^-k against the adaptive reference, plus the fitted order.

    Points whose error is within 100x of the reference tolerance are left
    out of the fit.  With fewer than three points left the report is flagged
    ``exact_regime`` and carries no order.
    """
    scheme = _scheme(scheme)
    if reference is None:
        reference = reference_solve(model, init, t_end, cfg)
    ref = reference.final
    stepper = make_stepper(scheme, model, init, c0=c0)
    ks = np.asarray(list(k_range))
    hs = 2.0 ** -ks.astype(float)
    errors = np.empty(len(hs))
    for i, h in enumerate(hs):
        status, n_done, _, xs, vs, _ = stepper.run(h, _n_steps(t_end, h))
        if status:
            raise RuntimeError(f"{scheme.value} failed ({STATUS_NAMES[status]}) at h={h} after {n_done} steps")
        errors[i] = _rel(xs[-1], ref.x) + _rel(vs[-1], ref.v)
    floor = 100.0 * max(cfg.rtol, cfg.atol)
    used = errors > floor
    exact = int(used.sum()) < 3
    order = float("nan") if exact else fit_order(hs[used], errors[used])
    meta = {
        "scheme": scheme.value,
        "t_end": t_end,
        "k_range": [int(k) for k in ks],
        **model.describe(),
        "reference": {"method": "dopri5", "rtol": cfg.rtol, "atol": cfg.atol,
                      "per_unit_step": cfg.per_unit_step, "steps": reference.n_accepted},
        "fit_floor": floor,
        "backend": BACKEND,
    }
    return ConvergenceReport(scheme.value, hs, errors, order, used, exact, meta)


def run_timing_study(schemes=(SchemeId.S1_SAV, SchemeId.S1_ESAV), init=STANDARD_INIT, T=100.0,
                     h_values=TIMING_H, eps_values=TIMING_EPS, repetitions=3,
                     field_factory=experiment_field, c0=1.0):
    """Median wall time of the fixed-step loop per (scheme, eps, h) cell.

    Each cell runs once untimed (warm-up, includes any JIT compilation),
    then ``repetitions`` timed runs which must reproduce the same final state
    bit for bit.  Cells run one at a time.
    """
    if repetitions < 3:
        raise ValueError("repetitions must be at least 3")
    schemes = tuple(_scheme(s) for s in schemes)
    cells = []
    for eps in eps_values:
        model = field_factory(eps)
        for h in h_values:
            n = _n_steps(T, h)
            for scheme in schemes:
                stepper = make_stepper(scheme, model, init, c0=c0)
                ref = stepper.run(h, n)
                if ref[0]:
                    raise RuntimeError(f"{scheme.value} failed at eps={eps}, h={h}")
                samples = []
                for _ in range(repetitions):
                    t0 = time.perf_counter()
                    out = stepper.run(h, n)
                    samples.append(time.perf_counter() - t0)
                    if not (np.array_equal(out[3][-1], ref[3][-1]) and np.array_equal(out[4][-1], ref[4][-1])):
                        raise RuntimeError(f"non-deterministic trajectory for {scheme.value}, eps={eps}, h={h}")
                cells.append({
                    "scheme": scheme.value,
                    "eps": eps,
                    "h": h,
                    "n_steps": n,
                    "samples": samples,
                    "median_seconds": float(np.median(samples)),
                })
    meta = {"T": T, "field": "experiment", "backend": BACKEND,
            "x0": list(init.x), "v0": list(init.v), "c0": c0}
    return TimingReport(tuple(s.value for s in schemes), tuple(eps_values), tuple(h_values),
                        repetitions, cells, meta)
