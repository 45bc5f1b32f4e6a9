import numpy as np
import numpy.testing as npt
import pytest
from scipy.integrate import solve_ivp

from esavcpd import (AdaptiveConfig, DomainError, ParticleState, energy_H, experiment_field, harmonic_field,
                     reference_solve, uniform_magnetic_field, zero_field)
from esavcpd.reference import MaxStepsExceeded, StepSizeUnderflow


def helix(t, x0=(0.0, 0.0, 0.0), vz=0.3):
    x = np.array(x0) + [np.sin(t), np.cos(t) - 1.0, vz * t]
    v = np.array([np.cos(t), -np.sin(t), vz])
    return x, v


@pytest.mark.parametrize("kw", [dict(rtol=0.0), dict(atol=-1.0), dict(h_min=1.0), dict(max_steps=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        AdaptiveConfig(**kw)


def test_halved_config():
    cfg = AdaptiveConfig(rtol=1e-10, atol=1e-11).halved()
    assert (cfg.rtol, cfg.atol) == (5e-11, 5e-12)


def test_free_flight():
    sol = reference_solve(zero_field(), ParticleState([1, 2, 3], [0.5, -1, 2]), 2.0)
    npt.assert_allclose(sol.final.x, [2, 0, 7], rtol=0, atol=1e-13)
    npt.assert_allclose(sol.final.v, [0.5, -1, 2], rtol=0, atol=1e-15)


def test_pure_magnetic_speed_is_constant():
    init = ParticleState([0, 0, 0], [0.6, 0.0, 0.8])
    sol = reference_solve(uniform_magnetic_field((0.2, -0.4, 1.0)), init, 10.0)
    assert np.linalg.norm(sol.final.v) == pytest.approx(1.0, abs=1e-11)


def test_helix_closes_after_one_period():
    init = ParticleState([0, 0, 0], [1.0, 0.0, 0.3])
    sol = reference_solve(uniform_magnetic_field((0, 0, 1)), init, 2 * np.pi)
    x, v = helix(2 * np.pi)
    npt.assert_allclose(sol.final.x, x, rtol=0, atol=1e-9)
    npt.assert_allclose(sol.final.v, v, rtol=0, atol=1e-9)


def test_energy_is_conserved(std_init, std_model):
    sol = reference_solve(std_model, std_init, 10.0)
    h0 = energy_H(std_init, std_model)
    assert abs(energy_H(sol.final, std_model) - h0) / h0 <= 1e-9


@pytest.mark.parametrize("eps", [1.0, 0.25])
def test_agrees_with_independent_solver(std_init, eps):
    model = experiment_field(eps)

    def rhs(t, y):
        x, v = y[:3], y[3:]
        return np.concatenate([v, np.cross(v, model.magnetic(x)) + model.electric(x)])

    ref = solve_ivp(rhs, (0, 1), np.concatenate([std_init.x, std_init.v]), method="DOP853",
                    rtol=1e-13, atol=1e-13).y[:, -1]
    sol = reference_solve(model, std_init, 1.0)
    npt.assert_allclose(np.concatenate([sol.final.x, sol.final.v]), ref, rtol=0, atol=1e-11)


def test_per_step_mode_also_converges(std_init, std_model):
    cfg = AdaptiveConfig(per_unit_step=False)
    a = reference_solve(std_model, std_init, 1.0, cfg)
    b = reference_solve(std_model, std_init, 1.0)
    assert a.n_accepted < b.n_accepted
    npt.assert_allclose(a.final.x, b.final.x, rtol=0, atol=1e-11)


def test_dense_output():
    init = ParticleState([0, 0, 0], [1.0, 0.0, 0.3])
    sol = reference_solve(uniform_magnetic_field((0, 0, 1)), init, 2.0)
    ts = np.linspace(0, 2, 37)
    got = sol(ts)
    npt.assert_allclose(got[:, :3], np.column_stack([np.sin(ts), np.cos(ts) - 1, 0.3 * ts]), atol=1e-9)
    npt.assert_array_equal(sol(2.0)[0], np.concatenate([sol.final.x, sol.final.v]))
    with pytest.raises(ValueError):
        sol(2.5)


def test_step_failures(std_init, std_model):
    with pytest.raises(MaxStepsExceeded):
        reference_solve(std_model, std_init, 10.0, AdaptiveConfig(max_steps=10))
    with pytest.raises(StepSizeUnderflow):
        reference_solve(std_model, std_init, 1.0, AdaptiveConfig(rtol=1e-300, atol=1e-300))
    with pytest.raises(ValueError):
        reference_solve(std_model, std_init, 0.0)


def test_domain_error_on_axis():
    init = ParticleState([0, 0, 1], [1.0, 0, 0])
    with pytest.raises(DomainError):
        reference_solve(experiment_field(), init, 1.0)


def test_harmonic_oscillator():
    sol = reference_solve(harmonic_field(), ParticleState([1, 0, 0], [0, 0, 0]), 3.0)
    npt.assert_allclose(sol.final.x, [np.cos(3.0), 0, 0], atol=1e-11)
