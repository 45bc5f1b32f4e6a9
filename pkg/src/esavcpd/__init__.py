"""Explicit energy-preserving splitting integrators for charged-particle dynamics."""
__version__ = "0.1.0"

from ._jit import BACKEND, USE_NUMBA
from .fields import (DomainError, FieldModel, experiment_field, harmonic_field, make_field,
                     uniform_magnetic_field, zero_field)
from .integrators import (EsavState, InitError, ParticleState, SavState, SchemeId, energy_H,
                          energy_hat, energy_hat_C, energy_tilde, make_stepper, phi_L, phi_NL,
                          step_mesav, step_s1_esav, step_s1_sav, step_s2_esav)
from .linalg3 import rot_exp_apply, skew
from .reference import AdaptiveConfig, reference_solve
