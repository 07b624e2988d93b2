"""Coupled quantum kicked rotors: exact split-operator evolution and
de Broglie-Bohm trajectory extraction on the periodic 2-torus."""

from .errors import (BohmRotorError, ConfigurationError, DegenerateFieldError,
                     OutOfBandError, ScheduleError)
from .grid import (GridSpec, InitialStateSpec, ModelParams, Representation,
                   WaveField, init_momentum_eigenstate, make_grid,
                   momentum_amplitude, snap_momentum, transform)
from .evolve import apply_free, apply_kick, field_at, step_period
from .bohm import (EPS_NODE, FieldContext, Probe, ProbeSet, ProbeStatus,
                   QuantumPotentialField, Segment, TrajectorySchedule,
                   VelocitySample, advance_probes, eval_velocity,
                   eval_velocity_fourier, phase_gradient, quantum_potential,
                   run_with_convergence, velocity_context, velocity_field)
from .classical import (ClassicalEnsemble, ClassicalState, coupled_map_inverse,
                        coupled_map_step, ensemble_moments, std_map_step,
                        step_ensemble)
from .observables import (Histogram1D, MomentSeries, TrajectoryRecord,
                          averaged_velocity, bohm_momentum_distribution,
                          effective_kick, localization_fit, momentum_marginal,
                          momentum_moment, records_from_probeset)
from .config import ExperimentConfig, load_config
from .presets import (BornSample, UniformGrid, UniformLine, parse_layout,
                      run_preset, seed_probes)

__version__ = "0.1.0"
