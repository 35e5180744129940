"""Photon generation by the anti-rotating term of the Rabi model under dephasing.

Three engines evolve the same physics at different levels of description:

* :mod:`~rabidephase.exact` integrates the full coefficient equations of the
  truncated density matrix,
* :mod:`~rabidephase.effective` integrates the population rate equations
  obtained by adiabatic elimination of the atom-field coherences,
* :mod:`~rabidephase.oracle` exponentiates the dense Liouvillian and serves
  as an independent reference at small truncations.

:mod:`~rabidephase.observables` holds the moment checks and the closed-form
large-time predictions; :mod:`~rabidephase.scenario` ties everything into
reproducible, file-producing runs.
"""
from .effective import (PopulationTrajectory, adiabatic_coherences, adiabatic_state,
                        effective_rhs, integrate_effective)
from .errors import (ConfigError, DomainError, InsufficientPointsError, RabiDephaseError,
                     ShapeMismatchError, SizeError, StepFailureError, TruncationError)
from .exact import Trajectory, check_truncation, exact_rhs, integrate_exact
from ._integrate import Tolerances
from .observables import (AsymptoticSet, ObservableRecord, TimeSeries, asymptotic_predictions,
                          fit_linear_slope, fit_quadratic_coeff, moment_identity_residual,
                          moment_ode_residuals, observables, photon_rate)
from .oracle import (Liouvillian, build_liouvillian, compare_states, integrate_oracle,
                     propagate_oracle)
from .params import ModelParams, dephasing_rates, f_coefficient, new_model_params
from .scenario import ScenarioConfig, load_config, parse_config, preset, run_scenario
from .states import (DensityState, PopulationState, diagonal_populations, fock_atom_state,
                     thermal_atom_state)

__version__ = "0.1.0"
