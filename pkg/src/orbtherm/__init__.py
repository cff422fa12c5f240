"""Periodic thermal state of orbiting spacecraft from lumped-parameter models.

The nonlinear nodal energy balance is linearized about the orbit-averaged
steady state; the periodic response then follows from the thermal modes of
the Jacobian, by discrete Fourier analysis or by a period-folded convolution
integral, with an optional second-order correction.  A direct Runge-Kutta
integrator of the nonlinear equations provides the reference solution.
"""
from .errors import (ConvergenceError, IntegrationError, ModelValidationError, OrbthermError,
                     ProfileError, SingularJacobianError, SpectralError)
from .model import (HeatProfile, ThermalModel, load_model, load_profile, save_model,
                    save_profile, total_load)
from .steady import SteadyState, balance_rhs, hot_cold_cases, solve_steady
from .linearization import (JacobianBundle, StructureReport, jacobian, jacobian_exact,
                            jacobian_heuristic, structure_report)
from .modes import ModeBasis, antisymmetric_eigen_shift, decompose, perron_mode
from .periodic import (PeriodicSolution, Spectrum, cesaro_smooth, dft_forward,
                       first_order_fourier, first_order_integral, mode_truncated,
                       second_order_driving, second_order_solve, solve_periodic)
from .profiles import synthetic_eclipse_profile

__version__ = "0.1.0"
