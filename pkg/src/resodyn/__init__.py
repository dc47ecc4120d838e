"""Resonance spectra, reduced dynamics and decoherence rates for an N-level
system coupled to a thermal boson bath."""

__version__ = "0.1.0"

from .bath import BathFunctions, bath_functions, delta_table, gamma_fn, s_fn, xi_zero
from .dynamics import (DephasingPropagator, PerturbativePropagator, dephasing_exact,
                       manifold_bound_check, manifold_distance, reduced_diag, reduced_offdiag)
from .errors import *  # noqa: F401,F403
from .model import (AssumptionReport, BathParams, CouplingParams, DensityMatrix, FormFactor,
                    QuadratureConfig, SystemSpec, check_a3, check_a4, spin_boson_spec)
from .resonances import (EffectiveOperator, ResonanceSpectrum, TMatrix, effective_operator,
                         eps_a_approx, eta_ab, liouvillian_ls, resonances_numeric, t_matrix)
from .spin_boson import (Regime, SpinBosonSolution, decoherence_rate, rho_t_energy_basis,
                         w_eigenpairs, w_eigenvalues, w_matrix)
