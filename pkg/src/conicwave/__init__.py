"""conicwave: scattering and dispersive decay on surfaces with conical ends.

Builds the 1D operator -d^2/dxi^2 + V(xi) induced by a rotation profile
r(x), computes its Jost solutions, Wronskian and scattering coefficients
across the energy range, and evaluates the weighted oscillatory kernels of
the Schrodinger and wave evolutions to verify dispersive decay rates.
"""

from .errors import (ConfigError, ConicwaveError, ConvergenceError,
                     DomainError, QuadratureError)
from .geometry import (ArclengthChart, ConicalFit, PotentialProfile,
                       ProfileSpec, arclength_of, fit_conical_constants,
                       make_profile, potential_at, x_of_arclength)
from .hankel import (C0, C1, KAPPA, WaveSample, f0_reference, f0_values,
                     g0_green, hankel0_plus)
from .jost import (AsymptoticConstants, JostEvaluator, LowEnergyBasis,
                   ScatteringData, ScatteringModel)
from .kernel import (BANDS, KINDS, DecayReport, KernelEngine, KernelSample,
                     StationaryPhaseCase, chi_low, chi_window,
                     standard_case_library, stationary_phase_check)
from .volterra import VolterraProblem, VolterraSolution, estimate_mu, \
    volterra_solve

__version__ = "0.1.0"

__all__ = [
    "ArclengthChart", "AsymptoticConstants", "BANDS", "C0", "C1",
    "ConfigError", "ConicalFit", "ConicwaveError", "ConvergenceError",
    "DecayReport", "DomainError", "JostEvaluator", "KAPPA", "KINDS",
    "KernelEngine", "KernelSample", "LowEnergyBasis", "PotentialProfile",
    "ProfileSpec", "QuadratureError", "ScatteringData", "ScatteringModel",
    "StationaryPhaseCase", "VolterraProblem", "VolterraSolution",
    "WaveSample", "arclength_of", "chi_low", "chi_window", "estimate_mu",
    "f0_reference", "f0_values", "fit_conical_constants", "g0_green",
    "hankel0_plus", "make_profile", "potential_at",
    "standard_case_library", "stationary_phase_check", "volterra_solve",
    "x_of_arclength",
]
