"""torusgibbs: a numerical laboratory for the mass-cutoff focusing NLS Gibbs
measure on a one-dimensional torus.

Sample the measure, compute its variational ground states, estimate its
log-partition function, and probe the sub/super/critical phase behaviour.
"""

__version__ = "0.1.0"

from .grid import Field, LineGrid, SpectralWeights, TorusGrid
from .gff import (covariance_function, lp_integral, mass, mass_tail_samples,
                  sample_gff, sobolev_norm)
from .variational import (MinimizationResult, SolitonProfile, gns_constant,
                          ground_state_profile, minimize_a, minimize_b,
                          scaling_transport, soliton_closed_form,
                          soliton_distance, transport_parameters,
                          unfold_periodic)
from .mcmc import (ChainState, ChainStats, GibbsParams,
                   observable_concentration, observable_local_mass, pcn_step,
                   run_chain)
from .partition import (asymptotic_exponent, bd_lower_bound, log_z_thermo,
                        soliton_drift)
from .experiments import (ExperimentConfig, ResultRecord, ld_tail_experiment,
                          ou_covariance, ou_limit_test, phase_scan,
                          supercritical_concentration)

__all__ = [
    "Field", "LineGrid", "SpectralWeights", "TorusGrid",
    "covariance_function", "lp_integral", "mass", "mass_tail_samples",
    "sample_gff", "sobolev_norm",
    "MinimizationResult", "SolitonProfile", "gns_constant",
    "ground_state_profile", "minimize_a", "minimize_b", "scaling_transport",
    "soliton_closed_form", "soliton_distance", "transport_parameters",
    "unfold_periodic",
    "ChainState", "ChainStats", "GibbsParams", "observable_concentration",
    "observable_local_mass", "pcn_step", "run_chain",
    "asymptotic_exponent", "bd_lower_bound", "log_z_thermo", "soliton_drift",
    "ExperimentConfig", "ResultRecord", "ld_tail_experiment", "ou_covariance",
    "ou_limit_test", "phase_scan", "supercritical_concentration",
]
