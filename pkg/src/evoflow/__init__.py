"""Kill-the-least-fit evolution model: simulation, exact references and checks."""
from .baksneppen import BSSamples, BSUpdate, Ring, ThresholdEstimate, bs_run, bs_step, bs_threshold_estimate
from .chain import (Birth, ChainState, Death, Histogram, ModelParams, NullDeath, StepEvent, count_in,
                    critical_fitness, critical_value, endpoint_l_sizes, l_size, new_chain, run,
                    scripted_chain, snapshot_histogram, step)
from .errors import (ConfigurationError, EvoflowError, ParameterError, ResourceError,
                     TheoremNotApplicableWarning, UsageError)
from .laws import ExponentialLaw, FitnessLaw, ParetoLaw, UniformLaw, parse_law
from .oracles import (OraclePmf, binomial_pmf, enumerate_l_paths, exact_l_pmf, geometric_pmf,
                      l_transition_probs, srw_survival, srw_survival_table)
from .population import Population
from .rng import derive_seed
from .trackers import (Trackers, density_bracket, density_estimate, density_target, excursion_summary,
                       excursion_survival, ks_above_critical, merge, tail_bound_check)

__version__ = "0.1.0"
