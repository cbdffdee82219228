"""Online contention resolution on k-uniform matroids.

Selection schemes (a simple near-optimal scheme, a buffered deterministic
rule, greedy baselines, and a scaling wrapper), exact selectability oracles,
random-walk instrumentation of the buffered rule, closed-form LP and tail
numerics, and a threshold gambler for prophet-inequality experiments.
"""

from .adversary import (
    Order,
    actives_first_order,
    fixed_order,
    identity_order,
    realize_order,
    targeted_actives_first_order,
)
from .bounds import (
    BinomialSpec,
    LpSolution,
    anti_concentration_lower,
    binom_cdf,
    binom_pmf,
    binom_sf,
    chernoff_tail,
    cstar_upper_envelope,
    greedy_bc_frontier,
    hks_guarantee,
    impossibility_curve,
    impossibility_sweep,
    lp_cstar,
    lp_oracle,
)
from .catalog import random_instance, stress_catalog
from .errors import OcrskitError
from .exact import (
    SelectabilityReport,
    brute_force_selectability,
    exact_selectability_dp,
    mc_selectability,
)
from .instance import ActivationPattern, Instance, Trace, sample_activation, validate_instance
from .kernels import BACKEND
from .prophet import (
    ProphetInstance,
    RatioEstimate,
    ValueDistribution,
    build_prophet_instance,
    competitive_ratio,
    discrete_dist,
    exponential_dist,
    find_threshold,
    load_distributions,
    prophet_value,
    quantile_dist,
    run_gambler,
    uniform_dist,
)
from .rng import RandomSource
from .schemes import (
    SchemeSpec,
    algorithm_d,
    bind,
    naive_greedy,
    parse_scheme,
    partition_greedy,
    scale_reduction,
    scaled_greedy,
    select_batch,
    selectability_floor,
    simple_ocrs,
    simulate_batch,
)
from .walk import (
    batch_walks,
    build_walks,
    martingale_tail_estimate,
    new_integral_heights,
    reversed_process,
)

__version__ = "0.1.0"
