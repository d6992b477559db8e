"""Decomposing the information that source variables carry about a target."""
from .distribution import (
    JointDistribution,
    Variable,
    co_information,
    condition,
    conditional_mutual_information,
    entropy,
    kl_divergence,
    load,
    marginalize,
    mutual_information,
    parse_text,
)
from .lattice import (
    Antichain,
    DecompositionTable,
    PILattice,
    check_local_positivity,
    enumerate_antichains,
    evaluate_lattice,
    leq,
    mobius_invert,
)
from .measures import MEASURES, bivariate_decomposition, get_measure, i_i, i_min

__version__ = "0.1.0"
