"""Continuous set covering on networks with delimited edge-model MILPs."""

from .cuts import CoverPattern, NoGoodInequality, feasibility_lp, generate_nogood, is_connected_pattern, to_inequality
from .delimit import (
    AssumptionError,
    BigMConstants,
    Delimitation,
    bigm_constants,
    build_delimitation,
    check_assumption,
    trivial_delimitation,
)
from .formulations import (
    Cover,
    Formulation,
    FormulationKind,
    attach_cuts,
    build_bigm,
    build_dp,
    build_indicator,
    cover_to_assignment,
    extract_solution,
    formulate,
)
from .harness import gen_random, metrics, radius_for, run_bench, sgm, solve_instance
from .milp import Model, lower_indicators, write_lp
from .network import (
    DistanceMatrix,
    Network,
    Point,
    all_pairs_distances,
    parse_instance,
    point_distance,
    read_instance,
    split_edges,
    tau,
)
from .solve import BnBConfig, SolveResult, branch_and_bound, solve_lp
from .verify import check_cover, find_placement, improve_cover, oracle_optimum, spanning_tree_cover, trivial_cover

__version__ = "0.1.0"
