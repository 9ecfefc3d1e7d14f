"""Exact tools for causal classes of multipartite Bell scenarios."""

from .boxes import (BoxRecord, generator, load_behavior, load_boxes, reference_noise_table,
                    reproduce_noise_table, verify_extremal, write_boxes)
from .classes import ClassInfo, enumerate_classes, hierarchy_edges, level_histogram
from .dag import (GeneralBdag, IoBdag, canonical_form, canonicalize_to_io, chain_witness,
                  is_chain_boring, level, orbit_size)
from .errors import (CausalBellError, GuardLimitError, ParseError, ScenarioMismatchError,
                     SignalingError)
from .inequalities import (BellExpression, algebraic_max, builtin, class_bound, compose_i3,
                           evaluate, ns_bound)
from .lp import LinearProgram, LpOutcome, affine_rank, check_farkas, check_solution, solve
from .scenario import (Behavior, Scenario, gyni_success, is_nonsignaling, is_normalized, marginal,
                       mix, white_noise)
from .strategies import (StrategyMatrix, ab_marginal_is_lhv, build_strategy_matrix, class_membership,
                         critical_noise, mixture_threshold, star_collapse_check, strategy_count)

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "BellExpression",
    "BoxRecord",
    "CausalBellError",
    "ClassInfo",
    "GeneralBdag",
    "GuardLimitError",
    "IoBdag",
    "LinearProgram",
    "LpOutcome",
    "ParseError",
    "Scenario",
    "ScenarioMismatchError",
    "SignalingError",
    "StrategyMatrix",
    "ab_marginal_is_lhv",
    "affine_rank",
    "algebraic_max",
    "build_strategy_matrix",
    "builtin",
    "canonical_form",
    "canonicalize_to_io",
    "chain_witness",
    "check_farkas",
    "check_solution",
    "class_bound",
    "class_membership",
    "compose_i3",
    "critical_noise",
    "enumerate_classes",
    "evaluate",
    "generator",
    "gyni_success",
    "hierarchy_edges",
    "is_chain_boring",
    "is_nonsignaling",
    "is_normalized",
    "level",
    "level_histogram",
    "load_behavior",
    "load_boxes",
    "marginal",
    "mix",
    "mixture_threshold",
    "ns_bound",
    "orbit_size",
    "reference_noise_table",
    "reproduce_noise_table",
    "solve",
    "star_collapse_check",
    "strategy_count",
    "verify_extremal",
    "white_noise",
    "write_boxes",
]
