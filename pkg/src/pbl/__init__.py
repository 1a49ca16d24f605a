"""Exact partition bounds for small relations, with dual certificates and
protocol synthesis."""
from .bounds import (BoundReport, DualCertificate, compute_bound, parse_eps,
                     verify_dual_certificate)
from .caps import CapExceeded, Caps, active_caps
from .lp import LPInstance, check_duality, solve_lp
from .relation import Assignment, MalformedInput, Rectangle, Relation, load_relation
from .synth import evaluate_protocol, run_pipeline, synth_cc_tree, synth_query_tree

__version__ = "0.1.0"

__all__ = [
    "Assignment", "BoundReport", "CapExceeded", "Caps", "DualCertificate", "LPInstance",
    "MalformedInput", "Rectangle", "Relation", "active_caps", "check_duality", "compute_bound",
    "evaluate_protocol", "load_relation", "parse_eps", "run_pipeline", "solve_lp",
    "synth_cc_tree", "synth_query_tree", "verify_dual_certificate",
]
