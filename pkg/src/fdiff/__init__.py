"""Difference operators on taut endofunctors of finite sets.

Everything is computed by enumeration on small finite sets: functors are
evaluated element by element, and laws are checked exhaustively up to a size
bound (sampled beyond it, with a fixed seed).
"""

from .finset import FinFun, FinSet, card, extend, points
from .functor import Endofunctor, NatTransf, NotTautError, check_taut, require_taut
from .delta import DeltaFunctor, PointedDelta, symbolic_delta, verify_symbolic
from .chain import Gamma, gamma, gamma_report
from .newton import NewtonSum, SoftSpecies, delta_star, newton_sum
from .dsl import parse, to_functor, to_str
from .report import DEFAULT_SEED, Report

# the difference operator itself is fdiff.delta.delta; re-exporting it here would shadow the submodule

__all__ = [
    "DEFAULT_SEED",
    "DeltaFunctor",
    "Endofunctor",
    "FinFun",
    "FinSet",
    "Gamma",
    "NatTransf",
    "NewtonSum",
    "NotTautError",
    "PointedDelta",
    "Report",
    "SoftSpecies",
    "card",
    "check_taut",
    "delta_star",
    "extend",
    "gamma",
    "gamma_report",
    "newton_sum",
    "parse",
    "points",
    "require_taut",
    "symbolic_delta",
    "to_functor",
    "to_str",
    "verify_symbolic",
]
