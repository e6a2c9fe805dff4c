from depdisplace.transitions.base import (
    NO_HEAD,
    Arc,
    BaseSystem,
    Transition,
    arcs_of,
    heads_of,
    is_projective,
    is_tree,
    tree_problem,
)
from depdisplace.transitions.covington import (
    CovingtonNonProjective,
    CovingtonProjective,
)
from depdisplace.transitions.list_like import CovingtonLikeSystem, ListConfiguration
from depdisplace.transitions.nivre import ArcEager, ArcStandard, SwapEager
from depdisplace.transitions.stack_like import StackConfiguration, StackLikeSystem

__all__ = (
    "NO_HEAD",
    "Arc",
    "Transition",
    "BaseSystem",
    "StackLikeSystem",
    "StackConfiguration",
    "CovingtonLikeSystem",
    "ListConfiguration",
    "ArcStandard",
    "ArcEager",
    "SwapEager",
    "CovingtonProjective",
    "CovingtonNonProjective",
    "arcs_of",
    "heads_of",
    "is_projective",
    "is_tree",
    "tree_problem",
    "nivre",
    "covington",
)
