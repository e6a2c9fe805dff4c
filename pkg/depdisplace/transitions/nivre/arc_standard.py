"""
Arc-Standard support

Shift-reduce parsing with arcs between the two topmost stack nodes.

"""

from depdisplace.transitions.stack_like import StackLikeSystem


class ArcStandard(StackLikeSystem):
    """Class for the projective Arc-Standard system."""

    identifier = "arc_standard"
    projective = True
