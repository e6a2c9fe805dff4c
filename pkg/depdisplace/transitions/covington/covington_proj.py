"""
Projective Covington support

Links are additionally rejected when they would cross an existing arc or
span a node that is still headless. Such a node could only be attached later
by a crossing arc or by the root at finalization, which also crosses.

"""

from depdisplace.transitions.base import NO_HEAD, crosses
from depdisplace.transitions.list_like import CovingtonLikeSystem


class CovingtonProjective(CovingtonLikeSystem):
    """Class for the projective Covington system."""

    identifier = "covington_proj"
    projective = True

    def _link_problem(self, c, head, dependent):
        problem = super()._link_problem(c, head, dependent)
        if problem is not None:
            return problem
        span = (head, dependent)
        for node in range(1, len(c.heads)):
            if c.heads[node] != NO_HEAD and crosses(span, (c.heads[node], node)):
                return "arc would cross an existing arc"
        low, high = sorted(span)
        if low > 0:
            for node in range(low + 1, high):
                if c.heads[node] == NO_HEAD:
                    return "arc would cover a headless node"
        return None
