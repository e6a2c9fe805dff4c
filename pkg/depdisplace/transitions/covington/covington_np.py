"""
Non-projective Covington support

Any link between the buffer front and a left-list node is permitted as long
as the dependent is headless and the arc closes no cycle.

"""

from depdisplace.transitions.base import NO_HEAD
from depdisplace.transitions.list_like import CovingtonLikeSystem


class CovingtonNonProjective(CovingtonLikeSystem):
    """Class for the unrestricted non-projective Covington system."""

    identifier = "covington_np"
    projective = False

    def signature(self, c):
        # Continuations only see which tree of the partial forest each node
        # belongs to: headless nodes are the roots, and a link closes a cycle
        # exactly when the dependent is the root of the head's tree.
        roots = []
        for node in range(len(c.heads)):
            while c.heads[node] != NO_HEAD:
                node = c.heads[node]
            roots.append(node)
        return c.left, c.right, c.buffer, tuple(roots)
