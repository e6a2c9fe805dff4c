"""
Swap-Eager support

Arc-Standard plus SWAP, which moves the second-from-top stack node back to
the buffer front and so reorders the input online. SWAP only applies to a
pair still in original order, which bounds the number of swaps.

"""

from depdisplace.transitions.base import Transition
from depdisplace.transitions.stack_like import StackConfiguration, StackLikeSystem


def projective_order(gold: tuple[int, ...]) -> list[int]:
    """Position of every node in the in-order traversal of the gold tree.

    Sorting nodes by this order makes the gold tree projective.
    """
    children = [[] for _ in gold]
    for dep in range(1, len(gold)):
        children[gold[dep]].append(dep)
    order = [0] * len(gold)
    position = 0
    # Explicit stack: (node, expanded) pairs
    agenda = [(0, False)]
    while agenda:
        node, expanded = agenda.pop()
        if expanded:
            order[node] = position
            position += 1
            continue
        items = sorted(children[node] + [node])
        for item in reversed(items):
            agenda.append((item, item == node))
    return order


class SwapEager(StackLikeSystem):
    """Class for the non-projective Swap-Eager system."""

    identifier = "swap_eager"
    projective = False
    transitions = (
        Transition.SHIFT,
        Transition.LEFT_ARC,
        Transition.RIGHT_ARC,
        Transition.SWAP,
    )

    def _check(self, c, t):
        if t is not Transition.SWAP:
            return super()._check(c, t)
        if len(c.stack) < 2:
            return "stack holds fewer than two nodes"
        if not 0 < c.stack[-2] < c.stack[-1]:
            return "stack pair is not in original order"
        return None

    def _apply(self, c, t):
        if t is not Transition.SWAP:
            return super()._apply(c, t)
        stack = c.stack
        return StackConfiguration(
            heads=c.heads,
            stack=stack[:-2] + (stack[-1],),
            buffer=(stack[-2],) + c.buffer,
        )

    def step_bound(self, n):
        # n first shifts, one re-shift per swap, n - 1 arcs
        swaps = n * (n - 1) // 2
        return n + 2 * swaps + n - 1

    def _oracle_context(self, gold):
        context = super()._oracle_context(gold)
        context["order"] = projective_order(gold)
        return context

    def _oracle_candidates(self, c, gold, context):
        if len(c.stack) >= 2:
            top, second = c.stack[-1], c.stack[-2]
            if second != 0 and gold[second] == top and self._collected(
                c, second, context
            ):
                yield Transition.LEFT_ARC
            if gold[top] == second and self._collected(c, top, context):
                yield Transition.RIGHT_ARC
            order = context["order"]
            if second != 0 and order[top] < order[second]:
                yield Transition.SWAP
        yield Transition.SHIFT
