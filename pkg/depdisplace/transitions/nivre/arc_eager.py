"""
Arc-Eager support

Arcs link the stack top and the buffer front, so right dependents attach as
soon as they are read. No cleanup transition: the configuration is terminal
once the buffer is empty and leftover stack nodes are attached to the root.

"""

from depdisplace.transitions.base import Transition
from depdisplace.transitions.stack_like import StackConfiguration, StackLikeSystem


class ArcEager(StackLikeSystem):
    """Class for the projective Arc-Eager system."""

    identifier = "arc_eager"
    projective = True
    transitions = (
        Transition.SHIFT,
        Transition.LEFT_ARC,
        Transition.RIGHT_ARC,
        Transition.REDUCE,
    )

    def is_terminal(self, c):
        return not c.buffer

    def _check(self, c, t):
        top = c.stack[-1] if c.stack else None
        if t is Transition.REDUCE:
            if top is None or top == 0:
                return "stack top is the artificial root"
            if not c.has_head(top):
                return "stack top has no head"
            return None
        if not c.buffer:
            return "buffer is empty"
        if t is Transition.SHIFT:
            return None
        if top is None:
            return "stack is empty"
        if t is Transition.LEFT_ARC:
            if top == 0:
                return "stack top is the artificial root"
            if c.has_head(top):
                return "stack top already has a head"
        return None

    def _apply(self, c, t):
        stack, buffer = c.stack, c.buffer
        if t is Transition.SHIFT:
            return StackConfiguration(
                heads=c.heads, stack=stack + (buffer[0],), buffer=buffer[1:]
            )
        if t is Transition.LEFT_ARC:
            return StackConfiguration(
                heads=c.with_arc(buffer[0], stack[-1]), stack=stack[:-1], buffer=buffer
            )
        if t is Transition.RIGHT_ARC:
            return StackConfiguration(
                heads=c.with_arc(stack[-1], buffer[0]),
                stack=stack + (buffer[0],),
                buffer=buffer[1:],
            )
        return StackConfiguration(heads=c.heads, stack=stack[:-1], buffer=buffer)

    def step_bound(self, n):
        return 2 * n

    def signature(self, c):
        return c.stack, c.buffer, tuple(c.has_head(node) for node in c.stack)

    def _oracle_candidates(self, c, gold, context):
        top, front = c.stack[-1], c.buffer[0]
        if gold[top] == front:
            yield Transition.LEFT_ARC
        if gold[front] == top:
            yield Transition.RIGHT_ARC
        if any(gold[front] == node or gold[node] == front for node in c.stack[:-1]):
            yield Transition.REDUCE
        yield Transition.SHIFT

