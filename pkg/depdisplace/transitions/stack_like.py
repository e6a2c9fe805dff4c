"""
StackLikeSystem Class is abstract class for stack-and-buffer transition systems

Arc-Standard is the plain member of the family; Arc-Eager and Swap-Eager
override the pieces they change.
"""

from dataclasses import dataclass

from depdisplace.transitions.base import (
    NO_HEAD,
    BaseSystem,
    Configuration,
    Transition,
    pad_nodes,
)


@dataclass(frozen=True)
class StackConfiguration(Configuration):
    """Stack (top last) and buffer (front first) of node ids"""

    stack: tuple[int, ...] = (0,)
    buffer: tuple[int, ...] = ()

    def __str__(self):
        return f"Stack : {list(self.stack)}  Buffer : {list(self.buffer)}"

    def focus(self):
        """(s0, s1, s2), (b0, b1, b2) with None for absent positions"""
        return pad_nodes(self.stack[::-1]), pad_nodes(self.buffer)


class StackLikeSystem(BaseSystem):
    """
    This Class is abstract class for working with stack-based systems

    Stack-based systems share one schema:

    * stack:
        Partially processed nodes, artificial root 0 at the bottom.
    * buffer:
        Remaining input nodes in surface order.
    * reduce-style arcs:
        LEFT_ARC and RIGHT_ARC link the two topmost stack nodes and pop the
        dependent.
    """

    transitions = (Transition.SHIFT, Transition.LEFT_ARC, Transition.RIGHT_ARC)

    def _initial(self, n):
        return StackConfiguration(
            heads=(NO_HEAD,) * (n + 1), stack=(0,), buffer=tuple(range(1, n + 1))
        )

    def is_terminal(self, c):
        return not c.buffer and len(c.stack) <= 2

    def _check(self, c, t):
        if t is Transition.SHIFT:
            if not c.buffer:
                return "buffer is empty"
            return None
        if len(c.stack) < 2:
            return "stack holds fewer than two nodes"
        if t is Transition.LEFT_ARC and c.stack[-2] == 0:
            return "second-from-top is the artificial root"
        return None

    def _apply(self, c, t):
        stack, buffer = c.stack, c.buffer
        if t is Transition.SHIFT:
            return StackConfiguration(
                heads=c.heads, stack=stack + (buffer[0],), buffer=buffer[1:]
            )
        top, second = stack[-1], stack[-2]
        if t is Transition.LEFT_ARC:
            return StackConfiguration(
                heads=c.with_arc(top, second), stack=stack[:-2] + (top,), buffer=buffer
            )
        return StackConfiguration(
            heads=c.with_arc(second, top), stack=stack[:-1], buffer=buffer
        )

    def step_bound(self, n):
        return 2 * n - 1

    def signature(self, c):
        # Stack and buffer nodes are exactly the headless ones
        return c.stack, c.buffer

    def _oracle_candidates(self, c, gold, context):
        if len(c.stack) >= 2:
            top, second = c.stack[-1], c.stack[-2]
            if second != 0 and gold[second] == top and self._collected(
                c, second, context
            ):
                yield Transition.LEFT_ARC
            if gold[top] == second and self._collected(c, top, context):
                yield Transition.RIGHT_ARC
        yield Transition.SHIFT

    def _lost_gold_arcs(self, c, gold):
        alive = set(c.stack) | set(c.buffer)
        lost = 0
        for dep in range(1, len(gold)):
            head = c.heads[dep]
            if head == gold[dep]:
                continue
            if head != NO_HEAD or dep not in alive or gold[dep] not in alive:
                lost += 1
        return lost
