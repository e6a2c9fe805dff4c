"""
CovingtonLikeSystem Class is abstract class for list-based transition systems

Configurations hold two lists and a buffer. The buffer front j is compared
with the nodes of the left list from right to left; LEFT_ARC, RIGHT_ARC and
NO_ARC move the left-list tail to the right list, SHIFT concatenates both
lists and j into the new left list.
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
class ListConfiguration(Configuration):
    """Left list (tail last), right list and buffer of node ids"""

    left: tuple[int, ...] = (0,)
    right: tuple[int, ...] = ()
    buffer: tuple[int, ...] = ()

    def __str__(self):
        return (
            f"Left : {list(self.left)}  Right : {list(self.right)}"
            f"  Buffer : {list(self.buffer)}"
        )

    def focus(self):
        """Left-list tail and its two predecessors, then the buffer front"""
        return pad_nodes(self.left[::-1]), pad_nodes(self.buffer)


class CovingtonLikeSystem(BaseSystem):
    """
    This Class is abstract class for working with Covington-style systems

    Subclasses decide which links are permitted through _link_problem.
    """

    transitions = (
        Transition.SHIFT,
        Transition.LEFT_ARC,
        Transition.RIGHT_ARC,
        Transition.NO_ARC,
    )

    def _initial(self, n):
        return ListConfiguration(
            heads=(NO_HEAD,) * (n + 1),
            left=(0,),
            right=(),
            buffer=tuple(range(1, n + 1)),
        )

    def is_terminal(self, c):
        return not c.buffer

    def _link_problem(self, c, head: int, dependent: int) -> str | None:
        """Returns why head->dependent may not be added to c"""
        if dependent == 0:
            return "dependent is the artificial root"
        if c.has_head(dependent):
            return "dependent already has a head"
        node = head
        while node > 0:
            if node == dependent:
                return "arc would close a cycle"
            node = c.heads[node]
        return None

    def _check(self, c, t):
        if not c.buffer:
            return "buffer is empty"
        if t is Transition.SHIFT:
            return None
        if not c.left:
            return "left list is empty"
        tail, front = c.left[-1], c.buffer[0]
        if t is Transition.LEFT_ARC:
            return self._link_problem(c, front, tail)
        if t is Transition.RIGHT_ARC:
            return self._link_problem(c, tail, front)
        return None

    def _apply(self, c, t):
        if t is Transition.SHIFT:
            return ListConfiguration(
                heads=c.heads,
                left=c.left + c.right + (c.buffer[0],),
                right=(),
                buffer=c.buffer[1:],
            )
        tail, front = c.left[-1], c.buffer[0]
        heads = c.heads
        if t is Transition.LEFT_ARC:
            heads = c.with_arc(front, tail)
        elif t is Transition.RIGHT_ARC:
            heads = c.with_arc(tail, front)
        return ListConfiguration(
            heads=heads, left=c.left[:-1], right=(tail,) + c.right, buffer=c.buffer
        )

    def step_bound(self, n):
        return n * (n + 1) // 2 + n

    def _oracle_candidates(self, c, gold, context):
        if c.left:
            tail, front = c.left[-1], c.buffer[0]
            if gold[tail] == front:
                yield Transition.LEFT_ARC
            if gold[front] == tail:
                yield Transition.RIGHT_ARC
            for node in c.left[:-1]:
                pending_left = gold[node] == front and not c.has_head(node)
                pending_right = gold[front] == node and not c.has_head(front)
                if pending_left or pending_right:
                    yield Transition.NO_ARC
                    break
        yield Transition.SHIFT

    def _lost_gold_arcs(self, c, gold):
        # Pairs left of the buffer front, and pairs of the front with the
        # right list, are never compared again
        front = c.buffer[0] if c.buffer else len(gold)
        passed = set(c.right)
        lost = 0
        for dep in range(1, len(gold)):
            head = c.heads[dep]
            if head == gold[dep]:
                continue
            if head != NO_HEAD:
                lost += 1
                continue
            if gold[dep] == 0:
                # finalize supplies root arcs
                continue
            far = max(dep, gold[dep])
            near = min(dep, gold[dep])
            if far < front or (far == front and near in passed):
                lost += 1
        return lost
