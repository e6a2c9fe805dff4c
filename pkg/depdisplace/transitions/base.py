"""
Base transition system class and the tree utilities shared by every parser.

A transition system is a state machine over configurations. Each concrete
system names its transition set, how configurations start and end, and the
precondition of every transition. Configurations are immutable values, so
every operation here is pure.
"""

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from depdisplace.exceptions import IllegalTransitionError
from depdisplace.logger import logger

# Marker stored in Configuration.heads for nodes without a head yet
NO_HEAD = -1


class Transition(enum.Enum):
    """Transition kinds, declared in the fixed legality order"""

    SHIFT = "SHIFT"
    LEFT_ARC = "LEFT_ARC"
    RIGHT_ARC = "RIGHT_ARC"
    REDUCE = "REDUCE"
    NO_ARC = "NO_ARC"
    SWAP = "SWAP"

    def __str__(self):
        return self.value


@dataclass(frozen=True, order=True)
class Arc:
    """Dependency arc from head to dependent. Node 0 is the artificial root."""

    head: int
    dependent: int

    def __post_init__(self):
        if self.head == self.dependent:
            raise ValueError(f"Arc {self.head}->{self.dependent} is a self-loop")
        if self.dependent < 1 or self.head < 0:
            raise ValueError(
                f"Arc {self.head}->{self.dependent} has an invalid endpoint"
            )


@dataclass(frozen=True)
class Configuration:
    """Arc set shared by all configuration schemas.

    heads[k] is the head of node k or NO_HEAD; heads[0] is always NO_HEAD.
    """

    heads: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.heads) - 1

    @property
    def arcs(self) -> frozenset[Arc]:
        return frozenset(
            Arc(head, dep) for dep, head in enumerate(self.heads) if head != NO_HEAD
        )

    def has_head(self, node: int) -> bool:
        return self.heads[node] != NO_HEAD

    def with_arc(self, head: int, dependent: int) -> tuple[int, ...]:
        """Returns the heads tuple extended with head->dependent"""
        heads = self.heads
        return heads[:dependent] + (head,) + heads[dependent + 1 :]


def pad_nodes(nodes, width=3):
    """First width nodes, padded with None"""
    nodes = tuple(nodes[:width])
    return nodes + (None,) * (width - len(nodes))


def arcs_of(heads: Sequence[int]) -> frozenset[Arc]:
    """Converts a head list (heads[k-1] is the head of token k) to arcs"""
    return frozenset(Arc(head, dep) for dep, head in enumerate(heads, start=1))


def heads_of(arcs: Iterable[Arc], n: int) -> tuple[int, ...]:
    """Converts a complete arc set over 1..n into a head list"""
    heads = [NO_HEAD] * n
    for arc in arcs:
        if not 1 <= arc.dependent <= n or arc.head > n:
            raise ValueError(f"Arc {arc.head}->{arc.dependent} outside 0..{n}")
        if heads[arc.dependent - 1] != NO_HEAD:
            raise ValueError(f"Token {arc.dependent} has more than one head")
        heads[arc.dependent - 1] = arc.head
    if NO_HEAD in heads:
        raise ValueError(f"Token {heads.index(NO_HEAD) + 1} has no head")
    return tuple(heads)


def tree_problem(heads: Sequence[int]) -> str | None:
    """Returns why a head list is not a 0-rooted tree, or None when it is"""
    n = len(heads)
    for dep, head in enumerate(heads, start=1):
        if not 0 <= head <= n:
            return f"head {head} of token {dep} outside 0..{n}"
        if head == dep:
            return f"token {dep} is its own head"
    # Every token must reach 0 within n steps
    for dep in range(1, n + 1):
        node, steps = dep, 0
        while node != 0:
            node = heads[node - 1]
            steps += 1
            if steps > n:
                return f"token {dep} lies on a cycle"
    return None


def is_tree(heads: Sequence[int]) -> bool:
    return tree_problem(heads) is None


def crosses(first: tuple[int, int], second: tuple[int, int]) -> bool:
    """True when two arcs, given as endpoint pairs, cross above the sentence"""
    l1, r1 = sorted(first)
    l2, r2 = sorted(second)
    return l1 < l2 < r1 < r2 or l2 < l1 < r2 < r1


def is_projective(arcs: Iterable[Arc], n: int) -> bool:
    """True iff no two arcs of the tree cross, root drawn at position 0"""
    heads = heads_of(arcs, n)
    problem = tree_problem(heads)
    if problem is not None:
        raise ValueError(f"Not a tree: {problem}")
    spans = [tuple(sorted((head, dep))) for dep, head in enumerate(heads, start=1)]
    for index, first in enumerate(spans):
        for second in spans[index + 1 :]:
            if crosses(first, second):
                return False
    return True


class BaseSystem(object):
    """Base Abstract Class for transition systems.

    Subclasses declare the transition set and implement the configuration
    schema. Preconditions live in a single method, _check, which returns the
    violated precondition as text, so legality listing and apply() cannot
    disagree.
    """

    # Identifier used by the dispatcher, reports and model files
    identifier = ""

    # Whether every complete derivation yields a projective tree
    projective = False

    # Transition set in the fixed legality order
    transitions: tuple[Transition, ...] = ()

    # Longest sentence the exact enumerator accepts
    max_enumeration_length = 7

    def __repr__(self):
        return f"{type(self).__name__}()"

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(self.identifier)

    def initial_configuration(self, n: int):
        """Builds c_s(n) for a sentence of n tokens"""
        if n < 1:
            raise ValueError(
                f"System {self.identifier}: sentence length must be >= 1, got {n}"
            )
        return self._initial(n)

    def _initial(self, n: int):
        raise NotImplementedError

    def is_terminal(self, c) -> bool:
        raise NotImplementedError

    def _check(self, c, t: Transition) -> str | None:
        """Returns the violated precondition of t in c, None when t is legal"""
        raise NotImplementedError

    def _apply(self, c, t: Transition):
        raise NotImplementedError

    def legal_transitions(self, c) -> list[Transition]:
        """Transitions whose preconditions hold, in the fixed legality order"""
        if self.is_terminal(c):
            raise IllegalTransitionError(
                self.identifier, None, "configuration is terminal"
            )
        return [t for t in self.transitions if self._check(c, t) is None]

    def apply(self, c, t: Transition):
        """Applies a legal transition and returns the next configuration"""
        if t not in self.transitions:
            raise IllegalTransitionError(
                self.identifier, t, "transition does not belong to this system"
            )
        if self.is_terminal(c):
            raise IllegalTransitionError(
                self.identifier, t, "configuration is terminal"
            )
        reason = self._check(c, t)
        if reason is not None:
            raise IllegalTransitionError(self.identifier, t, reason)
        return self._apply(c, t)

    def finalize(self, c) -> frozenset[Arc]:
        """Completes a terminal configuration by attaching headless tokens to 0"""
        if not self.is_terminal(c):
            raise ValueError(
                f"System {self.identifier}: finalize needs a terminal configuration"
            )
        return arcs_of(self.final_heads(c))

    def final_heads(self, c) -> tuple[int, ...]:
        """Head list of the completed tree of a terminal configuration"""
        return tuple(0 if head == NO_HEAD else head for head in c.heads[1:])

    def step_bound(self, n: int) -> int:
        """Upper bound on explicit transitions of any derivation"""
        raise NotImplementedError

    def signature(self, c):
        """Key that determines every continuation of c.

        The exact enumerator merges configurations with equal signatures.
        """
        return c

    def focus(self, c) -> tuple[tuple[int | None, ...], tuple[int | None, ...]]:
        """Nodes the feature templates look at: (s0, s1, s2), (b0, b1, b2)"""
        return c.focus()

    def static_oracle(self, heads: Sequence[int]) -> list[Transition]:
        """Canonical transition sequence for the gold tree given by heads.

        When the gold tree is out of reach the sequence stays a valid
        derivation that loses as few gold arcs as possible.
        """
        gold = (NO_HEAD,) + tuple(heads)
        context = self._oracle_context(gold)
        c = self.initial_configuration(len(heads))
        sequence = []
        while not self.is_terminal(c):
            t = self._oracle_step(c, gold, context)
            sequence.append(t)
            c = self._apply(c, t)
        return sequence

    def _oracle_context(self, gold: tuple[int, ...]) -> dict:
        children = [[] for _ in gold]
        for dep in range(1, len(gold)):
            children[gold[dep]].append(dep)
        return {"children": children}

    def _oracle_candidates(self, c, gold, context) -> Iterable[Transition]:
        raise NotImplementedError

    def _oracle_step(self, c, gold, context) -> Transition:
        for t in self._oracle_candidates(c, gold, context):
            if self._check(c, t) is None:
                return t
        legal = self.legal_transitions(c)
        losses = [self._lost_gold_arcs(self._apply(c, t), gold) for t in legal]
        best = legal[losses.index(min(losses))]
        logger.debug(
            f"System {self.identifier}: gold tree out of reach, "
            f"best-effort {best} loses {min(losses)} arcs"
        )
        return best

    def _lost_gold_arcs(self, c, gold) -> int:
        """Number of gold arcs that c can no longer build"""
        raise NotImplementedError

    @staticmethod
    def _collected(c, node: int, context) -> bool:
        """True when every gold dependent of node is attached to it in c"""
        return all(c.heads[dep] == node for dep in context["children"][node])
