"""
Inherent displacement distributions of transition systems.

A system's inherent distribution is what it produces when every step picks
one of the legal transitions uniformly at random: run the walk to a
terminal configuration, finalize the tree, then draw one qualifying arc of
that tree uniformly. It depends on sentence lengths only.

Sampling estimates it by seeded random walks. The exact enumerators expand
the whole branching process for short sentences and serve as an oracle.
"""

import hashlib
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from depdisplace.exceptions import EmptyDistributionError, EnumerationCapacityError
from depdisplace.logger import logger
from depdisplace.metrics import emd
from depdisplace.treebank import DisplacementDistribution

# Longest sentence for which enumerate_trees lists every reachable tree
TREE_ENUMERATION_LIMIT = 6


@dataclass(frozen=True)
class SamplerConfig:
    repetitions: int = 10
    seed: int = 0
    include_root_arcs: bool = False
    min_bin_sentences: int = 5
    all_arcs: bool = False

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.min_bin_sentences < 0:
            raise ValueError("min_bin_sentences must be nonnegative")


@dataclass(frozen=True)
class EmdEstimate:
    """Mean EMD over repetitions and its standard error"""

    mean_emd: float
    std_error: float
    repetitions: int
    emds: tuple[float, ...] = ()
    distributions: tuple[DisplacementDistribution, ...] = field(
        default=(), repr=False, compare=False
    )

    @property
    def low_confidence(self) -> bool:
        return self.repetitions < 2


@dataclass(frozen=True)
class InherentEnumeration:
    """
    Exact inherent distribution of one system at one sentence length

    exact holds rational probabilities; distribution is its float copy.
    trees maps every reachable head tuple to its probability when requested.
    """

    system: str
    n: int
    exact: dict[int, Fraction]
    distribution: DisplacementDistribution
    no_arc_probability: Fraction
    trees: dict[tuple[int, ...], Fraction] | None = None


def treebank_key(name: str) -> int:
    """Stable 63-bit key of a treebank name for RNG stream derivation"""
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def walk_rng(seed: int, *identity: int) -> np.random.Generator:
    """Generator for the task identified by seed and identity"""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=tuple(identity))
    )


def random_walk(system, n: int, rng: np.random.Generator, return_steps=False):
    """
    Runs the system with uniformly random legal transitions

    :param system: transition system
    :param n: sentence length
    :param rng: numpy random generator
    :param return_steps: also return the number of applied transitions
    :return: finalized arc set, or (arcs, steps)
    """
    c = system.initial_configuration(n)
    steps = 0
    while not system.is_terminal(c):
        legal = system.legal_transitions(c)
        c = system.apply(c, legal[int(rng.integers(len(legal)))])
        steps += 1
    arcs = system.finalize(c)
    if return_steps:
        return arcs, steps
    return arcs


def qualifying_displacements(arcs, include_root_arcs=False) -> list[int]:
    """Displacements of the arcs that may be sampled, ordered by dependent"""
    return [
        arc.head - arc.dependent
        for arc in sorted(arcs, key=lambda arc: arc.dependent)
        if arc.head != 0 or include_root_arcs
    ]


def sample_inherent_bin(
    system,
    lengths: Sequence[int],
    config: SamplerConfig,
    repetition_index: int,
    treebank: str = "",
    bin_index: int = 0,
) -> DisplacementDistribution:
    """
    Samples the inherent distribution for one bin and repetition

    One random walk per sentence length. Each walk has its own generator
    derived from (seed, treebank, bin, repetition, ordinal), so the result
    does not depend on iteration order or parallelism.

    :param system: transition system
    :param lengths: lengths of the bin's sentences
    :param config: sampler settings
    :param repetition_index: repetition number, 1-based
    :param treebank: treebank name entering the stream identity
    :param bin_index: bin position entering the stream identity
    :return: normalized distribution
    """
    if not lengths:
        raise ValueError("sample_inherent_bin needs a nonempty bin")
    key = treebank_key(treebank)
    samples = []
    for ordinal, n in enumerate(lengths):
        rng = walk_rng(config.seed, key, bin_index, repetition_index, ordinal)
        arcs = random_walk(system, n, rng)
        displacements = qualifying_displacements(arcs, config.include_root_arcs)
        if not displacements:
            continue
        if config.all_arcs:
            samples.extend(displacements)
        else:
            samples.append(displacements[int(rng.integers(len(displacements)))])
    if not samples:
        raise EmptyDistributionError(
            f"no walk of system {system.identifier} produced a qualifying arc"
        )
    return DisplacementDistribution.from_samples(samples)


def estimate_emd(
    system,
    observed: DisplacementDistribution,
    lengths: Sequence[int],
    config: SamplerConfig,
    treebank: str = "",
    bin_index: int = 0,
    self_test: bool = False,
) -> EmdEstimate | None:
    """
    Mean EMD between observed and sampled inherent distributions

    Returns None for a bin with fewer than config.min_bin_sentences
    sentences. With self_test the observed distribution stands in for
    every sampled one.
    """
    label = treebank or system.identifier
    if len(lengths) < config.min_bin_sentences:
        logger.warning(
            f"Bin {bin_index} of {label}: skipped, {len(lengths)} sentences "
            f"below {config.min_bin_sentences}"
        )
        return None
    distributions, emds = [], []
    for repetition in range(1, config.repetitions + 1):
        if self_test:
            sampled = observed
        else:
            sampled = sample_inherent_bin(
                system, lengths, config, repetition, treebank, bin_index
            )
        distance = emd(observed, sampled)
        logger.debug(
            f"System {system.identifier}: {label} bin {bin_index} "
            f"repetition {repetition} EMD {distance:.6f}"
        )
        distributions.append(sampled)
        emds.append(distance)
    values = np.asarray(emds)
    if len(values) > 1:
        std_error = float(values.std(ddof=1) / np.sqrt(len(values)))
    else:
        std_error = 0.0
    return EmdEstimate(
        mean_emd=float(values.mean()),
        std_error=std_error,
        repetitions=len(values),
        emds=tuple(emds),
        distributions=tuple(distributions),
    )


def _check_capacity(system, n, limit):
    if n < 1:
        raise ValueError(f"System {system.identifier}: n must be >= 1, got {n}")
    if n > limit:
        raise EnumerationCapacityError(system.identifier, n, limit)


def _qualifies(head, include_root_arcs):
    return head != 0 or include_root_arcs


def _new_arc(before, after):
    """The arc added by one transition as (head, dependent), or None"""
    for dep in range(1, len(after.heads)):
        if before.heads[dep] != after.heads[dep]:
            return after.heads[dep], dep
    return None


class _Enumerator(object):
    """
    Backward expansion of the branching process, memoized by signature

    For each signature it keeps the law of the number q of qualifying arcs
    still to come and, for every (q, d), the expected number of those arcs
    at displacement d jointly with q.
    """

    def __init__(self, system, include_root_arcs):
        self.system = system
        self.include_root_arcs = include_root_arcs
        self.memo = {}

    def expand(self, c):
        key = self.system.signature(c)
        if key in self.memo:
            return self.memo[key]
        if self.system.is_terminal(c):
            result = self._terminal(c)
        else:
            result = self._branch(c)
        self.memo[key] = result
        return result

    def _terminal(self, c):
        displacements = []
        if self.include_root_arcs:
            displacements = [-dep for dep in range(1, c.n + 1) if not c.has_head(dep)]
        q = len(displacements)
        joint = {}
        for d in displacements:
            joint[(q, d)] = joint.get((q, d), 0) + Fraction(1)
        return {q: Fraction(1)}, joint

    def _branch(self, c):
        legal = self.system.legal_transitions(c)
        share = Fraction(1, len(legal))
        law, joint = defaultdict(Fraction), defaultdict(Fraction)
        for t in legal:
            following = self.system.apply(c, t)
            sub_law, sub_joint = self.expand(following)
            arc = _new_arc(c, following)
            added = arc is not None and _qualifies(arc[0], self.include_root_arcs)
            shift = 1 if added else 0
            for q, probability in sub_law.items():
                law[q + shift] += share * probability
                if added:
                    joint[(q + 1, arc[0] - arc[1])] += share * probability
            for (q, d), weight in sub_joint.items():
                joint[(q + shift, d)] += share * weight
        return dict(law), dict(joint)


def enumerate_inherent(
    system, n: int, include_root_arcs=False, all_arcs=False, with_trees=False
) -> InherentEnumeration:
    """
    Exact inherent distribution at sentence length n

    In one-arc mode a walk whose tree has no qualifying arc contributes
    nothing, so the result is conditioned on at least one qualifying arc.
    In all-arcs mode every qualifying arc of every tree is pooled.

    :param system: transition system
    :param n: sentence length, at most system.max_enumeration_length
    :param include_root_arcs: let arcs headed by node 0 qualify
    :param all_arcs: pool every qualifying arc instead of drawing one
    :param with_trees: also return the probability of every tree
    """
    _check_capacity(system, n, system.max_enumeration_length)
    enumerator = _Enumerator(system, include_root_arcs)
    law, joint = enumerator.expand(system.initial_configuration(n))
    logger.debug(
        f"System {system.identifier}: n={n} expanded "
        f"{len(enumerator.memo)} signatures"
    )
    mass = defaultdict(Fraction)
    if all_arcs:
        total = sum((q * p for q, p in law.items()), Fraction(0))
        for (q, d), weight in joint.items():
            mass[d] += weight
    else:
        total = sum((p for q, p in law.items() if q > 0), Fraction(0))
        for (q, d), weight in joint.items():
            mass[d] += weight / q
    exact = {d: mass[d] / total for d in sorted(mass)} if total else {}
    if exact:
        distribution = DisplacementDistribution.from_counts(
            {d: float(p) for d, p in exact.items()}, support_count=1
        )
    else:
        distribution = DisplacementDistribution.empty()
    return InherentEnumeration(
        system=system.identifier,
        n=n,
        exact=exact,
        distribution=distribution,
        no_arc_probability=law.get(0, Fraction(0)),
        trees=enumerate_trees(system, n) if with_trees else None,
    )


def enumerate_trees(system, n: int) -> dict[tuple[int, ...], Fraction]:
    """
    Probability of every finalized tree under uniformly random transitions

    Configurations form a DAG; probability mass flows forward through it in
    topological order and collects at terminal configurations.

    :return: head tuple (heads[k-1] is the head of token k) -> probability
    """
    limit = min(TREE_ENUMERATION_LIMIT, system.max_enumeration_length)
    _check_capacity(system, n, limit)
    start = system.initial_configuration(n)
    successors, indegree = {}, defaultdict(int)
    agenda = [start]
    while agenda:
        c = agenda.pop()
        if c in successors:
            continue
        if system.is_terminal(c):
            successors[c] = []
            continue
        following = [system.apply(c, t) for t in system.legal_transitions(c)]
        successors[c] = following
        for child in following:
            indegree[child] += 1
            if child not in successors:
                agenda.append(child)
    probability = defaultdict(Fraction)
    probability[start] = Fraction(1)
    trees = defaultdict(Fraction)
    ready = [start]
    while ready:
        c = ready.pop()
        following = successors[c]
        if not following:
            trees[system.final_heads(c)] += probability[c]
            continue
        share = probability[c] / len(following)
        for child in following:
            probability[child] += share
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
    return dict(trees)
