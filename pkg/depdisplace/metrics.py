"""
Displacement, earth mover's distance, attachment scores and the statistics
used to relate them.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import betainc

from depdisplace.exceptions import EmptyDistributionError, UndefinedCorrelationError
from depdisplace.treebank import DisplacementDistribution


@dataclass(frozen=True)
class UasScore:
    """Unlabeled attachment: correct heads out of total tokens"""

    correct: int
    total: int

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError("UAS needs at least one token")
        if not 0 <= self.correct <= self.total:
            raise ValueError(f"correct={self.correct} outside 0..{self.total}")

    @property
    def uas(self) -> float:
        return self.correct / self.total

    @property
    def percentage(self) -> float:
        return 100.0 * self.correct / self.total

    def __add__(self, other):
        return UasScore(self.correct + other.correct, self.total + other.total)


@dataclass
class DisplacementPR:
    """
    Per-displacement attachment counts

    precision and recall return None where the denominator is zero; such
    cells are left out of any aggregation.
    """

    predicted: Counter = field(default_factory=Counter)
    gold: Counter = field(default_factory=Counter)
    correct: Counter = field(default_factory=Counter)

    def displacements(self) -> list[int]:
        return sorted(set(self.predicted) | set(self.gold))

    def precision(self, d: int) -> float | None:
        if not self.predicted[d]:
            return None
        return self.correct[d] / self.predicted[d]

    def recall(self, d: int) -> float | None:
        if not self.gold[d]:
            return None
        return self.correct[d] / self.gold[d]


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int

    @property
    def r_squared(self) -> float:
        return self.r * self.r


def displacement(head_pos: int, dep_pos: int) -> int:
    """Signed head-minus-dependent distance; negative for rightward arcs"""
    if head_pos == dep_pos:
        raise ValueError(f"Displacement undefined for a self-loop at {head_pos}")
    return head_pos - dep_pos


def _mass(distribution) -> Mapping[int, float]:
    if isinstance(distribution, DisplacementDistribution):
        if distribution.is_empty:
            raise EmptyDistributionError("EMD needs nonempty distributions")
        return distribution.mass
    if not distribution:
        raise EmptyDistributionError("EMD needs nonempty distributions")
    return distribution


def emd(p, q) -> float:
    """
    Earth mover's distance on the integer line with unit ground distance

    Equals the L1 distance between the two CDFs evaluated on every integer
    between the smallest and largest support point of either distribution.

    :param p: DisplacementDistribution or {value: probability} mapping
    :param q: DisplacementDistribution or {value: probability} mapping
    :return: nonnegative distance
    """
    p, q = _mass(p), _mass(q)
    low = min(min(p), min(q))
    high = max(max(p), max(q))
    p_grid = np.zeros(high - low + 1)
    q_grid = np.zeros(high - low + 1)
    for value, probability in p.items():
        p_grid[value - low] += probability
    for value, probability in q.items():
        q_grid[value - low] += probability
    return float(np.abs(np.cumsum(p_grid) - np.cumsum(q_grid)).sum())


def _noise_floor(values) -> float:
    """Spread below which a series is numerically constant"""
    values = np.asarray(values, dtype=float)
    return 8 * len(values) * np.finfo(float).eps * float(np.abs(values).max())


def uas(predicted: Sequence[int], gold: Sequence[int]) -> UasScore:
    """Tokens whose predicted head equals the gold head, root arcs included"""
    if len(predicted) != len(gold):
        raise ValueError(
            f"Predicted and gold lengths differ: {len(predicted)} != {len(gold)}"
        )
    correct = sum(1 for p, g in zip(predicted, gold) if p == g)
    return UasScore(correct, len(gold))


def delta_uas(scores: Mapping[str, float]) -> dict[str, float]:
    """Each system's UAS minus the mean over all given systems"""
    if len(scores) < 2:
        raise ValueError("delta_uas needs at least two systems")
    values = np.asarray(list(scores.values()), dtype=float)
    deltas = values - values.mean()
    # Rounding residue of the mean is not a difference between systems
    deltas[np.abs(deltas) <= _noise_floor(values)] = 0.0
    return {system: float(d) for system, d in zip(scores, deltas)}


def pairwise_deltas(uas_by_alg, emd_by_alg, a1, a2) -> tuple[float, float]:
    """(UAS[a1] - UAS[a2], EMD[a1] - EMD[a2])"""
    for system in (a1, a2):
        if system not in uas_by_alg or system not in emd_by_alg:
            raise ValueError(f"System {system}: missing UAS or EMD value")
    return uas_by_alg[a1] - uas_by_alg[a2], emd_by_alg[a1] - emd_by_alg[a2]


def pr_by_displacement(
    predicted: Sequence[Sequence[int]],
    gold: Sequence[Sequence[int]],
    include_root_arcs: bool = False,
) -> DisplacementPR:
    """
    Counts predicted, gold and correct arcs per displacement

    :param predicted: predicted head lists, one per sentence
    :param gold: gold head lists aligned with predicted
    :param include_root_arcs: also count arcs headed by node 0
    """
    if len(predicted) != len(gold):
        raise ValueError(f"{len(predicted)} predicted trees for {len(gold)} gold trees")
    counts = DisplacementPR()
    for index, (predicted_heads, gold_heads) in enumerate(zip(predicted, gold)):
        if len(predicted_heads) != len(gold_heads):
            raise ValueError(f"Tree {index}: predicted and gold lengths differ")
        for dep, (p, g) in enumerate(zip(predicted_heads, gold_heads), start=1):
            if p != 0 or include_root_arcs:
                counts.predicted[displacement(p, dep)] += 1
            if g != 0 or include_root_arcs:
                counts.gold[displacement(g, dep)] += 1
                if p == g:
                    counts.correct[displacement(g, dep)] += 1
    return counts


def _t_two_sided(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t"""
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return min(1.0, max(0.0, p))


def welch_t_from_summary(m1, s1, n1, m2, s2, n2) -> float:
    """
    Two-sided p-value of Welch's t-test from means, standard deviations
    and sample sizes

    With both spreads zero the test degenerates: p is 1 for equal means
    and 0 otherwise.
    """
    if n1 < 2 or n2 < 2:
        raise ValueError("Welch's test needs at least two samples per group")
    if s1 < 0 or s2 < 0:
        raise ValueError("Standard deviations must be nonnegative")
    v1, v2 = s1 * s1 / n1, s2 * s2 / n2
    if v1 + v2 == 0:
        return 1.0 if m1 == m2 else 0.0
    t = (m1 - m2) / np.sqrt(v1 + v2)
    df = (v1 + v2) ** 2 / (v1 * v1 / (n1 - 1) + v2 * v2 / (n2 - 1))
    return _t_two_sided(float(t), float(df))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Product-moment correlation with a two-sided t-based p-value"""
    if len(xs) != len(ys):
        raise ValueError(f"Series lengths differ: {len(xs)} != {len(ys)}")
    if len(xs) < 3:
        raise ValueError("pearson needs at least three points")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if np.sqrt(sxx) <= _noise_floor(x) or np.sqrt(syy) <= _noise_floor(y):
        raise UndefinedCorrelationError("series is constant")
    r = float(np.clip((dx @ dy) / np.sqrt(sxx * syy), -1.0, 1.0))
    n = len(x)
    if 1.0 - abs(r) <= 8 * n * np.finfo(float).eps:
        r = float(np.sign(r))
        return CorrelationResult(r, 0.0, n)
    # t = r sqrt(df / (1 - r^2)), so df / (df + t^2) = 1 - r^2
    p = float(betainc((n - 2) / 2.0, 0.5, 1.0 - r * r))
    return CorrelationResult(r, min(1.0, max(0.0, p)), n)
