import logging
import unittest
from collections import Counter
from fractions import Fraction

import numpy as np

import depdisplace
from depdisplace.sampler import (
    SamplerConfig,
    enumerate_inherent,
    enumerate_trees,
    estimate_emd,
    qualifying_displacements,
    random_walk,
    sample_inherent_bin,
    treebank_key,
    walk_rng,
)
from depdisplace.transitions import Arc, arcs_of
from depdisplace.treebank import DisplacementDistribution

logging.basicConfig(filename="unittest.log", level=logging.DEBUG)


class TestWalks(unittest.TestCase):
    def test_single_token(self):
        for identifier in depdisplace.systems:
            system = depdisplace.create(identifier)
            self.assertEqual(random_walk(system, 1, walk_rng(1, 2)), {Arc(0, 1)})

    def test_same_stream_same_tree(self):
        system = depdisplace.create("covington_np")
        first = random_walk(system, 10, walk_rng(7, 1, 2, 3))
        self.assertEqual(first, random_walk(system, 10, walk_rng(7, 1, 2, 3)))

    def test_treebank_key(self):
        self.assertEqual(treebank_key("en_ewt"), treebank_key("en_ewt"))
        self.assertNotEqual(treebank_key("en_ewt"), treebank_key("de_gsd"))
        self.assertLess(treebank_key("en_ewt"), 2**63)

    def test_qualifying_displacements(self):
        arcs = arcs_of([2, 0, 2])
        self.assertEqual(qualifying_displacements(arcs), [1, -1])
        self.assertEqual(qualifying_displacements(arcs, True), [1, -2, -1])


class TestSampling(unittest.TestCase):
    def setUp(self):
        self.system = depdisplace.create("arc_eager")
        self.config = SamplerConfig(repetitions=3, seed=4, min_bin_sentences=2)

    def test_root_only_bin_is_empty(self):
        with self.assertRaises(depdisplace.EmptyDistributionError):
            sample_inherent_bin(self.system, [1, 1, 1], self.config, 1)

    def test_root_arcs_make_single_tokens_qualify(self):
        config = SamplerConfig(include_root_arcs=True)
        distribution = sample_inherent_bin(self.system, [1, 1], config, 1)
        self.assertEqual(distribution.mass, {-1: 1.0})

    def test_determinism(self):
        lengths = [5, 7, 9, 3]
        first = sample_inherent_bin(self.system, lengths, self.config, 2, "tb", 3)
        second = sample_inherent_bin(self.system, lengths, self.config, 2, "tb", 3)
        self.assertEqual(first, second)

    def test_walks_do_not_depend_on_other_sentences(self):
        config = SamplerConfig(seed=4, include_root_arcs=True, all_arcs=True)
        whole = sample_inherent_bin(self.system, [5, 7, 9, 3], config, 1, "tb")
        prefix = sample_inherent_bin(self.system, [5, 7], config, 1, "tb")
        self.assertEqual((whole.support_count, prefix.support_count), (24, 12))
        for value, probability in prefix.mass.items():
            self.assertLessEqual(
                round(probability * 12), round(whole.mass.get(value, 0.0) * 24)
            )

    def test_repetitions_differ(self):
        lengths = [12] * 30
        first = sample_inherent_bin(self.system, lengths, self.config, 1, "tb")
        second = sample_inherent_bin(self.system, lengths, self.config, 2, "tb")
        self.assertNotEqual(first.mass, second.mass)

    def test_all_arcs_mode(self):
        config = SamplerConfig(all_arcs=True, include_root_arcs=True)
        distribution = sample_inherent_bin(self.system, [4, 6], config, 1)
        self.assertEqual(distribution.support_count, 10)

    def test_empty_bin(self):
        with self.assertRaises(ValueError):
            sample_inherent_bin(self.system, [], self.config, 1)


class TestEstimateEmd(unittest.TestCase):
    def setUp(self):
        self.system = depdisplace.create("arc_standard")
        self.observed = DisplacementDistribution.from_samples([1, 1, -1, 2, -3])

    def test_self_test_gives_zero(self):
        config = SamplerConfig(repetitions=4)
        estimate = estimate_emd(
            self.system, self.observed, [4] * 6, config, self_test=True
        )
        self.assertEqual(estimate.mean_emd, 0.0)
        self.assertEqual(estimate.std_error, 0.0)
        self.assertEqual(estimate.repetitions, 4)

    def test_single_repetition_is_low_confidence(self):
        config = SamplerConfig(repetitions=1)
        estimate = estimate_emd(self.system, self.observed, [4] * 6, config)
        self.assertTrue(estimate.low_confidence)
        self.assertEqual(estimate.std_error, 0.0)
        self.assertEqual(estimate.emds, (estimate.mean_emd,))

    def test_standard_error(self):
        config = SamplerConfig(repetitions=5, seed=2)
        estimate = estimate_emd(self.system, self.observed, [6] * 10, config, "tb")
        values = np.array(estimate.emds)
        self.assertFalse(estimate.low_confidence)
        self.assertAlmostEqual(estimate.mean_emd, values.mean())
        self.assertAlmostEqual(
            estimate.std_error, values.std(ddof=1) / np.sqrt(len(values))
        )
        self.assertEqual(len(estimate.distributions), 5)

    def test_small_bin_is_skipped(self):
        config = SamplerConfig(min_bin_sentences=5)
        self.assertIsNone(
            estimate_emd(self.system, self.observed, [4] * 4, config)
        )

    def test_config_validation(self):
        with self.assertRaises(ValueError):
            SamplerConfig(repetitions=0)
        with self.assertRaises(ValueError):
            SamplerConfig(seed=-1)


class TestEnumeration(unittest.TestCase):
    def test_two_tokens_arc_standard(self):
        result = enumerate_inherent(depdisplace.create("arc_standard"), 2)
        self.assertEqual(result.exact, {-1: Fraction(1, 2), 1: Fraction(1, 2)})
        self.assertEqual(result.no_arc_probability, Fraction(1, 2))

    def test_one_token_with_root_arcs(self):
        for identifier in depdisplace.systems:
            system = depdisplace.create(identifier)
            result = enumerate_inherent(system, 1, include_root_arcs=True)
            self.assertEqual(result.exact, {-1: Fraction(1)})

    def test_one_token_without_root_arcs(self):
        result = enumerate_inherent(depdisplace.create("arc_eager"), 1)
        self.assertEqual(result.exact, {})
        self.assertTrue(result.distribution.is_empty)
        self.assertEqual(result.no_arc_probability, 1)

    def test_probabilities_sum_to_one(self):
        for identifier in depdisplace.systems:
            system = depdisplace.create(identifier)
            for n in range(2, 6):
                for all_arcs in (False, True):
                    result = enumerate_inherent(system, n, all_arcs=all_arcs)
                    self.assertEqual(sum(result.exact.values()), 1)
                    self.assertNotIn(0, result.exact)

    def test_matches_tree_enumeration(self):
        for identifier in depdisplace.systems:
            system = depdisplace.create(identifier)
            for n in range(2, 5):
                for include_root_arcs in (False, True):
                    expected = self.from_trees(
                        enumerate_trees(system, n), include_root_arcs
                    )
                    result = enumerate_inherent(
                        system, n, include_root_arcs=include_root_arcs
                    )
                    self.assertEqual(result.exact, expected, identifier)

    @staticmethod
    def from_trees(trees, include_root_arcs):
        """One-arc inherent distribution computed tree by tree"""
        mass, total = Counter(), Fraction(0)
        for heads, probability in trees.items():
            values = [
                head - dep
                for dep, head in enumerate(heads, start=1)
                if head != 0 or include_root_arcs
            ]
            if not values:
                continue
            total += probability
            for value in values:
                mass[value] += probability / len(values)
        return {value: mass[value] / total for value in sorted(mass)}

    def test_with_trees(self):
        result = enumerate_inherent(
            depdisplace.create("swap_eager"), 3, with_trees=True
        )
        self.assertEqual(sum(result.trees.values()), 1)
        self.assertEqual(len(result.trees), 16)

    def test_capacity(self):
        system = depdisplace.create("covington_np")
        with self.assertRaises(depdisplace.EnumerationCapacityError):
            enumerate_inherent(system, system.max_enumeration_length + 1)
        with self.assertRaises(depdisplace.EnumerationCapacityError):
            enumerate_trees(system, 7)
        with self.assertRaises(ValueError):
            enumerate_inherent(system, 0)

    def test_monte_carlo_agrees_with_enumeration(self):
        walks = 4000
        for identifier in depdisplace.systems:
            system = depdisplace.create(identifier)
            for n in (2, 3, 4):
                exact = enumerate_inherent(system, n).exact
                config = SamplerConfig(seed=n)
                sampled = sample_inherent_bin(
                    system, [n] * walks, config, 1, identifier
                )
                count = sampled.support_count
                for value, probability in exact.items():
                    p = float(probability)
                    sigma = np.sqrt(p * (1 - p) / count)
                    observed = sampled.mass.get(value, 0.0)
                    self.assertLessEqual(
                        abs(observed - p),
                        4.5 * sigma + 1e-12,
                        f"{identifier} n={n} d={value}",
                    )
                self.assertLessEqual(set(sampled.mass), set(exact))


if __name__ == "__main__":
    unittest.main()
