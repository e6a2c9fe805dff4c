import logging
import unittest

from helpers import all_trees, check_walks, projective_trees, replay

import depdisplace
from depdisplace.sampler import enumerate_trees
from depdisplace.transitions import ListConfiguration, Transition

logging.basicConfig(filename="unittest.log", level=logging.DEBUG)

SHIFT, LEFT, RIGHT = Transition.SHIFT, Transition.LEFT_ARC, Transition.RIGHT_ARC
NO_ARC = Transition.NO_ARC


class TestCovingtonProjective(unittest.TestCase):
    def setUp(self):
        self.system = depdisplace.create("covington_proj")

    @staticmethod
    def config(left, buffer, n, arcs=()):
        heads = [-1] * (n + 1)
        for head, dep in arcs:
            heads[dep] = head
        return ListConfiguration(heads=tuple(heads), left=left, buffer=buffer)

    def test_crossing_link_is_rejected(self):
        c = self.config((0, 2), (4,), 4, arcs=[(1, 3)])
        self.assertEqual(self.system.legal_transitions(c), [SHIFT, NO_ARC])
        with self.assertRaises(depdisplace.IllegalTransitionError) as caught:
            self.system.apply(c, RIGHT)
        self.assertIn("cross", caught.exception.reason)

    def test_link_over_headless_node_is_rejected(self):
        c = self.config((0, 1), (3,), 3)
        self.assertEqual(self.system.legal_transitions(c), [SHIFT, NO_ARC])
        with self.assertRaises(depdisplace.IllegalTransitionError) as caught:
            self.system.apply(c, LEFT)
        self.assertIn("headless", caught.exception.reason)

    def test_root_link_may_cover_headless_nodes(self):
        c = self.config((0,), (3,), 3)
        self.assertEqual(self.system.legal_transitions(c), [SHIFT, RIGHT, NO_ARC])

    def test_non_projective_system_accepts_the_same_links(self):
        other = depdisplace.create("covington_np")
        c = self.config((0, 2), (4,), 4, arcs=[(1, 3)])
        self.assertIn(RIGHT, other.legal_transitions(c))

    def test_random_walks(self):
        check_walks(self, self.system)

    def test_oracle_example(self):
        oracle = self.system.static_oracle([2, 0, 2])
        self.assertEqual(replay(self.system, 3, oracle), (2, 0, 2))

    def test_oracle_reproduces_projective_trees(self):
        for n in range(1, 6):
            for heads in projective_trees(n):
                oracle = self.system.static_oracle(heads)
                self.assertEqual(replay(self.system, n, oracle), heads)

    def test_oracle_on_nonprojective_gold_is_a_derivation(self):
        for heads in all_trees(4):
            replay(self.system, 4, self.system.static_oracle(heads))

    def test_reachable_trees_are_the_projective_trees(self):
        for n in range(1, 5):
            trees = enumerate_trees(self.system, n)
            self.assertEqual(set(trees), set(projective_trees(n)))
            self.assertEqual(sum(trees.values()), 1)


if __name__ == "__main__":
    unittest.main()
