import logging
import unittest

from helpers import all_trees, check_walks

import depdisplace
from depdisplace.dispatcher import NON_PROJECTIVE, PROJECTIVE
from depdisplace.transitions import (
    Arc,
    Transition,
    arcs_of,
    heads_of,
    is_projective,
    is_tree,
    tree_problem,
)

logging.basicConfig(filename="unittest.log", level=logging.DEBUG)


class TestTreeUtilities(unittest.TestCase):
    def test_arc_rejects_self_loop(self):
        with self.assertRaises(ValueError):
            Arc(2, 2)

    def test_arc_rejects_root_as_dependent(self):
        with self.assertRaises(ValueError):
            Arc(1, 0)

    def test_arcs_and_heads(self):
        arcs = arcs_of([2, 0, 2])
        self.assertEqual(arcs, {Arc(2, 1), Arc(0, 2), Arc(2, 3)})
        self.assertEqual(heads_of(arcs, 3), (2, 0, 2))

    def test_heads_of_errors(self):
        with self.assertRaises(ValueError):
            heads_of({Arc(0, 1)}, 2)
        with self.assertRaises(ValueError):
            heads_of({Arc(0, 1), Arc(2, 1)}, 2)
        with self.assertRaises(ValueError):
            heads_of({Arc(0, 3)}, 2)

    def test_tree_problem(self):
        self.assertIsNone(tree_problem([2, 0, 2]))
        self.assertIn("cycle", tree_problem([2, 1]))
        self.assertIn("own head", tree_problem([1]))
        self.assertIn("outside", tree_problem([5]))
        self.assertFalse(is_tree([0, 3, 2]))

    def test_is_projective(self):
        self.assertTrue(is_projective(arcs_of([2, 0, 2]), 3))
        self.assertFalse(is_projective(arcs_of([3, 4, 0, 3]), 4))
        self.assertTrue(is_projective(arcs_of([0]), 1))
        with self.assertRaises(ValueError):
            is_projective(arcs_of([2, 1]), 2)

    def test_root_arc_counts_for_crossing(self):
        # 0->2 and 1->3 cross
        self.assertFalse(is_projective(arcs_of([3, 0, 0]), 3))

    def test_tree_counts(self):
        # n^(n-1) labelled trees rooted at 0 over n+1 nodes
        self.assertEqual([len(all_trees(n)) for n in range(1, 5)], [1, 3, 16, 125])


class TestDispatcher(unittest.TestCase):
    def test_systems(self):
        self.assertEqual(
            depdisplace.systems,
            [
                "arc_eager",
                "arc_standard",
                "covington_np",
                "covington_proj",
                "swap_eager",
            ],
        )

    def test_create(self):
        for identifier in depdisplace.systems:
            system = depdisplace.create(identifier)
            self.assertEqual(system.identifier, identifier)
            self.assertEqual(system, depdisplace.create(identifier))

    def test_unknown_system(self):
        with self.assertRaises(ValueError) as caught:
            depdisplace.create("arc_hybrid")
        self.assertIn("arc_hybrid", str(caught.exception))

    def test_projectivity_groups(self):
        self.assertEqual(PROJECTIVE, ["arc_eager", "arc_standard", "covington_proj"])
        self.assertEqual(NON_PROJECTIVE, ["covington_np", "swap_eager"])


class TestEverySystem(unittest.TestCase):
    def setUp(self):
        self.systems = [depdisplace.create(name) for name in depdisplace.systems]

    def test_zero_length_is_rejected(self):
        for system in self.systems:
            with self.assertRaises(ValueError):
                system.initial_configuration(0)

    def test_legal_transitions_apply(self):
        for system in self.systems:
            c = system.initial_configuration(4)
            while not system.is_terminal(c):
                legal = system.legal_transitions(c)
                self.assertTrue(legal, system.identifier)
                self.assertEqual(
                    legal, [t for t in system.transitions if t in legal]
                )
                for t in legal:
                    system.apply(c, t)
                c = system.apply(c, legal[-1])

    def test_illegal_transitions_raise(self):
        for system in self.systems:
            c = system.initial_configuration(3)
            legal = system.legal_transitions(c)
            for t in Transition:
                if t in legal:
                    continue
                with self.assertRaises(depdisplace.IllegalTransitionError):
                    system.apply(c, t)

    def test_configurations_are_immutable_values(self):
        for system in self.systems:
            c = system.initial_configuration(3)
            following = system.apply(c, Transition.SHIFT)
            self.assertEqual(c, system.initial_configuration(3))
            self.assertNotEqual(c, following)

    def test_random_walks(self):
        for system in self.systems:
            check_walks(self, system, walks=60, max_length=20, seed=5)


if __name__ == "__main__":
    unittest.main()
