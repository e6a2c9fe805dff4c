import logging
import unittest
from pathlib import Path

import yaml

import depdisplace
from depdisplace.transitions import arcs_of, is_projective
from depdisplace.treebank import (
    BinSpec,
    bin_sentences,
    load_treebank,
    observed_distribution,
    projectivity_stats,
)

logging.basicConfig(filename="unittest.log", level=logging.DEBUG)
config_path = Path(__file__).with_name("config.yaml")


class TestUDTreebanks(unittest.TestCase):
    @staticmethod
    def load_treebanks():
        with open(config_path, "r") as conf:
            config = yaml.safe_load(conf)
        root = Path(config["treebank_root"]).expanduser()
        found = []
        for name in config["treebanks"]:
            train, test = root / name / "train.conllu", root / name / "test.conllu"
            if train.is_file() and test.is_file():
                found.append(load_treebank(name, train, test))
        return found

    def setUp(self):
        self.treebanks = self.load_treebanks()
        if not self.treebanks:
            self.skipTest("no Universal Dependencies treebank available")

    def test_observed_distribution_per_bin(self):
        for treebank in self.treebanks:
            assignment = bin_sentences(treebank.test, BinSpec.default())
            for sentences in assignment.bins.values():
                if not sentences:
                    continue
                distribution = observed_distribution(sentences)
                self.assertAlmostEqual(sum(distribution.mass.values()), 1.0)

    def test_projective_oracles_reproduce_projective_gold(self):
        for treebank in self.treebanks:
            for identifier in ("arc_standard", "arc_eager", "covington_proj"):
                system = depdisplace.create(identifier)
                for sentence in treebank.test[:200]:
                    n = len(sentence)
                    if not is_projective(arcs_of(sentence.heads), n):
                        continue
                    c = system.initial_configuration(n)
                    for t in system.static_oracle(sentence.heads):
                        c = system.apply(c, t)
                    self.assertEqual(system.final_heads(c), sentence.heads)

    def test_nonprojective_oracles_reproduce_every_gold_tree(self):
        for treebank in self.treebanks:
            for identifier in ("swap_eager", "covington_np"):
                system = depdisplace.create(identifier)
                for sentence in treebank.test[:200]:
                    c = system.initial_configuration(len(sentence))
                    for t in system.static_oracle(sentence.heads):
                        c = system.apply(c, t)
                    self.assertEqual(system.final_heads(c), sentence.heads)

    def test_projectivity_stats(self):
        for treebank in self.treebanks:
            stats = projectivity_stats(treebank)
            self.assertEqual(stats.test_trees, len(treebank.test))
            self.assertLess(stats.nonprojective_tree_rate, 0.5)


if __name__ == "__main__":
    unittest.main()
