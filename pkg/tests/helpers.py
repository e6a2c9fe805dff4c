"""Shared fixtures for the test modules"""

import itertools
import os

import numpy as np

from depdisplace.sampler import random_walk, walk_rng
from depdisplace.transitions import arcs_of, heads_of, is_projective, is_tree
from depdisplace.treebank import Sentence, to_conllu

WALKS = int(os.environ.get("DEPDISPLACE_WALKS", "300"))

UPOS = ["NOUN", "VERB", "ADJ", "ADP", "DET", "PRON", "ADV", "PUNCT"]


def all_trees(n):
    """Every head tuple over 1..n forming a 0-rooted tree"""
    return [
        heads
        for heads in itertools.product(range(n + 1), repeat=n)
        if is_tree(heads)
    ]


def projective_trees(n):
    return [heads for heads in all_trees(n) if is_projective(arcs_of(heads), n)]


def replay(system, n, transitions):
    """Applies transitions from the initial configuration and finalizes"""
    c = system.initial_configuration(n)
    for t in transitions:
        c = system.apply(c, t)
    return heads_of(system.finalize(c), n)


def check_walks(test, system, walks=WALKS, max_length=12, seed=11):
    """Random walks terminate within the step bound and finalize to trees"""
    for index in range(walks):
        n = 1 + index % max_length
        arcs, steps = random_walk(system, n, walk_rng(seed, index), return_steps=True)
        heads = heads_of(arcs, n)
        test.assertTrue(is_tree(heads), f"{system.identifier}: {heads}")
        test.assertLessEqual(steps, system.step_bound(n))
        if system.projective:
            test.assertTrue(is_projective(arcs, n), f"{system.identifier}: {heads}")


def random_sentence(rng, n, ident="", projective=False):
    """Random tree with random forms and tags"""
    while True:
        heads = []
        for dep in range(1, n + 1):
            head = int(rng.integers(0, n))
            heads.append(head if head < dep else head + 1)
        heads = tuple(heads)
        if not is_tree(heads):
            continue
        if projective and not is_projective(arcs_of(heads), n):
            continue
        break
    upos = [UPOS[int(i)] for i in rng.integers(len(UPOS), size=n)]
    forms = [f"w{int(i)}" for i in rng.integers(50, size=n)]
    return Sentence.from_heads(heads, forms=forms, upos=upos, id=ident)


def write_treebank(
    directory, name, train, test, seed=0, max_length=14, sentence=None
):
    """Writes <directory>/<name>/{train,test}.conllu with generated sentences"""
    sentence = sentence or random_sentence
    rng = np.random.default_rng(seed)
    folder = directory / name
    folder.mkdir(parents=True, exist_ok=True)
    for split, count in (("train", train), ("test", test)):
        sentences = [
            sentence(
                rng, int(rng.integers(1, max_length + 1)), f"{name}-{split}-{i}"
            )
            for i in range(count)
        ]
        (folder / f"{split}.conllu").write_text(to_conllu(sentences), encoding="utf-8")
    return folder


NOUN_PHRASES = (("NOUN",), ("PRON",), ("DET", "NOUN"), ("DET", "ADJ", "NOUN"))


def _noun_phrase(rng, room):
    options = [phrase for phrase in NOUN_PHRASES if len(phrase) <= room]
    return options[int(rng.integers(len(options)))]


def grammar_sentence(rng, n, ident=""):
    """
    Sentence of exactly n words from a small phrase grammar

    Every word of a phrase attaches to the phrase's last word, which
    attaches to the main verb; the verb attaches to the root.
    """
    before, after, remaining = [], [], n - 1
    if remaining and rng.random() < 0.7:
        before.append(_noun_phrase(rng, remaining))
        remaining -= len(before[0])
    while remaining:
        roll = rng.random()
        if remaining >= 2 and roll < 0.5:
            piece = ("ADP",) + _noun_phrase(rng, remaining - 1)
        elif roll < 0.85:
            piece = _noun_phrase(rng, remaining)
        else:
            piece = ("ADV",)
        after.append(piece)
        remaining -= len(piece)
    verb = sum(len(piece) for piece in before) + 1
    upos, heads = [], []
    for piece in before + [("VERB",)] + after:
        start = len(upos) + 1
        last = start + len(piece) - 1
        for position, tag in enumerate(piece, start=start):
            upos.append(tag)
            if tag == "VERB":
                heads.append(0)
            else:
                heads.append(last if position < last else verb)
    forms = [f"{tag.lower()}{int(rng.integers(4))}" for tag in upos]
    return Sentence.from_heads(tuple(heads), forms=forms, upos=upos, id=ident)


def previous_word_heads(sentence):
    """Baseline attaching every word to the word before it"""
    return tuple(range(len(sentence)))
