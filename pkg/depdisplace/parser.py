"""
Greedy transition-based parser with an averaged perceptron.

Feature templates (version 1), identical for every treebank and system:

* ``bias``
* ``s0.f s0.p s1.f s1.p s2.f s2.p``: FORM and UPOS of the stack top and the
  two nodes below it (Covington: left-list tail and its two predecessors)
* ``b0.f b0.p b1.f b1.p b2.f b2.p``: FORM and UPOS of the first three buffer nodes
* ``s0.lc.p s0.rc.p b0.lc.p b0.rc.p``: UPOS of the leftmost and rightmost
  dependent already attached to s0 and b0
* ``s0.nch``: number of dependents attached to s0
* ``s0.p+b0.p s0.f+b0.p s0.p+b0.f s0.p+b0.p+b1.p``: conjunctions
* ``dist``: |s0 - b0| bucketed as 1, 2, 3, 4, 5+

Each feature is the UTF-8 string ``name=value`` (conjoined values joined by
``|``); node 0 has value ``<ROOT>`` and absent positions ``<NULL>``. The id of
a feature is its BLAKE2b-64 digest read as a little-endian unsigned integer.
"""

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from depdisplace.dispatcher import create
from depdisplace.exceptions import ModelFormatError, SystemMismatchError
from depdisplace.logger import logger
from depdisplace.storage import write_atomic
from depdisplace.treebank import Sentence

TEMPLATE_VERSION = 1

MAGIC = b"DDPM"
FORMAT_VERSION = 1

NULL = "<NULL>"
ROOT = "<ROOT>"


def feature_id(text: str) -> int:
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class FeatureVector:
    """Hashed feature ids, each with implicit value 1"""

    ids: tuple[int, ...]

    @classmethod
    def from_strings(cls, strings: Iterable[str]):
        return cls(tuple(feature_id(text) for text in strings))

    def __len__(self):
        return len(self.ids)


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(eq=False)
class Model:
    """Per-feature weight rows over the transitions of one system"""

    system: str
    weights: dict[int, np.ndarray]
    averaged: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.width = len(create(self.system).transitions)
        for row in self.weights.values():
            if row.shape != (self.width,):
                raise ValueError(
                    f"System {self.system}: weight rows must have length {self.width}"
                )

    def scores(self, features: FeatureVector) -> np.ndarray:
        scores = np.zeros(self.width)
        for feature in features.ids:
            row = self.weights.get(feature)
            if row is not None:
                scores += row
        return scores

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.system == other.system
            and self.averaged == other.averaged
            and self.meta == other.meta
            and self.weights.keys() == other.weights.keys()
            and all(
                np.array_equal(row, other.weights[key])
                for key, row in self.weights.items()
            )
        )


def _word(sentence: Sentence, node: int | None) -> tuple[str, str]:
    if node is None:
        return NULL, NULL
    if node == 0:
        return ROOT, ROOT
    token = sentence.tokens[node - 1]
    return token.form, token.upos


def _dependents(c, node: int | None) -> list[int]:
    if node is None:
        return []
    return [dep for dep in range(1, len(c.heads)) if c.heads[dep] == node]


def _distance(s0, b0) -> str:
    if s0 is None or b0 is None:
        return NULL
    gap = abs(s0 - b0)
    return "5+" if gap >= 5 else str(gap)


def extract_features(c, sentence: Sentence) -> FeatureVector:
    """Applies the fixed templates to a configuration of sentence"""
    (s0, s1, s2), (b0, b1, b2) = c.focus()
    s0f, s0p = _word(sentence, s0)
    s1f, s1p = _word(sentence, s1)
    s2f, s2p = _word(sentence, s2)
    b0f, b0p = _word(sentence, b0)
    b1f, b1p = _word(sentence, b1)
    b2f, b2p = _word(sentence, b2)
    s0_deps = _dependents(c, s0)
    b0_deps = _dependents(c, b0)
    s0lc = _word(sentence, min(s0_deps))[1] if s0_deps else NULL
    s0rc = _word(sentence, max(s0_deps))[1] if s0_deps else NULL
    b0lc = _word(sentence, min(b0_deps))[1] if b0_deps else NULL
    b0rc = _word(sentence, max(b0_deps))[1] if b0_deps else NULL
    strings = (
        "bias",
        f"s0.f={s0f}",
        f"s0.p={s0p}",
        f"s1.f={s1f}",
        f"s1.p={s1p}",
        f"s2.f={s2f}",
        f"s2.p={s2p}",
        f"b0.f={b0f}",
        f"b0.p={b0p}",
        f"b1.f={b1f}",
        f"b1.p={b1p}",
        f"b2.f={b2f}",
        f"b2.p={b2p}",
        f"s0.lc.p={s0lc}",
        f"s0.rc.p={s0rc}",
        f"b0.lc.p={b0lc}",
        f"b0.rc.p={b0rc}",
        f"s0.nch={len(s0_deps) if s0 is not None else NULL}",
        f"s0.p+b0.p={s0p}|{b0p}",
        f"s0.f+b0.p={s0f}|{b0p}",
        f"s0.p+b0.f={s0p}|{b0f}",
        f"s0.p+b0.p+b1.p={s0p}|{b0p}|{b1p}",
        f"dist={_distance(s0, b0)}",
    )
    return FeatureVector.from_strings(strings)


def static_oracle(system, sentence) -> list:
    """Canonical transitions for a Sentence or a gold head list"""
    heads = sentence.heads if isinstance(sentence, Sentence) else sentence
    return system.static_oracle(heads)


class _Perceptron(object):
    """Averaged perceptron bookkeeping with lazy per-feature totals"""

    def __init__(self, width):
        self.width = width
        self.weights = {}
        self.totals = {}
        self.stamps = {}
        self.instances = 0

    def score(self, features):
        scores = np.zeros(self.width)
        for feature in features.ids:
            row = self.weights.get(feature)
            if row is not None:
                scores += row
        return scores

    def update(self, truth, guess, features):
        for feature in features.ids:
            row = self.weights.get(feature)
            if row is None:
                row = self.weights[feature] = np.zeros(self.width)
                self.totals[feature] = np.zeros(self.width)
                self.stamps[feature] = self.instances
            self.totals[feature] += (self.instances - self.stamps[feature]) * row
            self.stamps[feature] = self.instances
            row[truth] += 1.0
            row[guess] -= 1.0

    def average(self):
        averaged = {}
        for feature, row in self.weights.items():
            total = self.totals[feature] + (self.instances - self.stamps[feature]) * row
            averaged[feature] = total / max(self.instances, 1)
        return averaged


def _best(scores, legal: Sequence[int]) -> int:
    """Highest-scoring legal index; ties go to the earliest in legality order"""
    best = legal[0]
    for index in legal[1:]:
        if scores[index] > scores[best]:
            best = index
    return best


def _oracle_instances(system, sentence):
    """(features, legal indices, gold index) along the oracle derivation"""
    index = {t: i for i, t in enumerate(system.transitions)}
    c = system.initial_configuration(len(sentence))
    instances = []
    for t in system.static_oracle(sentence.heads):
        legal = [index[option] for option in system.legal_transitions(c)]
        instances.append((extract_features(c, sentence), legal, index[t]))
        c = system.apply(c, t)
    return instances


def train(system, sentences: Sequence[Sentence], epochs=5, seed=0) -> Model:
    """
    Trains an averaged perceptron on static-oracle derivations

    :param system: transition system
    :param sentences: nonempty training sentences
    :param epochs: passes over the data, shuffled per epoch
    :param seed: seed of the shuffling generator
    :return: averaged model
    """
    if not sentences:
        raise ValueError(f"System {system.identifier}: empty training set")
    config = TrainingConfig(epochs=epochs, seed=seed)
    logger.info(
        f"System {system.identifier}: training on {len(sentences)} sentences, "
        f"{config.epochs} epochs"
    )
    instances = [_oracle_instances(system, sentence) for sentence in sentences]
    perceptron = _Perceptron(len(system.transitions))
    rng = np.random.default_rng(config.seed)
    for epoch in range(1, config.epochs + 1):
        errors = seen = 0
        for position in rng.permutation(len(instances)):
            for features, legal, gold in instances[position]:
                guess = _best(perceptron.score(features), legal)
                if guess != gold:
                    perceptron.update(gold, guess, features)
                    errors += 1
                perceptron.instances += 1
                seen += 1
        logger.info(
            f"System {system.identifier}: epoch {epoch} "
            f"transition accuracy {1 - errors / max(seen, 1):.4f}"
        )
    meta = {
        "seed": config.seed,
        "epochs": config.epochs,
        "templates": TEMPLATE_VERSION,
    }
    return Model(system.identifier, perceptron.average(), averaged=True, meta=meta)


def _system_for(model: Model, system):
    if system is None:
        return create(model.system)
    if system.identifier != model.system:
        raise SystemMismatchError(system.identifier, model.system)
    return system


def parse(model: Model, sentence: Sentence, system=None):
    """Greedy decoding with the model; returns the finalized arc set"""
    system = _system_for(model, system)
    c = system.initial_configuration(len(sentence))
    while not system.is_terminal(c):
        legal = system.legal_transitions(c)
        indices = [system.transitions.index(t) for t in legal]
        best = _best(model.scores(extract_features(c, sentence)), indices)
        c = system.apply(c, system.transitions[best])
    return system.finalize(c)


def parse_heads(model: Model, sentence: Sentence, system=None) -> tuple[int, ...]:
    """Like parse, as a head list aligned with sentence.tokens"""
    arcs = parse(model, sentence, system)
    heads = [0] * len(sentence)
    for arc in arcs:
        heads[arc.dependent - 1] = arc.head
    return tuple(heads)


def model_path(out_dir, treebank: str, system: str) -> Path:
    return Path(out_dir) / "models" / f"{treebank}.{system}.model"


def save_model(model: Model, path) -> Path:
    """
    Writes a model file

    Layout, all integers little-endian: magic ``DDPM``; u16 format version;
    u16 length + UTF-8 system tag; u32 length + UTF-8 JSON meta (with the
    averaged flag); u64 feature count; u16 row width; feature ids as u64;
    weights as f8, row-major.
    """
    tag = model.system.encode("utf-8")
    meta = json.dumps(
        {"averaged": model.averaged, **model.meta}, sort_keys=True
    ).encode("utf-8")
    ids = np.array(sorted(model.weights), dtype="<u8")
    rows = np.zeros((len(ids), model.width), dtype="<f8")
    for position, feature in enumerate(ids.tolist()):
        rows[position] = model.weights[feature]
    data = b"".join(
        (
            MAGIC,
            struct.pack("<H", FORMAT_VERSION),
            struct.pack("<H", len(tag)),
            tag,
            struct.pack("<I", len(meta)),
            meta,
            struct.pack("<QH", len(ids), model.width),
            ids.tobytes(),
            rows.tobytes(),
        )
    )
    logger.info(f"Model {path}: saving {len(ids)} features")
    return write_atomic(path, data)


class _Reader(object):
    def __init__(self, path, data):
        self.path = path
        self.data = data
        self.offset = 0

    def take(self, size):
        if self.offset + size > len(self.data):
            raise ModelFormatError(self.path, "file is truncated")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, layout):
        return struct.unpack(layout, self.take(struct.calcsize(layout)))


def load_model(path, system=None) -> Model:
    """Reads a model file; with system given, checks the system tag"""
    with open(path, "rb") as handle:
        reader = _Reader(path, handle.read())
    if reader.take(len(MAGIC)) != MAGIC:
        raise ModelFormatError(path, "bad magic bytes")
    (version,) = reader.unpack("<H")
    if version != FORMAT_VERSION:
        raise ModelFormatError(path, f"unsupported format version {version}")
    (tag_length,) = reader.unpack("<H")
    try:
        tag = reader.take(tag_length).decode("utf-8")
        (meta_length,) = reader.unpack("<I")
        meta = json.loads(reader.take(meta_length).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(path, f"unreadable header: {e}")
    count, width = reader.unpack("<QH")
    ids = np.frombuffer(reader.take(8 * count), dtype="<u8")
    rows = np.frombuffer(reader.take(8 * count * width), dtype="<f8")
    if reader.offset != len(reader.data):
        raise ModelFormatError(path, "trailing bytes after weights")
    if system is not None and system.identifier != tag:
        raise SystemMismatchError(system.identifier, tag)
    try:
        expected = len(create(tag).transitions)
    except ValueError:
        raise ModelFormatError(path, f"unknown system tag {tag!r}")
    if width != expected:
        raise ModelFormatError(path, f"row width {width} does not match {tag}")
    rows = rows.reshape(count, width).astype(float)
    weights = {int(feature): rows[i].copy() for i, feature in enumerate(ids)}
    averaged = bool(meta.pop("averaged", True))
    return Model(tag, weights, averaged=averaged, meta=meta)
