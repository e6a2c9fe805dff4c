"""
CoNLL-U treebanks, sentence-length bins and observed displacement distributions.

Only syntactic words are modeled: multiword-token ranges ("3-4") and empty
nodes ("3.1") are skipped, and of the ten CoNLL-U columns only ID, FORM,
UPOS and HEAD are kept.
"""

import io
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping, Sequence

import numpy as np
from conllu.exceptions import ParseException
from conllu.models import Token as ConlluToken
from conllu.models import TokenList
from conllu.parser import parse_token_and_metadata

from depdisplace.exceptions import (
    ConlluParseError,
    EmptyTreebankError,
    MalformedTreeError,
)
from depdisplace.logger import logger
from depdisplace.transitions.base import tree_problem

FIELDS = (
    "id",
    "form",
    "lemma",
    "upos",
    "xpos",
    "feats",
    "head",
    "deprel",
    "deps",
    "misc",
)

WORD_ID = re.compile(r"[1-9][0-9]*")
RANGE_ID = re.compile(r"[1-9][0-9]*-[1-9][0-9]*")
EMPTY_ID = re.compile(r"[0-9]+\.[1-9][0-9]*")
HEAD = re.compile(r"0|[1-9][0-9]*")

DEFAULT_BINS = (
    (1, 3),
    (4, 6),
    (7, 9),
    (10, 12),
    (13, 15),
    (16, 18),
    (19, 21),
    (22, 24),
    (25, 27),
    (28, 33),
    (34, 39),
    (40, 99),
)


@dataclass(frozen=True)
class Token:
    """Syntactic word: 1-based position, form, universal POS tag, gold head"""

    index: int
    form: str
    upos: str
    gold_head: int


@dataclass(frozen=True)
class Sentence:
    """Sentence whose gold heads form a single tree rooted at node 0"""

    tokens: tuple[Token, ...]
    id: str = ""

    def __post_init__(self):
        indices = [token.index for token in self.tokens]
        if indices != list(range(1, len(indices) + 1)):
            raise MalformedTreeError(self.id, "token ids are not contiguous from 1")
        problem = tree_problem(self.heads)
        if problem is not None:
            raise MalformedTreeError(self.id, problem)

    @classmethod
    def from_heads(cls, heads, forms=None, upos=None, id=""):
        """Builds a sentence from a head list; forms and tags default to '_'"""
        forms = forms or ["_"] * len(heads)
        upos = upos or ["_"] * len(heads)
        tokens = tuple(
            Token(index, form, tag, head)
            for index, (form, tag, head) in enumerate(zip(forms, upos, heads), start=1)
        )
        return cls(tokens=tokens, id=id)

    def __len__(self):
        return len(self.tokens)

    @property
    def heads(self) -> tuple[int, ...]:
        return tuple(token.gold_head for token in self.tokens)

    @property
    def forms(self) -> tuple[str, ...]:
        return tuple(token.form for token in self.tokens)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(token.upos for token in self.tokens)


@dataclass(frozen=True)
class Treebank:
    """Named treebank with train and test splits"""

    name: str
    train: tuple[Sentence, ...] = ()
    test: tuple[Sentence, ...] = ()
    single_split: bool = False

    def __post_init__(self):
        if not self.name:
            raise ValueError("Treebank name must be set")
        if not self.single_split and (not self.train or not self.test):
            raise ValueError(
                f"Treebank {self.name}: train and test splits must be nonempty "
                f"unless loaded as single-split"
            )


@dataclass(frozen=True)
class BinSpec:
    """Ordered, disjoint, inclusive sentence-length ranges"""

    ranges: tuple[tuple[int, int], ...] = DEFAULT_BINS

    def __post_init__(self):
        previous = 0
        for low, high in self.ranges:
            if low > high:
                raise ValueError(f"Bin {low}-{high} is empty")
            if low <= previous:
                raise ValueError(f"Bin {low}-{high} overlaps or is out of order")
            previous = high

    @classmethod
    def default(cls):
        return cls(DEFAULT_BINS)

    @classmethod
    def parse(cls, text: str):
        """Reads "1-3,4-6,..." into a BinSpec"""
        ranges = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            match = re.fullmatch(r"(\d+)-(\d+)", item)
            if match is None:
                raise ValueError(f"Invalid bin {item!r}: expected LOW-HIGH")
            ranges.append((int(match.group(1)), int(match.group(2))))
        return cls(tuple(ranges))

    @staticmethod
    def label(bin_range: tuple[int, int]) -> str:
        return f"{bin_range[0]}-{bin_range[1]}"

    def find(self, length: int) -> tuple[int, int] | None:
        for low, high in self.ranges:
            if low <= length <= high:
                return low, high
        return None

    def __str__(self):
        return ",".join(self.label(bin_range) for bin_range in self.ranges)


@dataclass(frozen=True)
class DisplacementDistribution:
    """Discrete distribution over nonzero integer displacements"""

    mass: Mapping[int, float] = field(default_factory=dict)
    support_count: int = 0

    def __post_init__(self):
        for value, probability in self.mass.items():
            if value == 0:
                raise ValueError("Displacement 0 is impossible")
            if probability < 0:
                raise ValueError(f"Negative probability at displacement {value}")
        if self.support_count > 0 and abs(sum(self.mass.values()) - 1.0) > 1e-9:
            raise ValueError("Probabilities do not sum to 1")

    @classmethod
    def empty(cls):
        return cls({}, 0)

    @classmethod
    def from_counts(cls, counts: Mapping[int, float], support_count=None):
        """Normalizes nonnegative weights; support_count defaults to their sum"""
        total = sum(counts.values())
        if support_count is None:
            support_count = int(round(total))
        if total <= 0:
            return cls.empty()
        mass = {value: weight / total for value, weight in sorted(counts.items())}
        return cls(mass, support_count)

    @classmethod
    def from_samples(cls, samples: Iterable[int]):
        counts = Counter(samples)
        return cls.from_counts(counts, support_count=sum(counts.values()))

    @property
    def is_empty(self) -> bool:
        return self.support_count == 0 or not self.mass

    def support(self) -> list[int]:
        return sorted(self.mass)

    def probabilities(self) -> dict[str, float]:
        """JSON-ready {displacement: probability} with sorted keys"""
        return {str(value): self.mass[value] for value in self.support()}


@dataclass
class BinAssignment:
    """Sentences grouped by bin plus the number outside every bin"""

    bins: dict[tuple[int, int], list[Sentence]]
    dropped: int = 0


@dataclass(frozen=True)
class BinStat:
    bin: tuple[int, int]
    mean: float
    q1: float
    q3: float


@dataclass(frozen=True)
class ProjectivityStats:
    treebank: str
    train_trees: int
    test_trees: int
    nonprojective_trees: int
    nonprojective_arcs: int
    arcs: int

    @property
    def nonprojective_tree_rate(self) -> float:
        return self.nonprojective_trees / self.test_trees if self.test_trees else 0.0

    @property
    def nonprojective_arc_rate(self) -> float:
        return self.nonprojective_arcs / self.arcs if self.arcs else 0.0


def parse_conllu(
    stream: BinaryIO, on_malformed: str = "reject", source: str = "<stream>"
) -> list[Sentence]:
    """
    Reads UTF-8 CoNLL-U into sentences

    :param stream: binary stream; sentences are separated by blank lines
    :param on_malformed: "reject" drops a sentence whose heads do not form a
        tree, "abort" raises MalformedTreeError
    :param source: name used in diagnostics
    :return: the well-formed sentences in input order
    """
    if on_malformed not in ("reject", "abort"):
        raise ValueError(
            f"on_malformed must be 'reject' or 'abort', got {on_malformed}"
        )
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    sentences = []
    rejected = 0
    try:
        for ordinal, (start, block) in enumerate(_blocks(text), start=1):
            try:
                sentence = _parse_block(block, start, source, ordinal)
            except MalformedTreeError as e:
                if on_malformed == "abort":
                    raise
                logger.warning(f"Treebank {source}: rejected sentence: {e.msg}")
                rejected += 1
                continue
            if len(sentence):
                sentences.append(sentence)
    finally:
        # Leave the caller's stream open
        text.detach()
    logger.info(
        f"Treebank {source}: parsed {len(sentences)} sentences, rejected {rejected}"
    )
    return sentences


def _blocks(lines):
    """Yields (first line number, lines) per blank-line separated block"""
    block, start = [], 0
    for line_number, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if line.strip():
            if not block:
                start = line_number
            block.append(line)
        elif block:
            yield start, block
            block = []
    if block:
        yield start, block


def _parse_block(block, start, source, ordinal) -> Sentence:
    comments, rows = [], []
    for offset, line in enumerate(block):
        if line.startswith("#"):
            comments.append(line)
            continue
        # Columns split on tabs only; FORM and LEMMA may hold spaces
        columns = line.split("\t")
        if len(columns) != len(FIELDS):
            raise ConlluParseError(
                start + offset, f"expected {len(FIELDS)} tab-separated columns", source
            )
        rows.append((start + offset, ConlluToken(zip(FIELDS, columns))))
    metadata = {}
    if comments:
        try:
            metadata = parse_token_and_metadata("\n".join(comments)).metadata
        except ParseException as e:
            raise ConlluParseError(start, str(e), source)
    sentence_id = metadata.get("sent_id") or f"{source}#{ordinal}"
    tokens = []
    for line_number, token in rows:
        token_id = token["id"]
        if RANGE_ID.fullmatch(token_id) or EMPTY_ID.fullmatch(token_id):
            continue
        if not WORD_ID.fullmatch(token_id):
            raise ConlluParseError(
                line_number, f"malformed ID field {token_id!r}", source
            )
        if not HEAD.fullmatch(token["head"]):
            raise ConlluParseError(
                line_number, f"malformed HEAD field {token['head']!r}", source
            )
        tokens.append(
            Token(int(token_id), token["form"], token["upos"], int(token["head"]))
        )
    return Sentence(tokens=tuple(tokens), id=sentence_id)


def read_conllu(path, on_malformed: str = "reject") -> list[Sentence]:
    with open(path, "rb") as stream:
        return parse_conllu(stream, on_malformed=on_malformed, source=str(path))


def to_conllu(sentences: Sequence[Sentence], heads=None) -> str:
    """
    Serializes sentences to CoNLL-U with the retained columns

    :param sentences: sentences to write
    :param heads: optional per-sentence head lists replacing the gold heads
    :return: CoNLL-U text, other columns written as "_"
    """
    if heads is not None and len(heads) != len(sentences):
        raise ValueError("heads must align with sentences")
    chunks = []
    for index, sentence in enumerate(sentences):
        sentence_heads = sentence.heads if heads is None else heads[index]
        tokens = [
            ConlluToken(
                {
                    "id": token.index,
                    "form": token.form,
                    "lemma": "_",
                    "upos": token.upos,
                    "xpos": "_",
                    "feats": "_",
                    "head": head,
                    "deprel": "_",
                    "deps": "_",
                    "misc": "_",
                }
            )
            for token, head in zip(sentence.tokens, sentence_heads)
        ]
        metadata = {"sent_id": sentence.id} if sentence.id else {}
        chunks.append(TokenList(tokens, metadata=metadata).serialize())
    return "".join(chunks)


def load_treebank(name, train_path=None, test_path=None, on_malformed="reject"):
    """Loads a treebank; with only one path given it is single-split"""
    logger.info(f"Treebank {name}: loading")
    splits = {}
    for split, path in (("train", train_path), ("test", test_path)):
        splits[split] = tuple(read_conllu(path, on_malformed)) if path else ()
        if path and not splits[split]:
            raise EmptyTreebankError(name, split, path)
    train, test = splits["train"], splits["test"]
    single = train_path is None or test_path is None
    return Treebank(name=name, train=train, test=test, single_split=single)


def discover_treebanks(root) -> dict[str, tuple[Path, Path]]:
    """Finds <root>/<name>/{train,test}.conllu pairs, sorted by name"""
    found = {}
    for directory in sorted(Path(root).iterdir()):
        train, test = directory / "train.conllu", directory / "test.conllu"
        if directory.is_dir() and train.is_file() and test.is_file():
            found[directory.name] = (train, test)
    return found


def filter_by_size(treebanks, min_train=1000, min_test=1000) -> list[Treebank]:
    """Keeps treebanks with at least min_train train and min_test test trees"""
    if min_train < 0 or min_test < 0:
        raise ValueError("Size thresholds must be nonnegative")
    kept = []
    for treebank in treebanks:
        if len(treebank.train) >= min_train and len(treebank.test) >= min_test:
            kept.append(treebank)
        else:
            logger.warning(
                f"Treebank {treebank.name}: filtered out with "
                f"{len(treebank.train)} train / {len(treebank.test)} test trees"
            )
    return kept


def bin_sentences(sentences: Iterable[Sentence], bins: BinSpec) -> BinAssignment:
    assignment = BinAssignment(bins={bin_range: [] for bin_range in bins.ranges})
    for sentence in sentences:
        bin_range = bins.find(len(sentence))
        if bin_range is None:
            assignment.dropped += 1
        else:
            assignment.bins[bin_range].append(sentence)
    if assignment.dropped:
        logger.debug(f"Bins {bins}: dropped {assignment.dropped} sentences")
    return assignment


def observed_distribution(
    sentences: Iterable[Sentence], include_root_arcs: bool = False
) -> DisplacementDistribution:
    """Displacement distribution of the gold arcs, one sample per arc"""
    counts = Counter()
    for sentence in sentences:
        for token in sentence.tokens:
            if token.gold_head == 0 and not include_root_arcs:
                continue
            counts[token.gold_head - token.index] += 1
    return DisplacementDistribution.from_counts(
        counts, support_count=sum(counts.values())
    )


def bin_stats(treebanks: Sequence[Treebank], bins: BinSpec) -> list[BinStat]:
    """Mean and quartiles across treebanks of the test trees per bin"""
    if not treebanks:
        raise ValueError("bin_stats needs at least one treebank")
    counts = np.zeros((len(treebanks), len(bins.ranges)))
    for row, treebank in enumerate(treebanks):
        assignment = bin_sentences(treebank.test, bins)
        for column, bin_range in enumerate(bins.ranges):
            counts[row, column] = len(assignment.bins[bin_range])
    q1, q3 = np.percentile(counts, [25, 75], axis=0)
    means = counts.mean(axis=0)
    return [
        BinStat(bin_range, float(means[i]), float(q1[i]), float(q3[i]))
        for i, bin_range in enumerate(bins.ranges)
    ]


def _dominates(heads: Sequence[int], head: int, node: int) -> bool:
    while node != 0:
        if node == head:
            return True
        node = heads[node - 1]
    return head == 0


def nonprojective_arcs(heads: Sequence[int]) -> int:
    """Arcs spanning a node their head does not dominate"""
    count = 0
    for dep, head in enumerate(heads, start=1):
        low, high = sorted((head, dep))
        if any(not _dominates(heads, head, k) for k in range(low + 1, high)):
            count += 1
    return count


def projectivity_stats(treebank: Treebank) -> ProjectivityStats:
    trees = arcs = bad_arcs = 0
    for sentence in treebank.test:
        found = nonprojective_arcs(sentence.heads)
        bad_arcs += found
        arcs += len(sentence)
        trees += 1 if found else 0
    return ProjectivityStats(
        treebank=treebank.name,
        train_trees=len(treebank.train),
        test_trees=len(treebank.test),
        nonprojective_trees=trees,
        nonprojective_arcs=bad_arcs,
        arcs=arcs,
    )
