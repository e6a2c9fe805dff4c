"""
Command-line pipeline.

Each subcommand reads the run manifest plus the declared outputs of earlier
subcommands and writes its own tables under the output directory:

* ``stats``: bin_stats.csv, treebank_stats.csv
* ``train-eval``: models/, parsed/, uas.csv (errors.json on partial failure)
* ``displacement-report``: displacement_pr.csv, displacement_pvalues.csv
* ``inherent``: observed/, inherent/, emd.csv
* ``correlate``: correlation_<group>.csv, scatter_<group>.csv
* ``compare``: compare_<a1>_<a2>.csv, compare_<a1>_<a2>_scatter.csv
* ``enumerate``: exact inherent distribution as JSON on stdout

Exit codes: 0 success, 2 invalid manifest or input, 3 partial sweep failure.
"""

import argparse
import asyncio
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np
import pandas as pd

from depdisplace.config import RunManifest, load_manifest
from depdisplace.dispatcher import NON_PROJECTIVE, PROJECTIVE, create, systems
from depdisplace.exceptions import (
    ConlluParseError,
    EmptyDistributionError,
    EmptyTreebankError,
    EnumerationCapacityError,
    ManifestError,
    MalformedTreeError,
    UndefinedCorrelationError,
)
from depdisplace.logger import logger, set_verbosity
from depdisplace.metrics import (
    UasScore,
    delta_uas,
    pairwise_deltas,
    pearson,
    pr_by_displacement,
    uas,
    welch_t_from_summary,
)
from depdisplace.parser import model_path, parse_heads, save_model
from depdisplace.parser import train as train_model
from depdisplace.sampler import SamplerConfig, enumerate_inherent, estimate_emd
from depdisplace.storage import write_atomic
from depdisplace.treebank import (
    BinSpec,
    bin_sentences,
    bin_stats,
    filter_by_size,
    load_treebank,
    observed_distribution,
    projectivity_stats,
    read_conllu,
    to_conllu,
)
from depdisplace.version import __version__

# Pseudo-bin holding every sentence
ALL = "all"

GROUPS = {
    "projective": PROJECTIVE,
    "nonprojective": NON_PROJECTIVE,
    "all": systems,
}

UAS_COLUMNS = [
    "treebank",
    "system",
    "bin",
    "uas",
    "delta_uas",
    "correct",
    "total",
    "sentences",
]
EMD_COLUMNS = ["treebank", "system", "bin", "mean_emd", "std_error", "reps"]
CORRELATION_COLUMNS = ["bin", "n", "r", "r_squared", "p_value"]
SCATTER_COLUMNS = [
    "treebank",
    "system",
    "bin",
    "uas",
    "delta_uas",
    "mean_emd",
    "emd_std_error",
    "sentences",
]


def _executor(jobs: int):
    if jobs > 1:
        return ProcessPoolExecutor(max_workers=jobs)
    return ThreadPoolExecutor(max_workers=1)


async def _gather(tasks, jobs):
    loop = asyncio.get_running_loop()
    with _executor(jobs) as pool:
        futures = [
            loop.run_in_executor(pool, partial(func, *args)) for func, args in tasks
        ]
        return await asyncio.gather(*futures, return_exceptions=True)


def run_sweep(tasks, jobs: int = 1) -> list:
    """
    Runs (function, args) tasks in an executor

    Results come back in task order; a failed task yields its exception
    instead of aborting the others.
    """
    if not tasks:
        return []
    return asyncio.run(_gather(tasks, jobs))


def _write_csv(path: Path, frame: pd.DataFrame):
    write_atomic(path, frame.to_csv(index=False, lineterminator="\n"))
    logger.info(f"Report {path}: wrote {len(frame)} rows")


def _write_json(path: Path, value):
    write_atomic(path, json.dumps(value, indent=2) + "\n")


def _bin_labels(bins: BinSpec) -> list[str]:
    return [BinSpec.label(bin_range) for bin_range in bins.ranges] + [ALL]


def parsed_path(out_dir, treebank: str, system: str) -> Path:
    return Path(out_dir) / "parsed" / f"{treebank}.{system}.conllu"


def load_treebanks(manifest: RunManifest, filtered: bool = False) -> list:
    """Loads every manifest treebank, concurrently when jobs > 1"""
    tasks = [
        (load_treebank, (source.name, source.train, source.test, manifest.on_malformed))
        for source in manifest.treebanks
    ]
    treebanks = []
    for result in run_sweep(tasks, manifest.jobs):
        if isinstance(result, BaseException):
            raise result
        treebanks.append(result)
    if filtered:
        treebanks = filter_by_size(treebanks, manifest.min_train, manifest.min_test)
    return treebanks


def cmd_stats(manifest: RunManifest) -> pd.DataFrame:
    """Writes bin_stats.csv over size-filtered treebanks and treebank_stats.csv"""
    loaded = load_treebanks(manifest)
    treebanks = filter_by_size(loaded, manifest.min_train, manifest.min_test)
    if not treebanks:
        raise ManifestError("no treebank passes the size filter")
    stats = bin_stats(treebanks, manifest.bins)
    frame = pd.DataFrame(
        [(BinSpec.label(s.bin), s.mean, s.q1, s.q3) for s in stats],
        columns=["bin", "mean", "q1", "q3"],
    )
    _write_csv(manifest.out_dir / "bin_stats.csv", frame)
    rows = []
    for treebank in loaded:
        found = projectivity_stats(treebank)
        rows.append(
            (
                found.treebank,
                found.train_trees,
                found.test_trees,
                found.nonprojective_trees,
                found.nonprojective_tree_rate,
                found.nonprojective_arcs,
                found.nonprojective_arc_rate,
            )
        )
    _write_csv(
        manifest.out_dir / "treebank_stats.csv",
        pd.DataFrame(
            rows,
            columns=[
                "treebank",
                "train_trees",
                "test_trees",
                "nonprojective_trees",
                "nonprojective_tree_rate",
                "nonprojective_arcs",
                "nonprojective_arc_rate",
            ],
        ),
    )
    return frame


def _train_eval_task(name, identifier, train, test, epochs, seed, out_dir):
    system = create(identifier)
    model = train_model(system, train, epochs=epochs, seed=seed)
    save_model(model, model_path(out_dir, name, identifier))
    heads = [parse_heads(model, sentence, system) for sentence in test]
    write_atomic(parsed_path(out_dir, name, identifier), to_conllu(test, heads))
    return heads


def _bin_scores(sentences, predicted, bins: BinSpec) -> dict[str, tuple[UasScore, int]]:
    scores = {}
    for sentence, heads in zip(sentences, predicted):
        score = uas(heads, sentence.heads)
        bin_range = bins.find(len(sentence))
        labels = [ALL] if bin_range is None else [BinSpec.label(bin_range), ALL]
        for label in labels:
            if label in scores:
                previous, count = scores[label]
                scores[label] = (previous + score, count + 1)
            else:
                scores[label] = (score, 1)
    return scores


def cmd_train_eval(manifest: RunManifest) -> tuple[pd.DataFrame, list[dict]]:
    """
    Trains and evaluates every system on every treebank with both splits

    :return: the uas.csv table and the failed (treebank, system) tasks
    """
    treebanks = [t for t in load_treebanks(manifest) if t.train and t.test]
    if not treebanks:
        raise ManifestError("no treebank has both a train and a test split")
    pairs = [(t, s) for t in treebanks for s in manifest.systems]
    tasks = [
        (
            _train_eval_task,
            (
                treebank.name,
                identifier,
                treebank.train,
                treebank.test,
                manifest.training.epochs,
                manifest.training.seed,
                manifest.out_dir,
            ),
        )
        for treebank, identifier in pairs
    ]
    errors, rows = [], []
    for (treebank, identifier), result in zip(pairs, run_sweep(tasks, manifest.jobs)):
        if isinstance(result, BaseException):
            logger.error(f"Treebank {treebank.name}: {identifier} failed: {result!r}")
            errors.append(
                {"treebank": treebank.name, "system": identifier, "error": repr(result)}
            )
            continue
        scores = _bin_scores(treebank.test, result, manifest.bins)
        for label, (score, count) in scores.items():
            rows.append(
                {
                    "treebank": treebank.name,
                    "system": identifier,
                    "bin": label,
                    "uas": score.percentage,
                    "correct": score.correct,
                    "total": score.total,
                    "sentences": count,
                }
            )
    frame = pd.DataFrame(rows, columns=[c for c in UAS_COLUMNS if c != "delta_uas"])
    frame["delta_uas"] = np.nan
    for _, group in frame.groupby(["treebank", "bin"], sort=False):
        if len(group) >= 2:
            deltas = delta_uas(dict(zip(group.index, group.uas)))
            for index, value in deltas.items():
                frame.loc[index, "delta_uas"] = value
    frame = _order(frame, manifest)[UAS_COLUMNS]
    _write_csv(manifest.out_dir / "uas.csv", frame)
    if errors:
        _write_json(manifest.out_dir / "errors.json", errors)
    return frame, errors


def _order(frame: pd.DataFrame, manifest: RunManifest) -> pd.DataFrame:
    """Sorts rows by treebank, manifest system order and bin order"""
    bins = {label: i for i, label in enumerate(_bin_labels(manifest.bins))}
    order = {name: i for i, name in enumerate(manifest.systems)}
    keys = frame.assign(
        _system=frame.system.map(order), _bin=frame.bin.map(bins)
    ).sort_values(["treebank", "_system", "_bin"], kind="stable")
    return keys.drop(columns=["_system", "_bin"]).reset_index(drop=True)


def _spread(values) -> float:
    """Sample standard deviation; 0 for a single value"""
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def cmd_displacement_report(manifest: RunManifest) -> pd.DataFrame:
    """Per-displacement precision and recall across treebanks, with p-values"""
    treebanks = [t for t in load_treebanks(manifest) if t.train and t.test]
    clip = manifest.clip_displacement
    displacements = [d for d in range(-clip, clip + 1) if d != 0]
    cells = []
    for treebank in treebanks:
        gold = [sentence.heads for sentence in treebank.test]
        for identifier in manifest.systems:
            path = parsed_path(manifest.out_dir, treebank.name, identifier)
            if not path.is_file():
                raise ManifestError(
                    f"missing parsed output {path} for {treebank.name}/{identifier}; "
                    f"run train-eval first"
                )
            predicted = [sentence.heads for sentence in read_conllu(path, "abort")]
            counts = pr_by_displacement(
                predicted, gold, include_root_arcs=manifest.sampler.include_root_arcs
            )
            for d in displacements:
                for measure, value in (
                    ("precision", counts.precision(d)),
                    ("recall", counts.recall(d)),
                ):
                    if value is not None:
                        cells.append((identifier, d, measure, value))
    values = pd.DataFrame(cells, columns=["system", "displacement", "measure", "value"])
    summary = (
        values.groupby(["system", "displacement", "measure"], sort=False)
        .value.agg(mean="mean", std=_spread, treebanks="count")
        .reset_index()
    )
    order = {name: i for i, name in enumerate(manifest.systems)}
    summary = (
        summary.assign(_system=summary.system.map(order))
        .sort_values(["_system", "displacement", "measure"], kind="stable")
        .drop(columns="_system")
        .reset_index(drop=True)
    )
    _write_csv(manifest.out_dir / "displacement_pr.csv", summary)
    lookup = {
        (row.system, row.displacement, row.measure): row
        for row in summary.itertuples(index=False)
    }
    tests = []
    for first, second in itertools.combinations(manifest.systems, 2):
        for d in displacements:
            for measure in ("precision", "recall"):
                a = lookup.get((first, d, measure))
                b = lookup.get((second, d, measure))
                if a is None or b is None or a.treebanks < 2 or b.treebanks < 2:
                    continue
                p = welch_t_from_summary(
                    a.mean, a.std, a.treebanks, b.mean, b.std, b.treebanks
                )
                tests.append((first, second, d, measure, p))
    columns = ["system_a", "system_b", "displacement", "measure", "p_value"]
    _write_csv(
        manifest.out_dir / "displacement_pvalues.csv",
        pd.DataFrame(tests, columns=columns),
    )
    return summary


def _inherent_task(
    identifier, observed, lengths, config, treebank, bin_index, self_test
):
    system = create(identifier)
    try:
        return estimate_emd(
            system, observed, lengths, config, treebank, bin_index, self_test
        )
    except EmptyDistributionError as e:
        logger.warning(
            f"Treebank {treebank}: {identifier} bin {bin_index} skipped: {e.reason}"
        )
        return None


def cmd_inherent(manifest: RunManifest, self_test: bool = False) -> pd.DataFrame:
    """
    Samples inherent distributions and estimates EMD per treebank, system and bin

    :param self_test: feed the observed distribution back as every sample
    """
    treebanks = [t for t in load_treebanks(manifest, filtered=True) if t.test]
    config: SamplerConfig = manifest.sampler
    keys, tasks = [], []
    for treebank in treebanks:
        assignment = bin_sentences(treebank.test, manifest.bins)
        groups = [
            (BinSpec.label(bin_range), assignment.bins[bin_range])
            for bin_range in manifest.bins.ranges
        ]
        groups.append((ALL, list(treebank.test)))
        for bin_index, (label, sentences) in enumerate(groups):
            observed = observed_distribution(sentences, config.include_root_arcs)
            if observed.is_empty:
                logger.warning(
                    f"Treebank {treebank.name}: bin {label} has no qualifying gold arc"
                )
                continue
            _write_json(
                manifest.out_dir / "observed" / treebank.name / f"{label}.json",
                observed.probabilities(),
            )
            lengths = [len(sentence) for sentence in sentences]
            for identifier in manifest.systems:
                keys.append((treebank.name, identifier, label))
                tasks.append(
                    (
                        _inherent_task,
                        (
                            identifier,
                            observed,
                            lengths,
                            config,
                            treebank.name,
                            bin_index,
                            self_test,
                        ),
                    )
                )
    rows = []
    results = run_sweep(tasks, manifest.jobs)
    for (name, identifier, label), estimate in zip(keys, results):
        if isinstance(estimate, BaseException):
            raise estimate
        if estimate is None:
            continue
        for repetition, distribution in enumerate(estimate.distributions, start=1):
            _write_json(
                manifest.out_dir
                / "inherent"
                / name
                / identifier
                / label
                / f"rep{repetition}.json",
                distribution.probabilities(),
            )
        rows.append(
            (
                name,
                identifier,
                label,
                estimate.mean_emd,
                estimate.std_error,
                estimate.repetitions,
            )
        )
    frame = _order(pd.DataFrame(rows, columns=EMD_COLUMNS), manifest)
    _write_csv(manifest.out_dir / "emd.csv", frame)
    return frame


def _read_report(manifest: RunManifest, name: str, producer: str) -> pd.DataFrame:
    path = manifest.out_dir / name
    if not path.is_file():
        raise ManifestError(f"missing {path}; run {producer} first")
    return pd.read_csv(path, dtype={"treebank": str, "system": str, "bin": str})


def _uas_for_mode(manifest: RunManifest, frame: pd.DataFrame) -> pd.DataFrame:
    """With uas_mode=treebank every bin carries the treebank's overall UAS"""
    if manifest.uas_mode == "bin":
        return frame
    overall = frame[frame.bin == ALL].set_index(["treebank", "system"]).uas
    frame = frame.copy()
    frame["uas"] = [overall[(t, s)] for t, s in zip(frame.treebank, frame.system)]
    return frame


def _correlate_bins(manifest, points: pd.DataFrame, x: str, y: str) -> pd.DataFrame:
    rows = []
    for label in _bin_labels(manifest.bins):
        selected = points[points.bin == label]
        if len(selected) < 3:
            logger.warning(f"Bin {label}: {len(selected)} points, correlation skipped")
            continue
        try:
            result = pearson(selected[x].tolist(), selected[y].tolist())
        except UndefinedCorrelationError as e:
            logger.warning(f"Bin {label}: correlation undefined: {e.reason}")
            continue
        rows.append((label, result.n, result.r, result.r_squared, result.p_value))
    return pd.DataFrame(rows, columns=CORRELATION_COLUMNS)


def cmd_correlate(manifest: RunManifest, group: str = "all") -> pd.DataFrame:
    """
    Correlates delta UAS with mean EMD per bin within a group of systems

    delta UAS is taken relative to the mean over the group's systems.
    """
    if group not in GROUPS:
        raise ManifestError(f"unknown group {group!r}")
    members = [name for name in manifest.systems if name in GROUPS[group]]
    if len(members) < 2:
        raise ManifestError(f"group {group} needs at least two manifest systems")
    scores = _uas_for_mode(manifest, _read_report(manifest, "uas.csv", "train-eval"))
    estimates = _read_report(manifest, "emd.csv", "inherent")
    scores = scores[scores.system.isin(members)].drop(columns="delta_uas")
    deltas = []
    for (treebank, label), cell in scores.groupby(["treebank", "bin"], sort=False):
        if set(cell.system) != set(members):
            continue
        for system, value in delta_uas(dict(zip(cell.system, cell.uas))).items():
            deltas.append((treebank, system, label, value))
    deltas = pd.DataFrame(deltas, columns=["treebank", "system", "bin", "delta_uas"])
    points = scores.merge(deltas, on=["treebank", "system", "bin"]).merge(
        estimates.rename(columns={"std_error": "emd_std_error"}),
        on=["treebank", "system", "bin"],
    )
    points = _order(points, manifest)[SCATTER_COLUMNS]
    _write_csv(manifest.out_dir / f"scatter_{group}.csv", points)
    frame = _correlate_bins(manifest, points, "delta_uas", "mean_emd")
    _write_csv(manifest.out_dir / f"correlation_{group}.csv", frame)
    return frame


def cmd_compare(manifest: RunManifest, a1: str, a2: str) -> pd.DataFrame:
    """Correlates pairwise UAS and EMD differences of two systems per bin"""
    if a1 == a2:
        raise ManifestError("compare needs two different systems")
    for name in (a1, a2):
        if name not in systems:
            raise ManifestError(f"unknown system {name!r}")
    scores = _uas_for_mode(manifest, _read_report(manifest, "uas.csv", "train-eval"))
    estimates = _read_report(manifest, "emd.csv", "inherent")
    joined = scores.merge(estimates, on=["treebank", "system", "bin"])
    points = []
    for label in _bin_labels(manifest.bins):
        selected = joined[joined.bin == label]
        for treebank, cell in selected.groupby("treebank", sort=True):
            uas_by_alg = dict(zip(cell.system, cell.uas))
            emd_by_alg = dict(zip(cell.system, cell.mean_emd))
            if a1 not in uas_by_alg or a2 not in uas_by_alg:
                continue
            delta_u, delta_e = pairwise_deltas(uas_by_alg, emd_by_alg, a1, a2)
            points.append((treebank, label, delta_u, delta_e))
    points = pd.DataFrame(points, columns=["treebank", "bin", "delta_uas", "delta_emd"])
    _write_csv(manifest.out_dir / f"compare_{a1}_{a2}_scatter.csv", points)
    frame = _correlate_bins(manifest, points, "delta_uas", "delta_emd")
    _write_csv(manifest.out_dir / f"compare_{a1}_{a2}.csv", frame)
    return frame


def cmd_enumerate(
    identifier: str, n: int, include_root_arcs=False, all_arcs=False, with_trees=False
) -> dict:
    """Exact inherent distribution as a JSON-ready mapping"""
    system = create(identifier)
    result = enumerate_inherent(
        system,
        n,
        include_root_arcs=include_root_arcs,
        all_arcs=all_arcs,
        with_trees=with_trees,
    )
    output = {
        "system": result.system,
        "n": result.n,
        "no_arc_probability": str(result.no_arc_probability),
        "exact": {str(d): str(p) for d, p in result.exact.items()},
        "probabilities": result.distribution.probabilities(),
    }
    if result.trees is not None:
        output["trees"] = {
            " ".join(map(str, heads)): str(p)
            for heads, p in sorted(result.trees.items())
        }
    return output


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", type=Path, help="YAML run manifest")
    common.add_argument("--treebank-root", help="discover <name>/{train,test}.conllu")
    common.add_argument("--systems", help="comma-separated system identifiers")
    common.add_argument("--seed", type=int)
    common.add_argument("--bins", help='e.g. "1-3,4-6,7-9"')
    common.add_argument("--include-root-arcs", action="store_true", default=None)
    common.add_argument("--all-arcs", action="store_true", default=None)
    common.add_argument("--reps", type=int)
    common.add_argument("--min-bin-sentences", type=int)
    common.add_argument("--epochs", type=int)
    common.add_argument("--out-dir", type=Path)
    common.add_argument("--min-train", type=int)
    common.add_argument("--min-test", type=int)
    common.add_argument("--clip-displacement", type=int)
    common.add_argument("--uas-mode", choices=["bin", "treebank"])
    common.add_argument("--jobs", type=int, help="parallel workers")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="depdisplace",
        description="Displacement distributions of transition-based dependency parsers",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("stats", parents=[common], help="bin and treebank statistics")
    commands.add_parser(
        "train-eval", parents=[common], help="train and evaluate parsers"
    )
    commands.add_parser(
        "displacement-report", parents=[common], help="precision/recall by displacement"
    )
    inherent = commands.add_parser(
        "inherent", parents=[common], help="inherent distributions and EMD"
    )
    inherent.add_argument("--self-test", action="store_true")
    correlate = commands.add_parser(
        "correlate", parents=[common], help="delta UAS against mean EMD"
    )
    correlate.add_argument("--group", choices=sorted(GROUPS), default="all")
    compare = commands.add_parser(
        "compare", parents=[common], help="compare two systems"
    )
    compare.add_argument("a1", choices=systems)
    compare.add_argument("a2", choices=systems)
    enumerate_ = commands.add_parser(
        "enumerate", parents=[common], help="exact inherent distribution"
    )
    enumerate_.add_argument("--system", required=True, choices=systems)
    enumerate_.add_argument("-n", type=int, required=True)
    enumerate_.add_argument("--trees", action="store_true")
    return parser


def _overrides(args) -> dict:
    return {
        "treebank_root": args.treebank_root,
        "systems": args.systems,
        "seed": args.seed,
        "bins": args.bins,
        "include_root_arcs": args.include_root_arcs,
        "all_arcs": args.all_arcs,
        "reps": args.reps,
        "min_bin_sentences": args.min_bin_sentences,
        "epochs": args.epochs,
        "out_dir": args.out_dir,
        "min_train": args.min_train,
        "min_test": args.min_test,
        "clip_displacement": args.clip_displacement,
        "uas_mode": args.uas_mode,
        "jobs": args.jobs,
    }


def _run(args) -> int:
    if args.command == "enumerate":
        output = cmd_enumerate(
            args.system,
            args.n,
            include_root_arcs=bool(args.include_root_arcs),
            all_arcs=bool(args.all_arcs),
            with_trees=args.trees,
        )
        print(json.dumps(output, indent=2))
        return 0
    manifest = load_manifest(args.manifest, _overrides(args))
    if args.command == "stats":
        cmd_stats(manifest)
    elif args.command == "train-eval":
        _, errors = cmd_train_eval(manifest)
        if errors:
            return 3
    elif args.command == "displacement-report":
        cmd_displacement_report(manifest)
    elif args.command == "inherent":
        cmd_inherent(manifest, self_test=args.self_test)
    elif args.command == "correlate":
        cmd_correlate(manifest, args.group)
    elif args.command == "compare":
        cmd_compare(manifest, args.a1, args.a2)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    set_verbosity(args.verbose)
    try:
        return _run(args)
    except (
        ManifestError,
        ConlluParseError,
        EmptyTreebankError,
        MalformedTreeError,
        EnumerationCapacityError,
    ) as e:
        logger.error(e.msg)
        print(e.msg, file=sys.stderr)
        return 2
