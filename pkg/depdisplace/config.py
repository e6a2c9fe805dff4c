"""
Run manifest: which treebanks and systems a pipeline run covers and with
which settings.

Manifests are YAML files. Relative paths resolve against the manifest's
directory, and command-line flags override manifest values.
"""

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import yaml

from depdisplace.dispatcher import systems as supported_systems
from depdisplace.exceptions import ManifestError
from depdisplace.parser import TrainingConfig
from depdisplace.sampler import SamplerConfig
from depdisplace.treebank import BinSpec, discover_treebanks

JOBS_VARIABLE = "DEPDISPLACE_JOBS"

UAS_MODES = ("bin", "treebank")


@dataclass(frozen=True)
class TreebankSource:
    name: str
    train: Path | None
    test: Path | None


@dataclass
class RunManifest:
    treebanks: list[TreebankSource] = field(default_factory=list)
    systems: list[str] = field(default_factory=lambda: list(supported_systems))
    bins: BinSpec = field(default_factory=BinSpec.default)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    out_dir: Path = Path("out")
    clip_displacement: int = 20
    min_train: int = 1000
    min_test: int = 1000
    uas_mode: str = "bin"
    jobs: int = 1
    on_malformed: str = "reject"

    def validate(self):
        """Raises ManifestError on the first problem found"""
        if not self.systems:
            raise ManifestError("systems list is empty")
        for system in self.systems:
            if system not in supported_systems:
                raise ManifestError(
                    f"unknown system {system!r}, expected one of "
                    f"{', '.join(supported_systems)}"
                )
        if len(set(self.systems)) != len(self.systems):
            raise ManifestError("systems list has duplicates")
        if not self.treebanks:
            raise ManifestError("no treebanks listed or discovered")
        names = [source.name for source in self.treebanks]
        if len(set(names)) != len(names):
            raise ManifestError("treebank names are not unique")
        for source in self.treebanks:
            if source.train is None and source.test is None:
                raise ManifestError(f"treebank {source.name} has no split")
            for split in (source.train, source.test):
                if split is not None and not split.is_file():
                    raise ManifestError(f"treebank {source.name}: {split} not found")
        if self.uas_mode not in UAS_MODES:
            raise ManifestError(f"uas_mode must be one of {', '.join(UAS_MODES)}")
        if self.on_malformed not in ("reject", "abort"):
            raise ManifestError("on_malformed must be 'reject' or 'abort'")
        if self.clip_displacement < 1:
            raise ManifestError("clip_displacement must be >= 1")
        if self.min_train < 0 or self.min_test < 0:
            raise ManifestError("min_train and min_test must be nonnegative")
        if self.jobs < 1:
            raise ManifestError("jobs must be >= 1")
        return self


def _resolve(base: Path, value) -> Path:
    path = Path(value).expanduser()
    return path if path.is_absolute() else base / path


def _treebank_entry(base: Path, entry) -> TreebankSource:
    if not isinstance(entry, Mapping) or "name" not in entry:
        raise ManifestError(f"treebank entry {entry!r} needs a name")
    name = str(entry["name"])
    if "path" in entry:
        directory = _resolve(base, entry["path"])
        return TreebankSource(
            name, directory / "train.conllu", directory / "test.conllu"
        )
    train = _resolve(base, entry["train"]) if entry.get("train") else None
    test = _resolve(base, entry["test"]) if entry.get("test") else None
    return TreebankSource(name, train, test)


def _discovered(root: Path) -> list[TreebankSource]:
    if not root.is_dir():
        raise ManifestError(f"treebank root {root} is not a directory")
    return [
        TreebankSource(name, train, test)
        for name, (train, test) in discover_treebanks(root).items()
    ]


def _jobs_from_environment() -> int:
    value = os.environ.get(JOBS_VARIABLE, "1")
    try:
        return int(value)
    except ValueError:
        raise ManifestError(f"{JOBS_VARIABLE}={value!r} is not an integer")


def _section(data, key) -> dict:
    value = data.get(key) or {}
    if not isinstance(value, Mapping):
        raise ManifestError(f"{key} must be a mapping")
    return dict(value)


def load_manifest(path=None, overrides: Mapping | None = None) -> RunManifest:
    """
    Builds and validates a manifest

    :param path: YAML manifest file, or None to build from overrides only
    :param overrides: flag values by manifest key; None values are ignored.
        Keys: treebank_root, systems, bins, out_dir, clip_displacement,
        min_train, min_test, uas_mode, jobs, seed, reps, include_root_arcs,
        all_arcs, min_bin_sentences, epochs
    :return: validated RunManifest
    """
    data, base = {}, Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as handle:
                data = yaml.safe_load(handle) or {}
        except OSError as e:
            raise ManifestError(f"cannot read manifest {path}: {e}")
        except yaml.YAMLError as e:
            raise ManifestError(f"manifest {path} is not valid YAML: {e}")
        if not isinstance(data, Mapping):
            raise ManifestError(f"manifest {path} must be a mapping")
        base = path.resolve().parent
    flags = {
        key: value for key, value in (overrides or {}).items() if value is not None
    }

    def pick(key, default):
        return flags.get(key, data.get(key, default))

    try:
        manifest = RunManifest()
        entries = data.get("treebanks") or []
        sources = [_treebank_entry(base, entry) for entry in entries]
        root = flags.get("treebank_root")
        if root is not None:
            sources.extend(_discovered(Path(root)))
        elif data.get("treebank_root"):
            sources.extend(_discovered(_resolve(base, data["treebank_root"])))
        manifest.treebanks = sources
        systems = pick("systems", manifest.systems)
        if isinstance(systems, str):
            systems = [item.strip() for item in systems.split(",") if item.strip()]
        manifest.systems = list(systems)
        bins = pick("bins", None)
        if bins is not None:
            manifest.bins = BinSpec.parse(bins) if isinstance(bins, str) else BinSpec(
                tuple(tuple(item) for item in bins)
            )
        if "out_dir" in flags:
            manifest.out_dir = Path(flags["out_dir"])
        elif data.get("out_dir"):
            manifest.out_dir = _resolve(base, data["out_dir"])
        manifest.clip_displacement = int(pick("clip_displacement", 20))
        manifest.min_train = int(pick("min_train", 1000))
        manifest.min_test = int(pick("min_test", 1000))
        manifest.uas_mode = str(pick("uas_mode", "bin"))
        manifest.on_malformed = str(pick("on_malformed", "reject"))
        if "jobs" in flags or "jobs" in data:
            manifest.jobs = int(pick("jobs", 1))
        else:
            manifest.jobs = _jobs_from_environment()

        sampler = _section(data, "sampler")
        for flag, key in (
            ("seed", "seed"),
            ("reps", "repetitions"),
            ("include_root_arcs", "include_root_arcs"),
            ("all_arcs", "all_arcs"),
            ("min_bin_sentences", "min_bin_sentences"),
        ):
            if flag in flags:
                sampler[key] = flags[flag]
        manifest.sampler = replace(SamplerConfig(), **sampler)

        training = _section(data, "training")
        if "seed" in flags:
            training["seed"] = flags["seed"]
        if "epochs" in flags:
            training["epochs"] = flags["epochs"]
        manifest.training = replace(TrainingConfig(), **training)
    except ManifestError:
        raise
    except (TypeError, ValueError, KeyError) as e:
        raise ManifestError(str(e))
    return manifest.validate()
