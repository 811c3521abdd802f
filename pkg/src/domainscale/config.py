"""Run configuration shared by all pipeline commands.

A single JSON file names the input artifacts and hyperparameters; the
command line only adds run-scoped switches (output directory, thread count,
seed, label source). Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class RunConfig:
    """Paths and hyperparameters for a pipeline run.

    Path fields are resolved relative to the config file's directory when
    loaded from disk.
    """

    corpus: str
    embeddings: str
    corpus_format: str = "jsonl"
    bigram_embeddings: str | None = None
    scheme: str | None = None

    # category grouping
    min_count: int = 10
    n_domains: int | None = None
    stance_pairs: list[list[str]] = field(default_factory=list)
    overrides: dict[str, str] = field(default_factory=dict)
    domain_names: dict[int, str] = field(default_factory=dict)

    # labelling
    classifier: str = "logreg"
    epochs: int = 300
    learning_rate: float = 0.1
    l2: float = 1e-4
    holdout: float = 0.1

    # similarity and evaluation
    weighted_aggregate: bool = False
    n_permutations: int = 9999
    rile_codes: str | None = None
    eigenvalue_floor: float = 1e-10

    def validate(self) -> None:
        if self.corpus_format not in ("jsonl", "csv"):
            raise ConfigError(f"corpus_format must be jsonl or csv, got {self.corpus_format!r}")
        if self.classifier not in ("logreg", "majority"):
            raise ConfigError(f"classifier must be logreg or majority, got {self.classifier!r}")
        if self.min_count < 1:
            raise ConfigError("min_count must be at least 1")
        if self.n_domains is not None and self.n_domains < 1:
            raise ConfigError("n_domains must be at least 1")
        if not 0.0 < self.holdout < 1.0:
            raise ConfigError("holdout must be in (0, 1)")
        if self.epochs < 1 or self.learning_rate <= 0 or self.l2 < 0:
            raise ConfigError("invalid training hyperparameters")
        if self.n_permutations < 1:
            raise ConfigError("n_permutations must be positive")
        if self.eigenvalue_floor <= 0:
            raise ConfigError("eigenvalue_floor must be positive")
        for pair in self.stance_pairs:
            if len(pair) != 2:
                raise ConfigError(f"stance pair must have exactly 2 codes, got {pair!r}")


_PATH_FIELDS = ("corpus", "embeddings", "bigram_embeddings", "scheme", "rile_codes")


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a config file, resolving relative paths."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")

    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    for required in ("corpus", "embeddings"):
        if required not in raw:
            raise ConfigError(f"config is missing required key {required!r}")

    if "domain_names" in raw:
        try:
            raw["domain_names"] = {int(k): str(v) for k, v in raw["domain_names"].items()}
        except (TypeError, ValueError):
            raise ConfigError("domain_names keys must be cluster indices") from None

    base = path.parent
    for key in _PATH_FIELDS:
        if raw.get(key):
            raw[key] = str((base / raw[key]).resolve())

    try:
        config = RunConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    config.validate()
    return config
