"""Per-domain party distance matrices and their salience-free aggregate.

A party's position in a domain is represented by the set of its sentences
labelled with that domain (gold codes mapped through the scheme, or
classifier predictions). The distance between two parties in a domain is the
mean cosine distance between the whitened embeddings of their sentence sets,
over all cross pairs. Pairs where either side is empty are undefined and kept
as NA, never coerced to zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, DomainScheme
from .embeddings import EmbeddingStore, WhiteningTransform, apply_whitening, normalized_rows
from .errors import (
    CorpusParseError,
    InsufficientDataError,
    UnknownKeyError,
    ValidationError,
)
from .util import fmt_float, json_ready

AGGREGATE_TAG = "aggregate"


@dataclass(frozen=True)
class PartyDistanceMatrix:
    """Symmetric party-by-party distances; NaN marks undefined pairs."""

    parties: tuple[str, ...]
    values: np.ndarray
    tag: str
    coverage: dict[str, int]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        n = len(self.parties)
        if v.shape != (n, n):
            raise ValidationError("matrix shape does not match party list")
        object.__setattr__(self, "values", v)

    def entry(self, p: str, q: str) -> float:
        try:
            i, j = self.parties.index(p), self.parties.index(q)
        except ValueError as exc:
            raise UnknownKeyError(str(exc)) from None
        return float(self.values[i, j])

    def is_fully_defined(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def reordered(self, parties: tuple[str, ...]) -> "PartyDistanceMatrix":
        if sorted(parties) != sorted(self.parties):
            raise ValidationError("party sets differ")
        idx = [self.parties.index(p) for p in parties]
        return PartyDistanceMatrix(
            parties=tuple(parties),
            values=self.values[np.ix_(idx, idx)],
            tag=self.tag,
            coverage=dict(self.coverage),
        )

    def to_csv(self, path: str | Path) -> None:
        lines = ["," + ",".join(self.parties)]
        for i, party in enumerate(self.parties):
            cells = [
                "NA" if math.isnan(x) else fmt_float(x) for x in self.values[i]
            ]
            lines.append(party + "," + ",".join(cells))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def to_json(self, path: str | Path) -> None:
        obj = {
            "tag": self.tag,
            "parties": list(self.parties),
            "values": json_ready(self.values),
            "coverage": {p: self.coverage.get(p, 0) for p in self.parties},
        }
        Path(path).write_text(
            json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "PartyDistanceMatrix":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        values = np.array(
            [[np.nan if x is None else float(x) for x in row] for row in obj["values"]]
        )
        return cls(
            parties=tuple(obj["parties"]),
            values=values,
            tag=obj["tag"],
            coverage={p: int(n) for p, n in obj["coverage"].items()},
        )

    @classmethod
    def from_csv(cls, path: str | Path, tag: str) -> "PartyDistanceMatrix":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        parties = tuple(lines[0].split(",")[1:])
        rows = []
        for line in lines[1:]:
            cells = line.split(",")
            rows.append([np.nan if c == "NA" else float(c) for c in cells[1:]])
        return cls(parties=parties, values=np.array(rows), tag=tag, coverage={})


def labels_from_codes(corpus: Corpus, scheme: DomainScheme) -> dict[str, str]:
    """Domain label for every coded sentence; non-domain codes map to "other"."""
    return {s.id: scheme.label_of(s.code) for s in corpus if s.code is not None}


def read_predictions(path: str | Path) -> dict[str, str]:
    """Load a predictions JSONL file ({"id", "predicted_domain"} per line)."""
    labels: dict[str, str] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON ({exc.msg})", line_no) from None
            if "id" not in rec or "predicted_domain" not in rec:
                raise CorpusParseError(
                    "prediction record needs 'id' and 'predicted_domain'", line_no
                )
            labels[str(rec["id"])] = str(rec["predicted_domain"])
    return labels


def _party_domain_ids(corpus, labels, domain, party) -> list[str]:
    return [s.id for s in corpus.party_sentences(party) if labels.get(s.id) == domain]


def domain_distance(
    corpus: Corpus,
    store: EmbeddingStore,
    w: WhiteningTransform,
    scheme: DomainScheme,
    domain: str,
    p: str,
    q: str,
    labels: dict[str, str],
) -> float | None:
    """Mean cross-pair cosine distance between two parties in one domain.

    Returns None when either party has no sentences in the domain. Sentences
    labelled "other" never participate.
    """
    if domain not in scheme.domain_names():
        raise UnknownKeyError(f"unknown domain {domain!r}")
    ids_p = _party_domain_ids(corpus, labels, domain, p)
    ids_q = _party_domain_ids(corpus, labels, domain, q)
    if not ids_p or not ids_q:
        return None
    vp = normalized_rows(apply_whitening(w, store.vectors(ids_p)))
    vq = normalized_rows(apply_whitening(w, store.vectors(ids_q)))
    sim = float(vp.sum(axis=0) @ vq.sum(axis=0)) / (len(ids_p) * len(ids_q))
    return min(2.0, max(0.0, 1.0 - sim))


def build_domain_matrix(
    corpus: Corpus,
    store: EmbeddingStore,
    w: WhiteningTransform,
    scheme: DomainScheme,
    labels: dict[str, str],
    domain: str,
    threads: int = 1,
) -> PartyDistanceMatrix:
    """All-pairs party distance matrix for one domain.

    The diagonal is zero by convention; rows of parties with an empty domain
    slice are NA and their emptiness is visible in the coverage counts.
    """
    if domain not in scheme.domain_names():
        raise UnknownKeyError(f"unknown domain {domain!r}")
    parties = tuple(corpus.parties())
    if len(parties) < 2:
        raise InsufficientDataError("need at least 2 parties")

    sums: dict[str, tuple[np.ndarray, int]] = {}
    coverage: dict[str, int] = {}
    for party in parties:
        ids = _party_domain_ids(corpus, labels, domain, party)
        coverage[party] = len(ids)
        if ids:
            vecs = normalized_rows(apply_whitening(w, store.vectors(ids)))
            sums[party] = (vecs.sum(axis=0), len(ids))

    pairs = [(i, j) for i in range(len(parties)) for j in range(i + 1, len(parties))]

    def pair_value(ij):
        i, j = ij
        a, b = parties[i], parties[j]
        if a not in sums or b not in sums:
            return np.nan
        sum_a, n_a = sums[a]
        sum_b, n_b = sums[b]
        sim = float(sum_a @ sum_b) / (n_a * n_b)
        return min(2.0, max(0.0, 1.0 - sim))

    if threads > 1 and len(pairs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(pair_value, pairs))
    else:
        values = [pair_value(ij) for ij in pairs]

    d = np.zeros((len(parties), len(parties)))
    for (i, j), v in zip(pairs, values):
        d[i, j] = d[j, i] = v
    return PartyDistanceMatrix(parties=parties, values=d, tag=domain, coverage=coverage)


def aggregate_matrix(
    per_domain: list[PartyDistanceMatrix], weighted: bool = False
) -> PartyDistanceMatrix:
    """Entrywise mean of the per-domain matrices.

    By default every domain counts equally, which removes domain salience
    from the aggregate. With ``weighted=True`` each domain is weighted by the
    pair's combined sentence coverage instead. A pair is undefined only when
    it is undefined in every domain.
    """
    if not per_domain:
        raise InsufficientDataError("need at least one domain matrix")
    parties = per_domain[0].parties
    for m in per_domain:
        if m.parties != parties:
            raise ValidationError("inconsistent party lists across domain matrices")

    n = len(parties)
    out = np.zeros((n, n))
    coverage = {p: 0 for p in parties}
    for m in per_domain:
        for p in parties:
            coverage[p] += m.coverage.get(p, 0)

    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            wsum = 0.0
            for m in per_domain:
                x = float(m.values[i, j])
                if math.isnan(x):
                    continue
                wt = (
                    float(m.coverage.get(parties[i], 0) + m.coverage.get(parties[j], 0))
                    if weighted
                    else 1.0
                )
                acc += wt * x
                wsum += wt
            v = acc / wsum if wsum > 0 else np.nan
            out[i, j] = out[j, i] = v
    return PartyDistanceMatrix(
        parties=parties, values=out, tag=AGGREGATE_TAG, coverage=coverage
    )
