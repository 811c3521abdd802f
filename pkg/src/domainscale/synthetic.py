"""Synthetic corpora with known structure for end-to-end validation.

Real manifesto corpora are licensed, so correctness is argued on planted
data: parties receive known one-dimensional positions inside each policy
domain, sentence embeddings are drawn around domain-and-position-dependent
centroids, and the pipeline must recover the planted geometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, DomainScheme, Sentence, write_corpus
from .embeddings import EmbeddingStore, write_embeddings
from .errors import ValidationError
from .similarity import AGGREGATE_TAG, PartyDistanceMatrix

PARTIES = ("p1", "p2", "p3", "p4", "p5", "p6")
DOMAIN_CODES = {
    "economy": ("401", "404"),
    "environment": ("416", "501"),
    "security": ("104", "105"),
    "welfare": ("504", "506"),
}
POSITION_LEVELS = (-2.5, -1.5, -0.5, 0.5, 1.5, 2.5)
ELECTION_DATE = "2021-09"


def make_blobs(
    n_train: int = 200,
    n_test: int = 100,
    dim: int = 8,
    separation: float = 6.0,
    seed: int = 7,
) -> tuple[np.ndarray, list[str], np.ndarray, list[str]]:
    """Two Gaussian blobs split into train and test halves.

    Blob means sit at +-separation/2 along the first axis with unit noise,
    so a linear classifier separates them almost perfectly.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    half = separation / 2.0

    def draw(count):
        per = count // 2
        xs, ys = [], []
        for sign, label in ((-1.0, "blob_a"), (1.0, "blob_b")):
            x = rng.normal(0.0, 1.0, size=(per, dim))
            x[:, 0] += sign * half
            xs.append(x)
            ys.extend([label] * per)
        return np.vstack(xs), ys

    x_train, y_train = draw(n_train)
    x_test, y_test = draw(n_test)
    return x_train, y_train, x_test, y_test


@dataclass(frozen=True)
class PlantedLandscape:
    """A synthetic corpus bundled with the geometry it was built from."""

    corpus: Corpus
    store: EmbeddingStore
    scheme: DomainScheme
    positions: dict[str, dict[str, float]]
    planted_by_domain: dict[str, PartyDistanceMatrix]
    planted_aggregate: PartyDistanceMatrix


def _planted_matrix(parties, positions, tag, coverage) -> PartyDistanceMatrix:
    n = len(parties)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = abs(positions[parties[i]] - positions[parties[j]])
    return PartyDistanceMatrix(parties=parties, values=d, tag=tag, coverage=coverage)


def make_planted_landscape(
    seed: int = 20210926,
    n_per_domain: int = 30,
    dim: int = 16,
    noise: float = 0.5,
    base_scale: float = 8.0,
) -> PlantedLandscape:
    """Corpus of 6 parties with planted 1-D positions in 4 policy domains.

    Domain d occupies its own centroid direction (axis 4+d, scaled by
    ``base_scale``) and its own position direction (axis d); party p's
    sentences in domain d scatter around centroid + x[d][p] * axis_d with
    isotropic Gaussian noise. Positions are a per-domain shuffle of fixed
    symmetric levels. The planted matrices are the |position difference|
    tables the pipeline is expected to recover up to a monotone deformation.
    """
    domains = sorted(DOMAIN_CODES)
    if dim < 4 + len(domains):
        raise ValidationError("dimension too small for the planted construction")
    rng = np.random.Generator(np.random.Philox(seed))

    positions: dict[str, dict[str, float]] = {}
    for d_idx, domain in enumerate(domains):
        shuffled = rng.permutation(np.array(POSITION_LEVELS))
        positions[domain] = {p: float(shuffled[i]) for i, p in enumerate(PARTIES)}

    sentences = []
    ids = []
    rows = []
    for party in PARTIES:
        position = 0
        for k in range(n_per_domain):
            for d_idx, domain in enumerate(domains):
                code = DOMAIN_CODES[domain][k % 2]
                sid = f"{party}-{position:04d}"
                sentences.append(
                    Sentence(
                        id=sid,
                        party=party,
                        election_date=ELECTION_DATE,
                        position=position,
                        text=f"{party} {domain} point {k}",
                        code=code,
                    )
                )
                vec = rng.normal(0.0, noise, size=dim)
                vec[4 + d_idx] += base_scale
                vec[d_idx] += positions[domain][party]
                ids.append(sid)
                rows.append(vec)
                position += 1

    corpus = Corpus(sentences)
    store = EmbeddingStore(tuple(ids), np.vstack(rows))
    scheme = DomainScheme(
        {d: set(DOMAIN_CODES[d]) for d in domains}, other_codes={"0"}
    )

    coverage = {p: n_per_domain for p in PARTIES}
    planted = {
        d: _planted_matrix(PARTIES, positions[d], d, coverage) for d in domains
    }
    agg_values = np.mean([planted[d].values for d in domains], axis=0)
    planted_aggregate = PartyDistanceMatrix(
        parties=PARTIES,
        values=agg_values,
        tag=AGGREGATE_TAG,
        coverage={p: n_per_domain * len(domains) for p in PARTIES},
    )
    return PlantedLandscape(
        corpus=corpus,
        store=store,
        scheme=scheme,
        positions=positions,
        planted_by_domain=planted,
        planted_aggregate=planted_aggregate,
    )


def corrupt_labels(
    labels: dict[str, str], fraction: float, choices: list[str], seed: int = 0
) -> dict[str, str]:
    """Reassign a fraction of labels to a different value, chosen at random.

    Ids are processed in sorted order so corruption is reproducible.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValidationError("fraction must be in [0, 1]")
    rng = np.random.Generator(np.random.Philox(seed))
    out = dict(labels)
    sids = sorted(labels)
    n_corrupt = int(round(fraction * len(sids)))
    picked = rng.choice(len(sids), size=n_corrupt, replace=False)
    for idx in sorted(picked):
        sid = sids[idx]
        others = [c for c in choices if c != labels[sid]]
        out[sid] = others[int(rng.integers(len(others)))]
    return out


def write_planted_landscape(land: PlantedLandscape, outdir: str | Path) -> dict[str, Path]:
    """Materialize the landscape as corpus/embeddings/scheme files plus the
    planted matrices, returning the paths keyed by role."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": outdir / "corpus.jsonl",
        "embeddings": outdir / "embeddings.emb1",
        "scheme": outdir / "scheme.json",
        "planted_aggregate": outdir / "planted_aggregate.json",
    }
    write_corpus(land.corpus, paths["corpus"])
    write_embeddings(land.store, paths["embeddings"])
    land.scheme.save(paths["scheme"])
    land.planted_aggregate.to_json(paths["planted_aggregate"])
    for domain, matrix in land.planted_by_domain.items():
        key = f"planted_{domain}"
        paths[key] = outdir / f"{key}.json"
        matrix.to_json(paths[key])
    return paths
