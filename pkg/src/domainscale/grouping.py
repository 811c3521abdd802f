"""Category coherence distances, average-linkage clustering, scheme assembly.

The distance between two categories is the mean cosine distance between the
whitened embeddings of their sentences, taken over all cross pairs. Within a
single category the mean runs over unordered distinct pairs, so a category is
never compared against itself sentence-by-sentence.

Clustering is plain agglomerative average linkage (UPGMA): the distance
between two clusters is the unweighted mean of all leaf-pair distances across
them. Ties are broken deterministically by the lexicographically smallest
member codes of the candidate pair, so reruns produce identical trees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, DomainScheme, OTHER_LABEL, category_counts
from .embeddings import EmbeddingStore, WhiteningTransform, apply_whitening, normalized_rows
from .errors import (
    InsufficientDataError,
    UnknownKeyError,
    ValidationError,
)
from .util import fmt_float

RESERVED_NON_DOMAIN_CODE = "0"


@dataclass(frozen=True)
class CategoryDistanceMatrix:
    """Symmetric distance matrix over category codes, zero diagonal."""

    codes: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        n = len(self.codes)
        if d.shape != (n, n):
            raise ValidationError("matrix shape does not match code list")
        if not np.isfinite(d).all():
            raise ValidationError("matrix entries must be finite")
        if not np.allclose(d, d.T, atol=1e-12) or np.abs(np.diag(d)).max(initial=0.0) > 0:
            raise ValidationError("matrix must be symmetric with zero diagonal")
        if d.size and (d.min() < -1e-12 or d.max() > 2 + 1e-12):
            raise ValidationError("entries must lie in [0, 2]")
        object.__setattr__(self, "d", d)

    def entry(self, p: str, q: str) -> float:
        i, j = self.codes.index(p), self.codes.index(q)
        return float(self.d[i, j])


def _category_sums(corpus, store, w, code):
    """Normalized whitened vectors for a category: (sum, sum of squares, n)."""
    ids = sorted(corpus.code_ids(code))
    if not ids:
        raise InsufficientDataError(f"category {code!r} has no sentences")
    vecs = normalized_rows(apply_whitening(w, store.vectors(ids)))
    return vecs.sum(axis=0), float((vecs * vecs).sum()), len(ids)


def _mean_cross(sum_a, n_a, sum_b, n_b) -> float:
    sim = float(sum_a @ sum_b) / (n_a * n_b)
    return min(2.0, max(0.0, 1.0 - sim))


def _mean_within(total, sq, n) -> float:
    if n < 2:
        raise InsufficientDataError("within-category distance needs >= 2 sentences")
    sim = (float(total @ total) - sq) / (n * (n - 1))
    return min(2.0, max(0.0, 1.0 - sim))


def category_distance(
    corpus: Corpus,
    store: EmbeddingStore,
    w: WhiteningTransform,
    p: str,
    q: str,
) -> float:
    """Mean pairwise cosine distance between two categories' sentences.

    For p == q the mean runs over unordered distinct pairs (self-pairs would
    bias the coherence toward zero).
    """
    sum_p, sq_p, n_p = _category_sums(corpus, store, w, p)
    if p == q:
        return _mean_within(sum_p, sq_p, n_p)
    sum_q, _, n_q = _category_sums(corpus, store, w, q)
    return _mean_cross(sum_p, n_p, sum_q, n_q)


def build_category_matrix(
    corpus: Corpus,
    store: EmbeddingStore,
    w: WhiteningTransform,
    min_count: int = 10,
    threads: int = 1,
) -> tuple[CategoryDistanceMatrix, dict[str, int]]:
    """Distance matrix over all codes meeting the occurrence threshold.

    Returns the matrix plus the excluded codes with their counts, for manual
    assignment later. The reserved non-domain code "0" is never clustered and
    appears in neither.
    """
    counts = category_counts(corpus)
    counts.pop(RESERVED_NON_DOMAIN_CODE, None)
    kept = sorted(code for code, n in counts.items() if n >= min_count)
    leftovers = {code: n for code, n in sorted(counts.items()) if n < min_count}
    if len(kept) < 2:
        raise InsufficientDataError(
            f"only {len(kept)} categories have >= {min_count} occurrences; "
            "need at least 2 to build a distance matrix"
        )

    sums = {code: _category_sums(corpus, store, w, code) for code in kept}
    pairs = [(i, j) for i in range(len(kept)) for j in range(i + 1, len(kept))]

    def pair_value(ij):
        i, j = ij
        sum_a, _, n_a = sums[kept[i]]
        sum_b, _, n_b = sums[kept[j]]
        return _mean_cross(sum_a, n_a, sum_b, n_b)

    if threads > 1 and len(pairs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(pair_value, pairs))
    else:
        values = [pair_value(ij) for ij in pairs]

    d = np.zeros((len(kept), len(kept)))
    for (i, j), v in zip(pairs, values):
        d[i, j] = d[j, i] = v
    return CategoryDistanceMatrix(codes=tuple(kept), d=d), leftovers


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree from agglomerative clustering.

    Leaves are numbered 0..n-1 in code order; merge i creates cluster n+i.
    Every cluster id except the root is referenced exactly once as a child.
    """

    leaves: tuple[str, ...]
    merges: tuple[tuple[int, int, float, int], ...]  # (left, right, height, size)

    def members(self, cluster_id: int) -> frozenset[str]:
        n = len(self.leaves)
        if cluster_id < n:
            return frozenset([self.leaves[cluster_id]])
        left, right, _, _ = self.merges[cluster_id - n]
        return self.members(left) | self.members(right)

    def to_json(self, path: str | Path) -> None:
        obj = {
            "leaves": list(self.leaves),
            "merges": [
                {"left": l, "right": r, "height": h, "size": s}
                for l, r, h, s in self.merges
            ],
        }
        Path(path).write_text(
            json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "Dendrogram":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        merges = tuple(
            (m["left"], m["right"], float(m["height"]), int(m["size"]))
            for m in obj["merges"]
        )
        return cls(leaves=tuple(obj["leaves"]), merges=merges)


def average_linkage_cluster(m: CategoryDistanceMatrix) -> Dendrogram:
    """UPGMA clustering of the category distance matrix.

    At every step the pair of clusters with minimal average leaf-pair distance
    is merged; among equal distances the pair whose sorted representative
    codes (each cluster's lexicographically smallest member) compare least is
    chosen. Heights are checked to be non-decreasing.
    """
    codes = m.codes
    n = len(codes)
    if n < 2:
        raise InsufficientDataError("clustering needs at least 2 categories")

    rep = {i: codes[i] for i in range(n)}  # smallest member code per cluster
    size = {i: 1 for i in range(n)}
    active = set(range(n))
    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(m.d[i, j])

    merges: list[tuple[int, int, float, int]] = []
    last_height = -np.inf
    for step in range(n - 1):
        best = None
        for (a, b), d in dist.items():
            key = (d, tuple(sorted((rep[a], rep[b]))))
            if best is None or key < best[0]:
                best = (key, a, b)
        (height, _), a, b = best

        if height < last_height - 1e-12:
            raise RuntimeError("average-linkage heights decreased; internal error")
        # clamp away sub-epsilon dips so recorded heights are monotone
        height = max(height, last_height)
        last_height = height

        left, right = (a, b) if rep[a] <= rep[b] else (b, a)
        new_id = n + step
        new_size = size[a] + size[b]
        merges.append((left, right, height, new_size))

        for z in active:
            if z in (a, b):
                continue
            da = dist.pop(tuple(sorted((a, z))))
            db = dist.pop(tuple(sorted((b, z))))
            # UPGMA update in a form exact under ties: da + w*(db - da)
            w_b = size[b] / new_size
            dist[(z, new_id) if z < new_id else (new_id, z)] = da + w_b * (db - da)
        dist.pop((a, b) if a < b else (b, a))

        active.discard(a)
        active.discard(b)
        active.add(new_id)
        rep[new_id] = min(rep[a], rep[b])
        size[new_id] = new_size

    return Dendrogram(leaves=codes, merges=tuple(merges))


@dataclass(frozen=True)
class Partition:
    """Flat clustering of codes; clusters ordered by smallest member code."""

    clusters: tuple[tuple[str, ...], ...]

    def cluster_of(self, code: str) -> int:
        for i, cluster in enumerate(self.clusters):
            if code in cluster:
                return i
        raise UnknownKeyError(f"code {code!r} is not in the partition")

    def codes(self) -> list[str]:
        return sorted(c for cluster in self.clusters for c in cluster)


def cut_dendrogram(dgram: Dendrogram, k: int) -> Partition:
    """Partition into k clusters by undoing the last k-1 merges."""
    n = len(dgram.leaves)
    if not 1 <= k <= n:
        raise ValidationError(f"k must be in [1, {n}], got {k}")
    groups: dict[int, set[str]] = {i: {code} for i, code in enumerate(dgram.leaves)}
    for step in range(n - k):
        left, right, _, _ = dgram.merges[step]
        merged = groups.pop(left) | groups.pop(right)
        groups[n + step] = merged
    clusters = sorted((tuple(sorted(g)) for g in groups.values()), key=lambda c: c[0])
    return Partition(clusters=tuple(clusters))


def check_stance_pairing(partition: Partition, stance_pairs: list[tuple[str, str]]) -> dict:
    """Verify that paired opposite-stance codes share a cluster."""
    results = []
    for a, b in stance_pairs:
        ca = partition.cluster_of(a)
        cb = partition.cluster_of(b)
        results.append(
            {"codes": [a, b], "same_cluster": ca == cb, "clusters": [ca, cb]}
        )
    return {"pairs": results, "pass": all(r["same_cluster"] for r in results)}


def finalize_scheme(
    partition: Partition,
    overrides: dict[str, str] | None = None,
    names: dict[int, str] | None = None,
) -> DomainScheme:
    """Turn a partition into a named DomainScheme.

    ``names`` maps cluster index to domain name (unnamed clusters get
    "cluster_NN"). ``overrides`` assigns codes (typically below-threshold
    leftovers) to a named domain or to "other"; an override wins over any
    cluster membership the code already has.
    """
    overrides = overrides or {}
    names = names or {}
    domain_names = []
    for i in range(len(partition.clusters)):
        name = names.get(i, f"cluster_{i:02d}")
        domain_names.append(name)
    domains: dict[str, set[str]] = {}
    for name, cluster in zip(domain_names, partition.clusters):
        if name in domains:
            raise ValidationError(f"duplicate domain name {name!r}")
        domains[name] = set(cluster)

    other: set[str] = set()
    valid_targets = set(domains) | {OTHER_LABEL}
    for code, target in sorted(overrides.items()):
        if target not in valid_targets:
            raise UnknownKeyError(
                f"override target {target!r} is not a domain; "
                f"valid: {sorted(valid_targets)}"
            )
        for members in domains.values():
            members.discard(code)
        if target == OTHER_LABEL:
            other.add(code)
        else:
            domains[target].add(code)
    return DomainScheme(domains, other)


def write_category_matrix_csv(m: CategoryDistanceMatrix, path: str | Path) -> None:
    lines = ["," + ",".join(m.codes)]
    for i, code in enumerate(m.codes):
        lines.append(code + "," + ",".join(fmt_float(x) for x in m.d[i]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
