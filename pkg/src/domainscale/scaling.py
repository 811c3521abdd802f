"""One-dimensional scaling of party distance matrices and external validation.

Validation compares the scaled positions against a left-right index computed
from category counts, tests matrix-level agreement with a permutation
(Mantel) test, and provides a salience-based ground truth matrix for
synthetic-data checks.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import stdtr

from .corpus import Corpus
from .errors import UndefinedResultError, ValidationError
from .similarity import PartyDistanceMatrix

EXACT_PERMUTATION_LIMIT = 5040  # enumerate all permutations up to 7 parties


@dataclass(frozen=True)
class ScalingResult:
    """First principal axis of a classical (Torgerson) MDS embedding."""

    parties: tuple[str, ...]
    positions: np.ndarray
    eigenvalue: float
    explained_ratio: float

    def position_of(self, party: str) -> float:
        return float(self.positions[self.parties.index(party)])

    def as_dict(self) -> dict:
        return {
            "parties": list(self.parties),
            "positions": [float(x) for x in self.positions],
            "eigenvalue": float(self.eigenvalue),
            "explained_ratio": float(self.explained_ratio),
        }


@dataclass(frozen=True)
class MantelResult:
    r: float
    p: float
    n_perm: int
    exact: bool

    def as_dict(self) -> dict:
        return {
            "r": float(self.r),
            "p": float(self.p),
            "n_perm": int(self.n_perm),
            "exact": bool(self.exact),
        }


def _square_values(matrix: PartyDistanceMatrix | np.ndarray) -> np.ndarray:
    values = matrix.values if isinstance(matrix, PartyDistanceMatrix) else np.asarray(matrix, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValidationError("distance matrix must be square")
    if not np.isfinite(values).all():
        raise UndefinedResultError("distance matrix has undefined entries")
    return values


def classical_mds_axis1(matrix: PartyDistanceMatrix) -> ScalingResult:
    """Project parties onto the leading axis of classical metric MDS.

    Double-centers the squared distances, takes the top eigenpair, and fixes
    the sign so the alphabetically first party with a nonzero coordinate sits
    on the non-negative side. The explained ratio is the top eigenvalue over
    the sum of all positive eigenvalues.
    """
    d = _square_values(matrix)
    n = d.shape[0]
    if n < 2:
        raise UndefinedResultError("scaling needs at least 2 parties")
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d * d) @ j
    b = (b + b.T) / 2.0
    evals, evecs = np.linalg.eigh(b)
    top = float(evals[-1])
    axis = math.sqrt(max(top, 0.0)) * evecs[:, -1]

    order = sorted(range(n), key=lambda i: matrix.parties[i])
    for i in order:
        if axis[i] != 0.0:
            if axis[i] < 0.0:
                axis = -axis
            break

    positive = evals[evals > 0.0]
    ratio = top / float(positive.sum()) if positive.size and top > 0.0 else 0.0
    return ScalingResult(
        parties=matrix.parties,
        positions=axis,
        eigenvalue=top,
        explained_ratio=ratio,
    )


def load_rile_codes(path: str | Path | None = None) -> tuple[frozenset[str], frozenset[str]]:
    """(right, left) category-code sets of the standard left-right index."""
    if path is None:
        raw = json.loads(
            resources.files("domainscale.data").joinpath("rile_codes.json").read_text(encoding="utf-8")
        )
    else:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    right = frozenset(str(c) for c in raw["right"])
    left = frozenset(str(c) for c in raw["left"])
    if right & left:
        raise ValidationError("left and right code sets overlap")
    return right, left


def rile(
    counts: dict[str, int],
    right: frozenset[str],
    left: frozenset[str],
) -> float:
    """(R - L) / N over category counts; N counts every coded sentence."""
    n = sum(counts.values())
    if n == 0:
        raise UndefinedResultError("no coded sentences")
    r = sum(c for code, c in counts.items() if code in right)
    l = sum(c for code, c in counts.items() if code in left)
    return (r - l) / n


def rile_scores(
    corpus: Corpus,
    right: frozenset[str] | None = None,
    left: frozenset[str] | None = None,
) -> dict[str, float]:
    """Left-right index per party from its category counts."""
    if right is None or left is None:
        right, left = load_rile_codes()
    scores: dict[str, float] = {}
    for party in corpus.parties():
        counts: dict[str, int] = {}
        for s in corpus.party_sentences(party):
            if s.code is not None:
                counts[s.code] = counts.get(s.code, 0) + 1
        scores[party] = rile(counts, right, left)
    return scores


def salience_distance_matrix(corpus: Corpus) -> PartyDistanceMatrix:
    """Euclidean distances between per-party category-frequency profiles.

    Each party is a vector of code frequencies relative to its total sentence
    count, so the matrix reflects issue emphasis only, not issue positions.
    """
    parties = tuple(corpus.parties())
    codes = corpus.codes()
    profiles = np.zeros((len(parties), len(codes)))
    coverage: dict[str, int] = {}
    for i, party in enumerate(parties):
        sentences = corpus.party_sentences(party)
        coverage[party] = len(sentences)
        counts: dict[str, int] = {}
        for s in sentences:
            if s.code is not None:
                counts[s.code] = counts.get(s.code, 0) + 1
        for j, code in enumerate(codes):
            profiles[i, j] = counts.get(code, 0) / len(sentences)
    d = np.zeros((len(parties), len(parties)))
    for i in range(len(parties)):
        for j in range(i + 1, len(parties)):
            d[i, j] = d[j, i] = float(np.linalg.norm(profiles[i] - profiles[j]))
    return PartyDistanceMatrix(
        parties=parties, values=d, tag="salience-ground-truth", coverage=coverage
    )


def pearson(x, y) -> tuple[float, float]:
    """Pearson correlation with a two-sided t-test p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("inputs must be 1-d arrays of equal length")
    n = x.size
    if n < 3:
        raise UndefinedResultError("correlation needs at least 3 points")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise UndefinedResultError("correlation inputs contain undefined values")
    xc = x - x.mean()
    yc = y - y.mean()
    # sqrt of the product keeps r == 1.0 bit-exact for identical inputs
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise UndefinedResultError("correlation undefined for constant input")
    r = float(xc @ yc) / denom
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    df = n - 2
    t = abs(r) * math.sqrt(df / (1.0 - r * r))
    p = 2.0 * float(stdtr(df, -t))
    return r, p


def _upper(values: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(values.shape[0], k=1)
    return values[iu]


def _pearson_r_only(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise UndefinedResultError("correlation undefined for constant input")
    return float(xc @ yc) / denom


def mantel(
    a: PartyDistanceMatrix | np.ndarray,
    b: PartyDistanceMatrix | np.ndarray,
    n_perm: int = 9999,
    seed: int = 0,
) -> MantelResult:
    """One-sided Mantel permutation test between two distance matrices.

    The statistic is the Pearson correlation of the strict upper triangles.
    Rows and columns of the second matrix are permuted together. With up to
    7 items every permutation is enumerated and the p-value is the exact
    fraction with r at least as large as observed; otherwise ``n_perm``
    permutations are sampled and the add-one estimate is reported.
    """
    va = _square_values(a)
    vb = _square_values(b)
    if va.shape != vb.shape:
        raise ValidationError("matrices differ in size")
    n = va.shape[0]
    if n < 3:
        raise UndefinedResultError("mantel test needs at least 3 items")
    if (
        isinstance(a, PartyDistanceMatrix)
        and isinstance(b, PartyDistanceMatrix)
        and a.parties != b.parties
    ):
        raise ValidationError("matrices are over different parties")

    xa = _upper(va)
    r_obs = _pearson_r_only(xa, _upper(vb))

    total = math.factorial(n)
    if total <= EXACT_PERMUTATION_LIMIT:
        count = 0
        for perm in itertools.permutations(range(n)):
            idx = np.array(perm)
            r_perm = _pearson_r_only(xa, _upper(vb[np.ix_(idx, idx)]))
            if r_perm >= r_obs:
                count += 1
        return MantelResult(r=r_obs, p=count / total, n_perm=total, exact=True)

    rng = np.random.Generator(np.random.Philox(seed))
    count = 0
    for _ in range(n_perm):
        idx = rng.permutation(n)
        r_perm = _pearson_r_only(xa, _upper(vb[np.ix_(idx, idx)]))
        if r_perm >= r_obs:
            count += 1
    return MantelResult(
        r=r_obs, p=(count + 1) / (n_perm + 1), n_perm=n_perm, exact=False
    )


def correlate_with_rile(result: ScalingResult, scores: dict[str, float]) -> dict:
    """Signed and absolute Pearson correlation of scaled positions with the
    left-right index, keyed for report output."""
    missing = [p for p in result.parties if p not in scores]
    if missing:
        raise ValidationError(f"no left-right score for parties: {missing}")
    x = [result.position_of(p) for p in result.parties]
    y = [scores[p] for p in result.parties]
    r, p = pearson(x, y)
    return {"r": r, "abs_r": abs(r), "p": p}
