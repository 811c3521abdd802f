"""Sentence embedding store, whitening transform and cosine distance.

Embeddings arrive precomputed in the EMB1 text format::

    EMB1 <count> <dim>
    <sentence-id> <f1> ... <f_dim>

one row per id, space-separated decimal floats. Ids must not contain
whitespace. Parsing is bit-exact: the floats written by a producer are
recovered unchanged.

Whitening maps the fitting sample to zero mean and identity covariance. The
symmetric (ZCA-style) form ``U diag(max(l, floor))^(-1/2) U^T`` is used, with
a small eigenvalue floor guarding rank-deficient directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmbeddingFormatError,
    InsufficientDataError,
    MissingEmbeddingError,
    UndefinedResultError,
    ValidationError,
)

DEFAULT_EIGENVALUE_FLOOR = 1e-10


class EmbeddingStore:
    """Immutable map from sentence id to a dense float64 vector."""

    def __init__(self, ids: list[str], matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise DimensionMismatchError("embedding matrix must be 2-D")
        if len(ids) != matrix.shape[0]:
            raise DimensionMismatchError("one row per id required")
        if matrix.shape[1] < 1:
            raise ValidationError("embedding dimension must be positive")
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate ids in embedding store")
        if matrix.size and not np.isfinite(matrix).all():
            raise ValidationError("non-finite embedding values")
        self._ids = tuple(ids)
        self._matrix = matrix
        self._matrix.setflags(write=False)
        self._index = {sid: i for i, sid in enumerate(ids)}

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def ids(self) -> tuple[str, ...]:
        return self._ids

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, sid: str) -> bool:
        return sid in self._index

    def vector(self, sid: str) -> np.ndarray:
        try:
            return self._matrix[self._index[sid]]
        except KeyError:
            raise MissingEmbeddingError(f"no embedding for id {sid!r}") from None

    def vectors(self, sids) -> np.ndarray:
        """Rows for the given ids, in the given order."""
        rows = []
        for sid in sids:
            if sid not in self._index:
                raise MissingEmbeddingError(f"no embedding for id {sid!r}")
            rows.append(self._index[sid])
        if not rows:
            return np.empty((0, self.dim))
        return self._matrix[rows]


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Parse an EMB1 file into a store; any format violation raises."""
    path = Path(path)
    if not path.exists():
        raise EmbeddingFormatError(f"no such file: {path}")
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "EMB1":
            raise EmbeddingFormatError("header must be 'EMB1 <count> <dim>'")
        try:
            count, dim = int(header[1]), int(header[2])
        except ValueError:
            raise EmbeddingFormatError("header count/dim must be integers") from None
        if count < 0 or dim < 1:
            raise EmbeddingFormatError("header requires count >= 0 and dim >= 1")

        ids: list[str] = []
        matrix = np.empty((count, dim))
        seen: set[str] = set()
        row = 0
        for line in fh:
            if not line.strip():
                continue
            fields = line.split()
            sid = fields[0]
            if row >= count:
                raise EmbeddingFormatError(
                    f"row count mismatch: more rows than the declared {count}"
                )
            if len(fields) - 1 != dim:
                raise EmbeddingFormatError(
                    f"row {sid!r}: dimension mismatch, expected {dim} values, "
                    f"got {len(fields) - 1}"
                )
            if sid in seen:
                raise EmbeddingFormatError(f"duplicate id {sid!r}")
            seen.add(sid)
            try:
                values = [float(tok) for tok in fields[1:]]
            except ValueError:
                raise EmbeddingFormatError(
                    f"row {sid!r}: value is not a number"
                ) from None
            if not all(np.isfinite(values)):
                raise EmbeddingFormatError(f"row {sid!r}: value is not finite")
            matrix[row] = values
            ids.append(sid)
            row += 1
        if row != count:
            raise EmbeddingFormatError(
                f"row count mismatch: declared {count}, found {row}"
            )
    return EmbeddingStore(ids, matrix)


def write_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    """Write the EMB1 form of a store (shortest round-trip float spelling)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"EMB1 {len(store)} {store.dim}\n")
        for sid in store.ids:
            if any(ch.isspace() for ch in sid):
                raise ValidationError(f"id {sid!r} contains whitespace")
            row = store.vector(sid)
            fh.write(sid + " " + " ".join(repr(float(x)) for x in row) + "\n")


@dataclass(frozen=True)
class WhiteningTransform:
    """Affine map sending the fitting sample to zero mean, unit covariance."""

    mean: np.ndarray
    transform: np.ndarray
    eigenvalue_floor: float

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "WhiteningTransform":
        return cls(np.zeros(dim), np.eye(dim), DEFAULT_EIGENVALUE_FLOOR)


def fit_whitening(
    store: EmbeddingStore,
    ids,
    eigenvalue_floor: float = DEFAULT_EIGENVALUE_FLOOR,
) -> WhiteningTransform:
    """Fit the symmetric whitening transform on the given sentence set.

    The sample covariance (divisor n-1) is eigendecomposed and inverted with
    eigenvalues clipped from below at the floor, so rank-deficient inputs do
    not blow up. Ids are processed in sorted order, making the fit bitwise
    deterministic regardless of the caller's iteration order.
    """
    ordered = sorted(set(ids))
    if len(ordered) < 2:
        raise InsufficientDataError("whitening requires at least 2 sentences")
    X = store.vectors(ordered)
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (len(ordered) - 1)
    evals, evecs = np.linalg.eigh(cov)
    inv_sqrt = 1.0 / np.sqrt(np.maximum(evals, eigenvalue_floor))
    transform = (evecs * inv_sqrt) @ evecs.T
    return WhiteningTransform(mean=mean, transform=transform, eigenvalue_floor=eigenvalue_floor)


def apply_whitening(t: WhiteningTransform, v: np.ndarray) -> np.ndarray:
    """Apply ``transform @ (v - mean)`` to one vector or a stack of rows."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != t.dim:
        raise DimensionMismatchError(
            f"vector has dim {v.shape[-1]}, transform expects {t.dim}"
        )
    return (v - t.mean) @ t.transform.T


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - cos(a, b), in [0, 2]; raises on zero vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise UndefinedResultError("cosine distance of a zero vector is undefined")
    cos = float(np.dot(a, b) / (na * nb))
    cos = min(1.0, max(-1.0, cos))
    return 1.0 - cos


def normalized_rows(matrix: np.ndarray) -> np.ndarray:
    """Rows scaled to unit norm; raises when a row is zero."""
    norms = np.linalg.norm(matrix, axis=1)
    if (norms == 0.0).any():
        raise UndefinedResultError("cannot normalize a zero vector")
    return matrix / norms[:, None]
