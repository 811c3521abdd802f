"""Encode corpus sentences and sentence bigrams into EMB1 files.

The corpus interface is JSONL with one sentence per line (id, party,
election_date, position, text, optional code); the output interface is the
EMB1 text format: a header line `EMB1 <count> <dim>` followed by one
`<id> <f1> ... <f_dim>` row per vector. Both ends of the contract are plain
files, so this package has no dependency on the analysis code that consumes
them.

Two encoders are provided: a sentence-transformers model (the default is the
fully qualified multilingual paraphrase checkpoint) and a deterministic
offline encoder selected with model names like ``hash://32``, which derives
each vector from a SHA-256 digest of the text. The hash encoder exists so
pipelines and tests can run without model downloads; it preserves the real
encoder's properties that matter downstream: fixed dimension, determinism,
and dependence on the text alone.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger("corpus2emb")

BOS_TOKEN = "<BOS>"
HEADING_CODE = "H"
DEFAULT_MODEL = "paraphrase-multilingual-mpnet-base-v2"
HASH_SCHEME = "hash://"


class AdapterError(Exception):
    """Any input, model, or format problem; the CLI maps it to exit 1."""


@dataclass(frozen=True)
class SentenceRow:
    """One corpus sentence; manifesto identity is (party, election_date)."""

    id: str
    party: str
    election_date: str
    position: int
    text: str

    def manifesto(self) -> tuple[str, str]:
        return (self.party, self.election_date)


def read_corpus(path: str | Path) -> list[SentenceRow]:
    """Load corpus JSONL, drop heading units, order by manifesto position.

    Validation covers only what the encoder relies on: required fields,
    whitespace-free unique ids (ids become EMB1 row keys), integer positions.
    """
    rows: list[SentenceRow] = []
    seen: set[str] = set()
    path = Path(path)
    if not path.is_file():
        raise AdapterError(f"corpus file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdapterError(f"line {line_no}: invalid JSON ({exc.msg})") from None
            if rec.get("code") == HEADING_CODE:
                continue
            for field in ("id", "party", "election_date", "position", "text"):
                if field not in rec:
                    raise AdapterError(f"line {line_no}: missing field {field!r}")
            sid = str(rec["id"])
            if not sid or sid.split() != [sid]:
                raise AdapterError(f"line {line_no}: id must be non-empty without whitespace")
            if sid in seen:
                raise AdapterError(f"line {line_no}: duplicate id {sid!r}")
            seen.add(sid)
            try:
                position = int(rec["position"])
            except (TypeError, ValueError):
                raise AdapterError(f"line {line_no}: position must be an integer") from None
            rows.append(
                SentenceRow(
                    id=sid,
                    party=str(rec["party"]),
                    election_date=str(rec["election_date"]),
                    position=position,
                    text=str(rec["text"]),
                )
            )
    rows.sort(key=lambda r: (r.party, r.election_date, r.position))
    return rows


def bigram_pairs(rows: list[SentenceRow]) -> list[tuple[str, str]]:
    """(key, text) per sentence: key "<prev-id>|<id>", "<BOS>|<id>" at each
    manifesto start; text is the space-joined pair, bare text after BOS."""
    out: list[tuple[str, str]] = []
    prev: SentenceRow | None = None
    for row in rows:
        if prev is not None and prev.manifesto() != row.manifesto():
            prev = None
        if prev is None:
            out.append((f"{BOS_TOKEN}|{row.id}", row.text))
        else:
            out.append((f"{prev.id}|{row.id}", f"{prev.text} {row.text}"))
        prev = row
    return out


class HashEncoder:
    """Offline deterministic encoder: SHA-256 of the text seeds the draw."""

    max_tokens = 256

    def __init__(self, dim: int):
        if dim < 1:
            raise AdapterError("hash encoder dimension must be >= 1")
        self.dim = int(dim)
        self.truncated = 0

    def _vector(self, text: str) -> np.ndarray:
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:16], "big")
        rng = np.random.Generator(np.random.Philox(seed))
        v = rng.normal(size=self.dim)
        norm = float(np.linalg.norm(v))
        return v / norm if norm > 0.0 else v + 1.0 / np.sqrt(self.dim)

    def prepare(self, text: str) -> str:
        tokens = text.split()
        if len(tokens) > self.max_tokens:
            self.truncated += 1
            return " ".join(tokens[: self.max_tokens])
        return text

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.empty((0, self.dim))
        return np.vstack([self._vector(self.prepare(t)) for t in texts])


class SentenceTransformerEncoder:
    """Thin wrapper around a pretrained sentence-transformers checkpoint."""

    def __init__(self, model_name: str, device: str | None = None):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise AdapterError(
                f"sentence-transformers is not installed ({exc}); install the "
                f"'models' extra or use a hash:// model"
            ) from None
        try:
            self.model = SentenceTransformer(model_name, device=device)
        except Exception as exc:
            raise AdapterError(f"could not load model {model_name!r}: {exc}") from None
        self.dim = int(self.model.get_sentence_embedding_dimension())
        self.max_tokens = int(getattr(self.model, "max_seq_length", 128))
        self.truncated = 0

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.empty((0, self.dim))
        # the model truncates internally; count affected rows for the warning
        self.truncated += sum(len(t.split()) > self.max_tokens for t in texts)
        out = self.model.encode(
            list(texts),
            convert_to_numpy=True,
            show_progress_bar=False,
        )
        return np.asarray(out, dtype=np.float64)


def make_encoder(model_name: str, device: str | None = None):
    if model_name.startswith(HASH_SCHEME):
        spec = model_name[len(HASH_SCHEME):]
        try:
            dim = int(spec)
        except ValueError:
            raise AdapterError(
                f"bad hash encoder spec {model_name!r}; expected hash://<dim>"
            ) from None
        return HashEncoder(dim)
    return SentenceTransformerEncoder(model_name, device=device)


def write_emb1(path: str | Path, ids: list[str], matrix: np.ndarray) -> None:
    """EMB1 writer: shortest round-trip float formatting, one row per id."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise AdapterError("embedding matrix does not match id list")
    if not np.isfinite(matrix).all():
        raise AdapterError("embedding matrix has non-finite values")
    lines = [f"EMB1 {len(ids)} {matrix.shape[1]}"]
    for sid, vec in zip(ids, matrix):
        lines.append(sid + " " + " ".join(repr(float(x)) for x in vec))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def encode_corpus(
    corpus_path: str | Path,
    model_name: str = DEFAULT_MODEL,
    out_sentences: str | Path | None = None,
    out_bigrams: str | Path | None = None,
    batch_size: int = 64,
    device: str | None = None,
) -> dict[str, int]:
    """Encode every sentence and every bigram, writing the requested files.

    Rows are emitted in corpus order (party, election date, position), one
    sentence row and one bigram row per non-heading sentence. Returns counts
    for reporting.
    """
    if batch_size < 1:
        raise AdapterError("batch size must be >= 1")
    rows = read_corpus(corpus_path)
    encoder = make_encoder(model_name, device=device)

    def encode_batched(texts: list[str]) -> np.ndarray:
        parts = [
            encoder.encode(texts[i : i + batch_size])
            for i in range(0, len(texts), batch_size)
        ]
        return np.vstack(parts) if parts else np.empty((0, encoder.dim))

    if out_sentences is not None:
        write_emb1(out_sentences, [r.id for r in rows], encode_batched([r.text for r in rows]))
    if out_bigrams is not None:
        pairs = bigram_pairs(rows)
        write_emb1(out_bigrams, [k for k, _ in pairs], encode_batched([t for _, t in pairs]))

    if encoder.truncated:
        logger.warning(
            "truncated %d overlong input(s) to %d tokens", encoder.truncated, encoder.max_tokens
        )
    return {"sentences": len(rows), "dim": encoder.dim, "truncated": encoder.truncated}
