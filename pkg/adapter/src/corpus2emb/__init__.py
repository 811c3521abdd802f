"""Corpus-to-EMB1 encoder: sentence and bigram embedding export."""

from .encode import (
    BOS_TOKEN,
    DEFAULT_MODEL,
    AdapterError,
    HashEncoder,
    SentenceRow,
    SentenceTransformerEncoder,
    bigram_pairs,
    encode_corpus,
    make_encoder,
    read_corpus,
    write_emb1,
)

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "BOS_TOKEN",
    "DEFAULT_MODEL",
    "HashEncoder",
    "SentenceRow",
    "SentenceTransformerEncoder",
    "bigram_pairs",
    "encode_corpus",
    "make_encoder",
    "read_corpus",
    "write_emb1",
]
