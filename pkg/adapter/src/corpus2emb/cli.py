"""Command-line entry: encode a corpus into EMB1 embedding files.

    corpus2emb encode --corpus corpus.jsonl --model hash://32 \
        --out-sentences sentences.emb1 --out-bigrams bigrams.emb1

Exit codes: 0 success, 1 corpus/model/output failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .encode import DEFAULT_MODEL, AdapterError, encode_corpus


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corpus2emb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    enc = sub.add_parser("encode", help="encode sentences and bigrams")
    enc.add_argument("--corpus", required=True, help="corpus JSONL file")
    enc.add_argument("--model", default=DEFAULT_MODEL,
                     help="sentence-transformers checkpoint or hash://<dim>")
    enc.add_argument("--out-sentences", required=True, help="sentence EMB1 output")
    enc.add_argument("--out-bigrams", required=True, help="bigram EMB1 output")
    enc.add_argument("--batch", type=int, default=64, help="encoder batch size")
    enc.add_argument("--device", default=None, help="inference device override")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        info = encode_corpus(
            args.corpus,
            model_name=args.model,
            out_sentences=args.out_sentences,
            out_bigrams=args.out_bigrams,
            batch_size=args.batch,
            device=args.device,
        )
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"encoded {info['sentences']} sentences (dim {info['dim']}) "
        f"to {args.out_sentences} and {args.out_bigrams}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
