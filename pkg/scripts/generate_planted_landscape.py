#!/usr/bin/env python3
"""Write a synthetic party landscape to disk, ready for the pipeline.

Creates a corpus (JSONL), sentence embeddings (EMB1), a domain scheme, the
planted distance matrices, and a run configuration pointing at them:

    python3 scripts/generate_planted_landscape.py --out runs/landscape
    domainscale similarity --config runs/landscape/config.json --out runs/sim
"""

import argparse
import json
from pathlib import Path

from domainscale.synthetic import make_planted_landscape, write_planted_landscape


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=20210926)
    parser.add_argument("--n-per-domain", type=int, default=30,
                        help="sentences per party and domain")
    parser.add_argument("--dim", type=int, default=16, help="embedding dimension")
    parser.add_argument("--noise", type=float, default=0.5,
                        help="isotropic noise around each planted centroid")
    args = parser.parse_args()

    land = make_planted_landscape(
        seed=args.seed,
        n_per_domain=args.n_per_domain,
        dim=args.dim,
        noise=args.noise,
    )
    out = Path(args.out)
    paths = write_planted_landscape(land, out)

    config = {
        "corpus": "corpus.jsonl",
        "embeddings": "embeddings.emb1",
        "scheme": "scheme.json",
        "n_domains": len(land.scheme.domain_names()),
        "epochs": 150,
        "holdout": 0.1,
    }
    config_path = out / "config.json"
    config_path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    paths["config"] = config_path

    for role in sorted(paths):
        print(f"{role:24s} {paths[role]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
