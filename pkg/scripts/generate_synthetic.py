#!/usr/bin/env python3
"""Generate a reproducible synthetic traceroute corpus over the test world.

The corpus resolves against the tables in tests/data/smallworld/. A given
(seed, count) pair always produces the same file, so corpora can be shared
by quoting two integers.

Usage:
    python scripts/generate_synthetic.py --out corpus.ndjson --count 10000 --seed 7
"""

import argparse
from pathlib import Path

from geonorm.synth import write_corpus


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", required=True, help="output NDJSON path")
    parser.add_argument("--count", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    written = write_corpus(args.out, args.count, seed=args.seed)
    print(f"wrote {written} records to {Path(args.out)}")


if __name__ == "__main__":
    main()
