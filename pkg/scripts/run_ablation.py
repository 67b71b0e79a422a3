#!/usr/bin/env python3
"""Merge-size sweep over the bundled sample corpus.

Prints the compression rate per max-merge setting, the qualitative shape
the engine is expected to reproduce on any repetitive corpus: M=1 is
exactly 100% (no compression) and larger caps compress further with
diminishing returns.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hypertok.corpus import read_token_docs, sample_corpus_path  # noqa: E402
from hypertok.metrics import corpus_report, round2  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", default=sample_corpus_path())
    parser.add_argument("--vocab-size", type=int, default=256)
    parser.add_argument("--window", type=int, default=2048)
    parser.add_argument("--m-min", type=int, default=1)
    parser.add_argument("--m-max", type=int, default=5)
    args = parser.parse_args()

    print(f"corpus: {args.corpus}")
    print(f"window: {args.window}\n")
    print("M  rate_pct  base_tokens  compressed  reuse")
    for merge in range(args.m_min, args.m_max + 1):
        report = corpus_report(
            read_token_docs(args.corpus, args.vocab_size),
            base_vocab_size=args.vocab_size,
            max_merge=merge,
            window=args.window,
        )
        print(
            f"{merge}  {round2(report.compression_rate_pct):8.2f}"
            f"  {report.base_tokens:11d}  {report.compressed_tokens:10d}"
            f"  {round2(report.reuse_rate):5.2f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
