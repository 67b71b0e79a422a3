#!/usr/bin/env python3
"""Regenerate the bundled repetitive sample corpus (byte-fallback tokens).

The corpus mixes templated code-like and prose-like documents with heavy
phrase repetition so merge-size sweeps show a clean monotone trend:
rate(M=1) = 100% and rate(M=2) > rate(M=3) > rate(M=4) at window 2048.
Seeded and deterministic; the generated file is committed, this script
only exists to rebuild or rescale it.
"""

import argparse
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hypertok.corpus import byte_tokenize  # noqa: E402
from hypertok.metrics import corpus_report  # noqa: E402
from hypertok.corpus import TokenDoc  # noqa: E402

CODE_LINES = [
    "for item in registry.values():\n",
    "    result.append(transform(item))\n",
    "if not registry.get(key):\n",
    "    registry[key] = default_value\n",
    "def transform(value):\n",
    "    return value.strip().lower()\n",
    "with open(path) as handle:\n",
    "    data = handle.read()\n",
    "result = [transform(item) for item in data]\n",
    "logger.info('processed %d items', len(result))\n",
]

PROSE_SENTENCES = [
    "The messenger reported the same pattern again and again. ",
    "Repetition is the raw material every dictionary coder feeds on. ",
    "Each recurring phrase becomes a single reusable symbol. ",
    "The archive grew, yet the index stayed remarkably small. ",
    "Long passages repeated almost verbatim across the collection. ",
]


def make_doc(rng: random.Random, kind: str, approx_tokens: int) -> str:
    parts = []
    size = 0
    pool = CODE_LINES if kind == "code" else PROSE_SENTENCES
    while size < approx_tokens:
        # Short bursts of the same few lines make local repetition dense.
        burst = rng.sample(pool, k=rng.randint(2, 4))
        for _ in range(rng.randint(2, 5)):
            for piece in burst:
                parts.append(piece)
                size += len(piece)
    return "".join(parts)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--docs", type=int, default=24)
    parser.add_argument("--tokens-per-doc", type=int, default=4000)
    parser.add_argument(
        "--output",
        default=str(
            Path(__file__).resolve().parent.parent
            / "src"
            / "hypertok"
            / "data"
            / "sample_corpus.jsonl"
        ),
    )
    args = parser.parse_args()

    rng = random.Random(args.seed)
    docs = []
    for i in range(args.docs):
        kind = "code" if i % 2 == 0 else "prose"
        text = make_doc(rng, kind, args.tokens_per_doc)
        docs.append((f"sample-{i:03d}", byte_tokenize(text)))

    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8", newline="\n") as fh:
        for doc_id, tokens in docs:
            fh.write(json.dumps({"id": doc_id, "tokens": tokens}, separators=(",", ":")))
            fh.write("\n")

    token_docs = [TokenDoc(d, tuple(t)) for d, t in docs]
    rates = {}
    for merge in range(1, 6):
        report = corpus_report(
            token_docs, base_vocab_size=256, max_merge=merge, window=2048
        )
        rates[merge] = report.compression_rate_pct
        print(f"M={merge}: compression rate {report.compression_rate_pct:.2f}%")
    assert rates[1] == 100.0
    assert rates[2] > rates[3] > rates[4], "corpus lacks the monotone trend"
    print(f"wrote {len(docs)} docs to {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
