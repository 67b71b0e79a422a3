"""Command-line surface for the hypertoken engine.

Exit codes: 0 success, 2 input/validation error, 3 internal failure.
Subcommands stream JSONL where possible and are deterministic for fixed
inputs and flags (benchmark timings aside).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import html
import json
import math
import os
import sys
import time
from typing import IO, Iterable, Optional, Sequence

from .codebook import Codebook
from .corpus import (
    Vocab,
    byte_fallback_vocab,
    byte_tokenize,
    load_external_vocab,
    read_code_docs,
    read_token_docs,
    write_code_doc,
    write_token_doc,
)
from .embeddings import mock_decode_loop
from .errors import EmptyCorpus, HypertokError, InvalidCounts
from .lzw import LzwDecoder, decode_all, encode_all
from .metrics import corpus_report, reuse_rate, round2
from .session import Session

DEFAULT_MAX_MERGE = 3
DEFAULT_WINDOW = 2048

_ANSI = {1: "\x1b[34m", 2: "\x1b[33m", 3: "\x1b[38;5;208m"}
_ANSI_RESET = "\x1b[0m"

_HTML_PAGE = """<!DOCTYPE html>
<html><head><meta charset="utf-8">
<style>
.z2z-doc {{ font-family: monospace; white-space: pre-wrap; margin-bottom: 1em; }}
.z2z-base {{ background: #cfe3ff; }}
.z2z-h2 {{ background: #ffe9a8; }}
.z2z-h3plus {{ background: #ffc285; }}
</style></head>
<body>
{body}
</body></html>
"""


# -- shared plumbing ---------------------------------------------------------


def _add_vocab_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--vocab-size", type=int, help="base vocabulary size")
    group.add_argument("--vocab", help="vocabulary JSON file")
    group.add_argument(
        "--byte-fallback",
        action="store_true",
        help="use the built-in 256-entry byte vocabulary",
    )


def _resolve_vocab(args) -> Vocab:
    if args.byte_fallback:
        return byte_fallback_vocab()
    if args.vocab is not None:
        return load_external_vocab(args.vocab)
    if args.vocab_size < 1:
        raise ValueError("--vocab-size must be >= 1")
    return Vocab(size=args.vocab_size)


def _add_common_args(parser: argparse.ArgumentParser, *, window: bool = False) -> None:
    parser.add_argument(
        "--max-merge",
        type=int,
        default=DEFAULT_MAX_MERGE,
        help=f"max base tokens per hypertoken (default {DEFAULT_MAX_MERGE})",
    )
    parser.add_argument(
        "--capacity", type=int, default=None, help="hypertoken count cap"
    )
    if window:
        parser.add_argument(
            "--window",
            type=int,
            default=DEFAULT_WINDOW,
            help=f"tokens per codebook-reset window (default {DEFAULT_WINDOW})",
        )


def _open_input(path: Optional[str]) -> IO[str]:
    if path is None or path == "-":
        return sys.stdin
    return open(path, "r", encoding="utf-8")


def _input_source(args):
    """Path or stdin handle, suitable for the streaming JSONL readers."""
    if args.input is None or args.input == "-":
        return sys.stdin
    return args.input


def _open_output(path: Optional[str]) -> IO[str]:
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _close_maybe(fh: IO[str]) -> None:
    if fh not in (sys.stdin, sys.stdout):
        fh.close()


def _check_format(args, allowed: Sequence[str]) -> str:
    fmt = args.format or allowed[0]
    if fmt not in allowed:
        raise ValueError(
            f"--format {fmt} not supported here (choose from {', '.join(allowed)})"
        )
    return fmt


def _default_threads() -> int:
    return os.cpu_count() or 1


def _chunks(items: list, size: int) -> Iterable[list]:
    for i in range(0, len(items), size):
        yield items[i: i + size]


# -- worker functions (top-level so process pools can pickle them) ------------


def _compress_batch(job):
    vocab_size, max_merge, capacity, want_codebooks, batch = job
    out = []
    for doc_id, tokens in batch:
        codes, cb = encode_all(tokens, vocab_size, max_merge, capacity)
        cb_bytes = cb.serialize() if want_codebooks else None
        out.append((doc_id, codes, cb.hyper_count, cb_bytes))
    return out


def _decompress_batch(job):
    vocab_size, max_merge, capacity, batch = job
    out = []
    for doc_id, codes, n_entries in batch:
        dec = LzwDecoder(vocab_size, max_merge, capacity)
        tokens = dec.feed(codes)
        out.append((doc_id, tokens, n_entries, dec.codebook.hyper_count))
    return out


# -- compress / decompress -----------------------------------------------------


def cmd_compress(args) -> int:
    vocab = _resolve_vocab(args)
    params = (vocab.size, args.max_merge, args.capacity)
    codebook_dir = args.codebooks
    if codebook_dir:
        os.makedirs(codebook_dir, exist_ok=True)
    out = _open_output(args.output)
    index = 0
    try:
        docs = read_token_docs(_input_source(args), vocab.size)
        if args.threads > 1:
            batches = [
                (params[0], params[1], params[2], bool(codebook_dir), chunk)
                for chunk in _chunks([(d.doc_id, d.tokens) for d in docs], 64)
            ]
            with concurrent.futures.ProcessPoolExecutor(args.threads) as pool:
                for batch_out in pool.map(_compress_batch, batches):
                    for doc_id, codes, n_entries, cb_bytes in batch_out:
                        write_code_doc(out, doc_id, codes, n_entries)
                        if codebook_dir:
                            _write_codebook_file(codebook_dir, index, cb_bytes)
                        index += 1
        else:
            for doc in docs:
                codes, cb = encode_all(doc.tokens, *params)
                write_code_doc(out, doc.doc_id, codes, cb.hyper_count)
                if codebook_dir:
                    _write_codebook_file(codebook_dir, index, cb.serialize())
                index += 1
    finally:
        _close_maybe(out)
    return 0


def _write_codebook_file(directory: str, index: int, data: bytes) -> None:
    path = os.path.join(directory, f"{index:06d}.codebook.json")
    with open(path, "wb") as fh:
        fh.write(data)


def cmd_decompress(args) -> int:
    vocab = _resolve_vocab(args)
    params = (vocab.size, args.max_merge, args.capacity)
    out = _open_output(args.output)
    try:
        docs = read_code_docs(_input_source(args))
        if args.threads > 1:
            batches = [
                (params[0], params[1], params[2], chunk)
                for chunk in _chunks(list(docs), 64)
            ]
            with concurrent.futures.ProcessPoolExecutor(args.threads) as pool:
                for batch_out in pool.map(_decompress_batch, batches):
                    for doc_id, tokens, n_entries, got_entries in batch_out:
                        _check_entry_count(doc_id, n_entries, got_entries)
                        write_token_doc(out, doc_id, tokens)
        else:
            for doc_id, codes, n_entries in docs:
                try:
                    dec = LzwDecoder(*params)
                    tokens = dec.feed(codes)
                except HypertokError as exc:
                    raise type(exc)(f"doc {doc_id!r}: {exc}") from None
                _check_entry_count(doc_id, n_entries, dec.codebook.hyper_count)
                write_token_doc(out, doc_id, tokens)
    finally:
        _close_maybe(out)
    return 0


def _check_entry_count(doc_id: str, expected, got: int) -> None:
    if expected is not None and expected != got:
        raise InvalidCounts(
            f"doc {doc_id!r}: codebook_entries={expected} but decoding "
            f"created {got}"
        )


# -- reports -------------------------------------------------------------------


def _report_table(report_dict: dict) -> str:
    cols = [
        ("bytes", "{}"),
        ("base_tokens", "{}"),
        ("compressed_tokens", "{}"),
        ("eta_base", "{:.2f}"),
        ("eta_z2z", "{:.2f}"),
        ("compression_rate_pct", "{:.2f}"),
        ("reuse_rate", "{:.2f}"),
        ("window", "{}"),
    ]
    names = [name for name, _ in cols]
    values = [
        fmt.format(round2(report_dict[name]) if "." in fmt else report_dict[name])
        for name, fmt in cols
    ]
    widths = [max(len(n), len(v)) for n, v in zip(names, values)]
    head = "  ".join(n.rjust(w) for n, w in zip(names, widths))
    row = "  ".join(v.rjust(w) for v, w in zip(values, widths))
    return head + "\n" + row


def cmd_stats(args) -> int:
    vocab = _resolve_vocab(args)
    fmt = _check_format(args, ("table", "json"))
    fh = _open_input(args.input)
    try:
        report = corpus_report(
            read_token_docs(fh, vocab.size),
            base_vocab_size=vocab.size,
            max_merge=args.max_merge,
            window=args.window,
            capacity_limit=args.capacity,
        )
    finally:
        _close_maybe(fh)
    out = _open_output(args.output)
    try:
        if fmt == "json":
            json.dump(report.to_dict(), out)
            out.write("\n")
        else:
            out.write(_report_table(report.to_dict(include_windows=False)))
            out.write("\n")
    finally:
        _close_maybe(out)
    return 0


def cmd_ablate_m(args) -> int:
    vocab = _resolve_vocab(args)
    fmt = _check_format(args, ("table", "json"))
    if args.m_min < 1 or args.m_max < args.m_min:
        raise ValueError("need 1 <= --m-min <= --m-max")
    if args.input is None or args.input == "-":
        raise ValueError("ablate-m needs a seekable --input file, not stdin")
    rows = []
    for merge in range(args.m_min, args.m_max + 1):
        report = corpus_report(
            read_token_docs(args.input, vocab.size),
            base_vocab_size=vocab.size,
            max_merge=merge,
            window=args.window,
            capacity_limit=args.capacity,
        )
        rows.append(
            {
                "max_merge": merge,
                "base_tokens": report.base_tokens,
                "compressed_tokens": report.compressed_tokens,
                "compression_rate_pct": report.compression_rate_pct,
            }
        )
    out = _open_output(args.output)
    try:
        if fmt == "json":
            json.dump(rows, out)
            out.write("\n")
        else:
            out.write("M  compression_rate_pct\n")
            for row in rows:
                out.write(
                    f"{row['max_merge']}  "
                    f"{round2(row['compression_rate_pct']):.2f}\n"
                )
    finally:
        _close_maybe(out)
    return 0


# -- generation simulation -------------------------------------------------------


def _read_prompt(args, vocab: Vocab) -> list[int]:
    fh = _open_input(args.input)
    try:
        text = fh.read()
    finally:
        _close_maybe(fh)
    if vocab.byte_mode:
        return byte_tokenize(text)
    return [int(tok) for tok in text.split()]


def cmd_generate_sim(args) -> int:
    vocab = _resolve_vocab(args)
    fmt = _check_format(args, ("text", "json"))
    prompt = _read_prompt(args, vocab)
    result = mock_decode_loop(
        prompt,
        args.steps,
        args.seed,
        base_vocab_size=vocab.size,
        max_merge=args.max_merge,
        capacity_limit=args.capacity,
        dim=args.dim,
    )
    session = result.session
    rate = reuse_rate(session.history, session.codebook)
    violations = session.canonicality_report()
    out = _open_output(args.output)
    try:
        if fmt == "json":
            json.dump(
                {
                    "codes": result.codes,
                    "prompt_len": session.prompt_len,
                    "output_tokens": result.flat_output,
                    "reuse_rate": rate,
                    "reuse_events": [list(e) for e in result.reuse_events],
                    "canonicality": [
                        {
                            "position": v.position,
                            "pair": list(v.pair),
                            "available_id": v.available_id,
                        }
                        for v in violations
                    ],
                },
                out,
            )
            out.write("\n")
        else:
            for label, values in (("codes", result.codes), ("output", result.flat_output)):
                tail = (" " + " ".join(map(str, values))) if values else ""
                out.write(f"{label}:{tail}\n")
            out.write(f"reuse_rate: {rate:.6f}\n")
            out.write(f"canonicality_violations: {len(violations)}\n")
            for v in violations:
                out.write(
                    f"violation: position={v.position} "
                    f"pair={v.pair[0]},{v.pair[1]} available_id={v.available_id}\n"
                )
    finally:
        _close_maybe(out)
    return 0


# -- visualization ----------------------------------------------------------------


def _doc_spans(tokens: Sequence[int], vocab: Vocab, max_merge: int, capacity):
    """(css_class, text) per emitted code, in stream order."""
    codes, cb = encode_all(tokens, vocab.size, max_merge, capacity)
    spans = []
    for code in codes:
        flat = cb.flatten(code)
        size = len(flat)
        cls = "z2z-base" if size == 1 else ("z2z-h2" if size == 2 else "z2z-h3plus")
        spans.append((cls, vocab.render(flat)))
    return spans


def cmd_visualize(args) -> int:
    vocab = _resolve_vocab(args)
    fmt = _check_format(args, ("html", "ansi"))
    if not vocab.can_render():
        raise ValueError(
            "visualization needs token strings: use --byte-fallback or a "
            "--vocab file with a 'tokens' array"
        )
    if args.text:
        if not vocab.byte_mode:
            raise ValueError("--text input requires --byte-fallback")
        fh = _open_input(args.input)
        try:
            doc_tokens = [("text", tuple(byte_tokenize(fh.read())))]
        finally:
            _close_maybe(fh)
    else:
        fh = _open_input(args.input)
        try:
            doc_tokens = [
                (doc.doc_id, doc.tokens) for doc in read_token_docs(fh, vocab.size)
            ]
        finally:
            _close_maybe(fh)
    out = _open_output(args.output)
    try:
        if fmt == "html":
            blocks = []
            for doc_id, tokens in doc_tokens:
                spans = _doc_spans(tokens, vocab, args.max_merge, args.capacity)
                body = "".join(
                    f'<span class="{cls}">{html.escape(text)}</span>'
                    for cls, text in spans
                )
                blocks.append(
                    f'<div class="z2z-doc" data-id="{html.escape(doc_id)}">'
                    f"{body}</div>"
                )
            out.write(_HTML_PAGE.format(body="\n".join(blocks)))
        else:
            for doc_id, tokens in doc_tokens:
                spans = _doc_spans(tokens, vocab, args.max_merge, args.capacity)
                for cls, text in spans:
                    size = {"z2z-base": 1, "z2z-h2": 2, "z2z-h3plus": 3}[cls]
                    out.write(f"{_ANSI[size]}{text}{_ANSI_RESET}")
                out.write("\n")
    finally:
        _close_maybe(out)
    return 0


# -- benchmarking -------------------------------------------------------------------


def _percentile(sorted_values: list[float], q: float) -> float:
    idx = min(len(sorted_values) - 1, max(0, math.ceil(q * len(sorted_values)) - 1))
    return sorted_values[idx]


def cmd_bench(args) -> int:
    vocab = _resolve_vocab(args)
    fh = _open_input(args.input)
    try:
        docs = [(d.doc_id, d.tokens) for d in read_token_docs(fh, vocab.size)]
    finally:
        _close_maybe(fh)
    if not docs:
        raise EmptyCorpus("no documents")
    params = (vocab.size, args.max_merge, args.capacity)
    total_tokens = sum(len(t) for _, t in docs)

    for _ in range(args.warmup):
        for _, tokens in docs:
            encode_all(tokens, *params)

    encoded = []
    enc_times = []
    t_enc = 0.0
    for _, tokens in docs:
        t0 = time.perf_counter()
        codes, _cb = encode_all(tokens, *params)
        dt = time.perf_counter() - t0
        t_enc += dt
        if tokens:
            enc_times.append(dt * 1e6 / len(tokens))  # ms per 1k tokens
        encoded.append(codes)

    t_dec = 0.0
    for codes in encoded:
        t0 = time.perf_counter()
        decode_all(codes, *params)
        t_dec += time.perf_counter() - t0

    enc_times.sort()
    result = {
        "docs": len(docs),
        "total_tokens": total_tokens,
        "tokens_per_sec_compress": total_tokens / t_enc if t_enc > 0 else 0.0,
        "tokens_per_sec_decompress": total_tokens / t_dec if t_dec > 0 else 0.0,
        "p50_ms": _percentile(enc_times, 0.50) if enc_times else 0.0,
        "p99_ms": _percentile(enc_times, 0.99) if enc_times else 0.0,
    }
    out = _open_output(args.output)
    try:
        json.dump(result, out)
        out.write("\n")
    finally:
        _close_maybe(out)
    return 0


# -- offline preprocessing -------------------------------------------------------------


def cmd_precompute_codebook(args) -> int:
    vocab = _resolve_vocab(args)
    out = _open_output(args.output)
    try:
        fh = _open_input(args.input)
        try:
            for doc in read_token_docs(fh, vocab.size):
                codes, cb = encode_all(
                    doc.tokens, vocab.size, args.max_merge, args.capacity
                )
                record = {
                    "id": doc.doc_id,
                    "codes": codes,
                    "codebook": json.loads(cb.serialize()),
                }
                out.write(json.dumps(record, separators=(",", ":")))
                out.write("\n")
        finally:
            _close_maybe(fh)
    finally:
        _close_maybe(out)
    return 0


# -- session replay (bindings endpoint) --------------------------------------------------


def cmd_session_replay(args) -> int:
    fh = _open_input(args.input)
    try:
        spec = json.load(fh)
    finally:
        _close_maybe(fh)
    if not isinstance(spec, dict):
        raise ValueError("session-replay input must be a JSON object")

    def _int_field(name, default=None, required=False):
        value = spec.get(name, default)
        if value is None and not required:
            return None
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValueError(f"session-replay field {name!r} must be an integer")
        return value

    vocab_size = _int_field("base_vocab_size", required=True)
    max_merge = _int_field("max_merge", DEFAULT_MAX_MERGE)
    capacity = _int_field("capacity_limit")
    prompt = spec.get("prompt_tokens", [])
    generated = spec.get("generated_codes", [])
    for name, seq in (("prompt_tokens", prompt), ("generated_codes", generated)):
        if not isinstance(seq, list) or not all(
            isinstance(t, int) and not isinstance(t, bool) for t in seq
        ):
            raise ValueError(f"session-replay field {name!r} must be an integer array")
    session = Session(vocab_size, max_merge, capacity)
    prompt_codes = session.ingest_prompt(prompt)
    steps = []
    for code in generated:
        info = session.append_generated(code)
        steps.append(
            {
                "code": info.code,
                "flat": list(info.flat_tokens),
                "new_entry": None
                if info.new_entry is None
                else {"id": info.new_entry[0], "tokens": list(info.new_entry[1])},
            }
        )
    violations = session.canonicality_report()
    result = {
        "prompt_codes": prompt_codes,
        "history": list(session.history),
        "prompt_len": session.prompt_len,
        "next_id": session.codebook.next_id,
        "codebook_entries": session.codebook.hyper_count,
        "steps": steps,
        "output_tokens": session.finalize_output(),
        "reuse_rate": reuse_rate(session.history, session.codebook),
        "canonicality": [
            {"position": v.position, "pair": list(v.pair), "available_id": v.available_id}
            for v in violations
        ],
    }
    out = _open_output(args.output)
    try:
        json.dump(result, out)
        out.write("\n")
    finally:
        _close_maybe(out)
    return 0


# -- entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypertok",
        description="Streaming LZW hypertoken engine: compress token streams, "
        "measure efficiency, and simulate dynamic-vocabulary decoding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, vocab=True, window=False, fmt=None):
        if vocab:
            _add_vocab_args(p)
        _add_common_args(p, window=window)
        p.add_argument("--input", help="input path ('-' or absent = stdin)")
        p.add_argument("--output", help="output path ('-' or absent = stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--steps", type=int, default=16)
        p.add_argument(
            "--threads",
            type=int,
            default=_default_threads(),
            help="worker processes for document-parallel commands",
        )
        if fmt:
            p.add_argument("--format", choices=fmt, default=None)

    p = sub.add_parser("compress", help="token JSONL -> code JSONL")
    common(p)
    p.add_argument("--codebooks", help="directory for per-document codebook JSON")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="code JSONL -> token JSONL")
    common(p)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("stats", help="efficiency report over a corpus")
    common(p, window=True, fmt=("table", "json"))
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ablate-m", help="compression-rate sweep over merge sizes")
    common(p, window=True, fmt=("table", "json"))
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=5)
    p.set_defaults(func=cmd_ablate_m)

    p = sub.add_parser(
        "generate-sim", help="mock decode loop over the joint vocabulary"
    )
    common(p, fmt=("text", "json"))
    p.add_argument("--dim", type=int, default=16, help="embedding dimension")
    p.set_defaults(func=cmd_generate_sim)

    p = sub.add_parser("visualize", help="color each emitted code by merge size")
    common(p, fmt=("html", "ansi"))
    p.add_argument(
        "--text",
        action="store_true",
        help="treat --input as raw UTF-8 text (byte-fallback only)",
    )
    p.set_defaults(func=cmd_visualize)

    p = sub.add_parser("bench", help="compression/decompression throughput")
    common(p)
    p.add_argument("--warmup", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser(
        "precompute-codebook",
        help="per-sequence (codes, codebook) pairs for offline training",
    )
    common(p)
    p.set_defaults(func=cmd_precompute_codebook)

    p = sub.add_parser(
        "session-replay",
        help="rebuild a session from JSON {params, prompt_tokens, generated_codes}",
    )
    p.add_argument("--input", help="input path ('-' or absent = stdin)")
    p.add_argument("--output", help="output path ('-' or absent = stdout)")
    p.set_defaults(func=cmd_session_replay)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HypertokError, ValueError, OSError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # invariant violation: a bug, not bad input
        print(f"error[Internal]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
