"""Corpus ingestion: token JSONL, code JSONL, vocab files, byte fallback.

Wire formats (one UTF-8 JSON object per line, integers only):
  token doc:  {"id": str, "tokens": [int, ...]}           + optional "bytes"
  code doc:   {"id": str, "codes": [int, ...], "codebook_entries": int}

The optional "bytes" field lets externally tokenized corpora carry their
true UTF-8 byte counts for efficiency reporting; the writers here never
emit it, keeping round-trips byte-identical.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

from .errors import ParseError, TokenOutOfRange

PathOrIO = Union[str, os.PathLike, IO[str]]


@dataclass(frozen=True)
class TokenDoc:
    doc_id: str
    tokens: tuple[int, ...]
    byte_len: Optional[int] = None


@dataclass(frozen=True)
class Vocab:
    """Base-vocabulary description: size plus optional rendering data."""

    size: int
    token_strings: Optional[tuple[str, ...]] = None
    byte_mode: bool = False

    def can_render(self) -> bool:
        return self.byte_mode or self.token_strings is not None

    def render(self, tokens: Sequence[int]) -> str:
        """Text for a run of base tokens (visualization only)."""
        if self.byte_mode:
            return bytes(tokens).decode("utf-8", errors="replace")
        if self.token_strings is None:
            raise ValueError("vocabulary has no token strings to render")
        return "".join(self.token_strings[t] for t in tokens)


def byte_fallback_vocab() -> Vocab:
    """The self-contained 256-entry vocabulary: token id b == byte value b."""
    return Vocab(size=256, byte_mode=True)


def sample_corpus_path() -> str:
    """Bundled repetitive byte-fallback corpus used by sweeps and tests."""
    return os.path.join(os.path.dirname(__file__), "data", "sample_corpus.jsonl")


def byte_tokenize(text: str) -> list[int]:
    """One token per UTF-8 byte."""
    return list(text.encode("utf-8"))


def byte_detokenize(tokens: Iterable[int]) -> str:
    """Inverse of byte_tokenize; exact for any of its outputs."""
    data = bytes(tokens)
    return data.decode("utf-8")


def _open_maybe(path_or_file: PathOrIO, mode: str):
    if hasattr(path_or_file, "read") or hasattr(path_or_file, "write"):
        return path_or_file, False
    return open(path_or_file, mode, encoding="utf-8", newline="\n"), True


def _int_list(value, what: str, line: int):
    if not isinstance(value, list) or not all(
        isinstance(t, int) and not isinstance(t, bool) for t in value
    ):
        raise ParseError(f"{what} must be an array of integers", line=line)
    return value


def read_token_docs(
    path_or_file: PathOrIO, base_vocab_size: int
) -> Iterator[TokenDoc]:
    """Stream token docs in file order, validating ranges eagerly per line."""
    fh, owned = _open_maybe(path_or_file, "r")
    try:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from None
            if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
                raise ParseError("object with string 'id' required", line=lineno)
            tokens = _int_list(obj.get("tokens"), "'tokens'", lineno)
            for tok in tokens:
                if not 0 <= tok < base_vocab_size:
                    raise TokenOutOfRange(
                        f"line {lineno}: token {tok} outside vocabulary "
                        f"of size {base_vocab_size}"
                    )
            byte_len = obj.get("bytes")
            if byte_len is not None and (
                not isinstance(byte_len, int)
                or isinstance(byte_len, bool)
                or byte_len < 0
            ):
                raise ParseError("'bytes' must be a non-negative integer", line=lineno)
            yield TokenDoc(obj["id"], tuple(tokens), byte_len)
    finally:
        if owned:
            fh.close()


def write_token_doc(fh: IO[str], doc_id: str, tokens: Sequence[int]) -> None:
    fh.write(json.dumps({"id": doc_id, "tokens": list(tokens)}, separators=(",", ":")))
    fh.write("\n")


def read_code_docs(
    path_or_file: PathOrIO,
) -> Iterator[tuple[str, list[int], Optional[int]]]:
    """Stream (id, codes, codebook_entries) triples from code JSONL.

    Writers always emit codebook_entries; readers tolerate its absence
    (None) so externally assembled code streams stay decodable, skipping
    only the integrity cross-check.
    """
    fh, owned = _open_maybe(path_or_file, "r")
    try:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from None
            if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
                raise ParseError("object with string 'id' required", line=lineno)
            codes = _int_list(obj.get("codes"), "'codes'", lineno)
            if any(c < 0 for c in codes):
                raise ParseError("'codes' must be non-negative", line=lineno)
            n_entries = obj.get("codebook_entries")
            if n_entries is not None and (
                not isinstance(n_entries, int)
                or isinstance(n_entries, bool)
                or n_entries < 0
            ):
                raise ParseError(
                    "'codebook_entries' must be a non-negative integer", line=lineno
                )
            yield obj["id"], codes, n_entries
    finally:
        if owned:
            fh.close()


def write_code_doc(
    fh: IO[str], doc_id: str, codes: Sequence[int], codebook_entries: int
) -> None:
    fh.write(
        json.dumps(
            {
                "id": doc_id,
                "codes": list(codes),
                "codebook_entries": codebook_entries,
            },
            separators=(",", ":"),
        )
    )
    fh.write("\n")


def load_external_vocab(path_or_file: PathOrIO) -> Vocab:
    """Load {"vocab_size": int, "tokens": optional [str, ...]}."""
    fh, owned = _open_maybe(path_or_file, "r")
    try:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    finally:
        if owned:
            fh.close()
    if not isinstance(obj, dict):
        raise ParseError("top level must be a JSON object")
    size = obj.get("vocab_size")
    if not isinstance(size, int) or isinstance(size, bool) or size < 1:
        raise ParseError("must be an integer >= 1", field="vocab_size")
    strings = obj.get("tokens")
    if strings is None:
        return Vocab(size=size)
    if not isinstance(strings, list) or not all(isinstance(s, str) for s in strings):
        raise ParseError("must be an array of strings", field="tokens")
    if len(strings) != size:
        raise ParseError(
            f"{len(strings)} token strings for vocab_size {size}", field="tokens"
        )
    return Vocab(size=size, token_strings=tuple(strings))
