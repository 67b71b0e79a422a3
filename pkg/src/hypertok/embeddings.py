"""Deterministic numeric reference of the hypertoken embedding path.

Everything here is plain-Python float math in fixed evaluation order, so
results are bit-identical across platforms and runs — the golden files
depend on that.  No linear-algebra backend is involved; the point is a
small, checkable reference for the vocabulary-dynamics interfaces, not
throughput.

The embedding/projection weights are tied: the same vector a hypertoken
gets as its input embedding is the row used to score it in the joint
logits.  Hypertoken vectors are context-independent, so they are computed
once per id, ever, through an insert-only cache.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .codebook import Codebook
from .errors import (
    CacheIncomplete,
    DimensionMismatch,
    ParseError,
    TokenOutOfRange,
    UnknownCode,
)
from .session import Session

Vector = tuple[float, ...]

_MASK64 = (1 << 64) - 1

EMBEDDING_MAGIC = b"Z2ZE"
EMBEDDING_FORMAT_VERSION = 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def embedding_value(seed: int, token_id: int, dim_index: int) -> float:
    """Pseudo-random but fully pinned coordinate in [-1, 1).

    Three chained splitmix64 rounds over (seed, token_id, dim_index); the
    top 53 bits become a double in [0, 1) exactly, then map to [-1, 1).
    Pure integer arithmetic plus one exact division: platform-stable.
    """
    h = _splitmix64(_splitmix64(_splitmix64(seed & _MASK64) ^ token_id) ^ dim_index)
    return ((h >> 11) / 9007199254740992.0) * 2.0 - 1.0  # 2**53


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable dense embeddings for the base vocabulary."""

    dim: int
    rows: tuple[Vector, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        for i, row in enumerate(self.rows):
            if len(row) != self.dim:
                raise DimensionMismatch(
                    f"row {i} has {len(row)} coordinates, expected {self.dim}"
                )
            if not all(math.isfinite(v) for v in row):
                raise ValueError(f"row {i} contains non-finite values")

    @property
    def vocab_size(self) -> int:
        return len(self.rows)


def hash_embedding_table(vocab_size: int, dim: int, seed: int) -> EmbeddingTable:
    """Build the seeded deterministic table used by the mock decode loop."""
    if vocab_size < 1:
        raise ValueError("vocab_size must be >= 1")
    rows = tuple(
        tuple(embedding_value(seed, tok, j) for j in range(dim))
        for tok in range(vocab_size)
    )
    return EmbeddingTable(dim, rows)


@dataclass(frozen=True)
class HyperEncoderSpec:
    """How constituent base-token vectors become one hypertoken vector.

    fn=None selects the built-in averaging baseline (mean over the actual
    constituents; padding positions are not invented).  An external
    callable receives the constituent vectors and must return a vector of
    the table's dimension, deterministically.
    """

    fn: Optional[Callable[[list[Vector]], Sequence[float]]] = None


AVERAGING = HyperEncoderSpec()


def hyper_embed(
    encoder: HyperEncoderSpec, table: EmbeddingTable, seq: Sequence[int]
) -> Vector:
    """Embed a merged base-token sequence (1 <= len(seq) <= max_merge)."""
    if not seq:
        raise ValueError("cannot embed an empty sequence")
    for tok in seq:
        if not 0 <= tok < table.vocab_size:
            raise TokenOutOfRange(
                f"token {tok} outside vocabulary of size {table.vocab_size}"
            )
    vectors = [table.rows[tok] for tok in seq]
    if encoder.fn is None:
        n = len(vectors)
        return tuple(sum(col) / n for col in zip(*vectors))
    out = tuple(float(v) for v in encoder.fn(vectors))
    if len(out) != table.dim:
        raise DimensionMismatch(
            f"external encoder returned {len(out)} coordinates, expected {table.dim}"
        )
    return out


class HyperCache:
    """Insert-only store of hypertoken vectors, computed once per id."""

    __slots__ = ("_vectors", "computations")

    def __init__(self):
        self._vectors: dict[int, Vector] = {}
        self.computations = 0

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, code: int) -> bool:
        return code in self._vectors

    def get(self, code: int) -> Optional[Vector]:
        return self._vectors.get(code)

    def ids(self) -> set[int]:
        return set(self._vectors)


def cache_get_or_insert(
    cache: HyperCache,
    code: int,
    encoder: HyperEncoderSpec,
    table: EmbeddingTable,
    codebook: Codebook,
) -> Vector:
    """Cached hypertoken vector, computing (and counting) at most once."""
    vec = cache._vectors.get(code)
    if vec is not None:
        return vec
    if not codebook.base_vocab_size <= code < codebook.next_id:
        raise UnknownCode(
            f"code {code} is not an assigned hypertoken "
            f"(hypertoken ids are [{codebook.base_vocab_size}, {codebook.next_id}))"
        )
    vec = hyper_embed(encoder, table, codebook.flatten(code))
    cache._vectors[code] = vec
    cache.computations += 1
    return vec


def joint_logits(
    hidden: Sequence[float],
    table: EmbeddingTable,
    cache: HyperCache,
    codebook: Codebook,
) -> list[float]:
    """Tied-projection scores over the joint vocabulary, ordered by id.

    Base rows come from the table, hypertoken rows from the cache; output
    length is codebook.next_id.  Every assigned hypertoken must already be
    cached — a miss is the inconsistent-update failure, not an implicit
    compute.
    """
    if len(hidden) != table.dim:
        raise DimensionMismatch(
            f"hidden state has {len(hidden)} coordinates, expected {table.dim}"
        )
    if table.vocab_size != codebook.base_vocab_size:
        raise DimensionMismatch(
            f"table covers {table.vocab_size} tokens, codebook expects "
            f"{codebook.base_vocab_size}"
        )
    h = tuple(hidden)
    logits = [
        sum(a * b for a, b in zip(h, row)) for row in table.rows
    ]
    vectors = cache._vectors
    for code in range(codebook.base_vocab_size, codebook.next_id):
        row = vectors.get(code)
        if row is None:
            raise CacheIncomplete(f"hypertoken {code} has no cached vector")
        logits.append(sum(a * b for a, b in zip(h, row)))
    return logits


def softmax_argmax(logits: Sequence[float]) -> tuple[list[float], int]:
    """Stable softmax plus argmax with ties broken toward the smallest id."""
    if not logits:
        raise ValueError("empty logits")
    top = max(logits)
    exps = [math.exp(v - top) for v in logits]
    total = sum(exps)
    probs = [v / total for v in exps]
    best = 0
    best_val = logits[0]
    for i in range(1, len(logits)):
        if logits[i] > best_val:
            best, best_val = i, logits[i]
    return probs, best


@dataclass
class MockLoopResult:
    codes: list[int]
    flat_output: list[int]
    reuse_events: list[tuple[int, int]]  # (step, hypertoken code)
    session: Session = field(repr=False)
    cache: HyperCache = field(repr=False)
    table: EmbeddingTable = field(repr=False)


def mock_decode_loop(
    prompt: Sequence[int],
    steps: int,
    seed: int,
    *,
    base_vocab_size: int,
    max_merge: int = 3,
    capacity_limit: Optional[int] = None,
    dim: int = 16,
    encoder: HyperEncoderSpec = AVERAGING,
) -> MockLoopResult:
    """Run the full decode cycle with the transformer replaced by pooling.

    The prompt is compressed into the session, hypertokens are embedded and
    cached, and each step scores the joint vocabulary against the mean of
    the context's code vectors, greedily taking the argmax.  Exercises every
    consistency requirement of the real pipeline (cache completeness, new
    entries mirrored into the cache, lossless final decode) with zero
    neural machinery — outputs are deterministic given (prompt, steps, seed).
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    session = Session(base_vocab_size, max_merge, capacity_limit)
    table = hash_embedding_table(base_vocab_size, dim, seed)
    cache = HyperCache()
    codebook = session.codebook

    session.ingest_prompt(prompt)
    for code, _ in codebook.items():
        cache_get_or_insert(cache, code, encoder, table, codebook)

    context: list[Vector] = [
        table.rows[c] if c < base_vocab_size else cache._vectors[c]
        for c in session.history
    ]
    reuse_events: list[tuple[int, int]] = []
    zero = (0.0,) * dim
    for step in range(steps):
        if context:
            n = len(context)
            hidden = tuple(sum(col) / n for col in zip(*context))
        else:
            hidden = zero
        logits = joint_logits(hidden, table, cache, codebook)
        _, pick = softmax_argmax(logits)
        info = session.append_generated(pick)
        if info.new_entry is not None:
            cache_get_or_insert(cache, info.new_entry[0], encoder, table, codebook)
        if pick >= base_vocab_size:
            reuse_events.append((step, pick))
            context.append(cache._vectors[pick])
        else:
            context.append(table.rows[pick])
    return MockLoopResult(
        codes=list(session.history),
        flat_output=session.finalize_output(),
        reuse_events=reuse_events,
        session=session,
        cache=cache,
        table=table,
    )


# -- optional binary interchange ------------------------------------------------


def save_embedding_table(table: EmbeddingTable, path) -> None:
    """Write the Z2ZE binary format (f32 little-endian, row-major)."""
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(
            struct.pack(
                "<III", EMBEDDING_FORMAT_VERSION, table.vocab_size, table.dim
            )
        )
        for row in table.rows:
            fh.write(struct.pack(f"<{table.dim}f", *row))


def load_embedding_table(path) -> EmbeddingTable:
    """Read a Z2ZE file; values round-trip at f32 precision."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:4] != EMBEDDING_MAGIC:
        raise ParseError("not a Z2ZE embedding table", path=path)
    version, vocab, dim = struct.unpack("<III", data[4:16])
    if version != EMBEDDING_FORMAT_VERSION:
        raise ParseError(f"unsupported version {version}", path=path)
    if vocab < 1 or dim < 1:
        raise ParseError("vocab and dim must be >= 1", path=path)
    expect = 16 + 4 * vocab * dim
    if len(data) != expect:
        raise ParseError(
            f"expected {expect} bytes for {vocab}x{dim} table, got {len(data)}",
            path=path,
        )
    floats = struct.unpack(f"<{vocab * dim}f", data[16:])
    rows = tuple(
        tuple(floats[r * dim: (r + 1) * dim]) for r in range(vocab)
    )
    return EmbeddingTable(dim, rows)
