"""Quantitative measures: token efficiency, compression rate, reuse, FLOPs.

Reports carry full-precision values; rendering rounds half-up to two
decimals (0.125 -> 0.13), matching how the reference tables are printed.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Optional, Sequence

from .codebook import Codebook
from .corpus import TokenDoc
from .errors import DomainError, EmptyCorpus, InvalidCounts, ZeroTokens
from .lzw import encode_all


def round2(value: float) -> float:
    """Round half-up to two decimals for display and table comparisons."""
    return float(Decimal(value).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def token_efficiency(byte_count: int, token_count: int) -> float:
    """Bytes represented per token; higher means a more compact encoding."""
    if token_count < 1:
        raise ZeroTokens("token efficiency needs at least one token")
    if byte_count < 0:
        raise InvalidCounts("byte count cannot be negative")
    return byte_count / token_count

def compression_rate(n_orig: int, n_comp: int) -> float:
    """Compressed over original token count, as a percentage (lower is better)."""
    if n_orig < 1:
        raise InvalidCounts("original token count must be >= 1")
    if n_comp > n_orig:
        raise InvalidCounts(
            f"compressed count {n_comp} exceeds original {n_orig}"
        )
    if n_comp < 0:
        raise InvalidCounts("compressed count cannot be negative")
    return n_comp / n_orig * 100.0


def reuse_rate(history: Iterable[int], codebook: Codebook) -> float:
    """Fraction of assigned hypertokens that appear in the code stream.

    Creation alone is not use; an entry counts once it is referenced.  By
    convention an empty hyper-vocabulary scores 0.0.
    """
    total = codebook.hyper_count
    if total == 0:
        return 0.0
    base = codebook.base_vocab_size
    nxt = codebook.next_id
    used = {code for code in history if base <= code < nxt}
    return len(used) / total


def byte_perplexity(token_ppl: float, eta: float) -> float:
    """Convert token-level perplexity to byte-level: ppl ** (1/eta)."""
    if token_ppl < 1.0:
        raise DomainError("token perplexity must be >= 1")
    if eta <= 0.0:
        raise DomainError("token efficiency must be > 0")
    return token_ppl ** (1.0 / eta)


@dataclass(frozen=True)
class FlopsParams:
    """Inputs to the hyper-encoder overhead estimate.

    base_layers and hyper_layers are transformer layer counts, max_merge is
    the merge cap, compression_ratio is compressed/original token count in
    (0, 1].
    """

    base_layers: int
    max_merge: int
    hyper_layers: int
    compression_ratio: float = 1.0

    def __post_init__(self):
        if self.base_layers < 1 or self.max_merge < 1 or self.hyper_layers < 1:
            raise ValueError("layer counts and merge size must be >= 1")
        if not 0.0 < self.compression_ratio <= 1.0:
            raise ValueError("compression_ratio must be in (0, 1]")


@dataclass(frozen=True)
class FlopsOverhead:
    alpha: float  # relative cost of the hyper-encoder passes
    ratio: float  # total FLOPs relative to the uncompressed baseline


def flops_overhead(params: FlopsParams) -> FlopsOverhead:
    """alpha = hyper_layers * max_merge / base_layers; ratio = rho * (1 + alpha)."""
    alpha = params.hyper_layers * params.max_merge / params.base_layers
    return FlopsOverhead(alpha=alpha, ratio=params.compression_ratio * (1.0 + alpha))


@dataclass(frozen=True)
class WindowRecord:
    doc_id: str
    window_index: int
    base_tokens: int
    compressed_tokens: int
    entries_created: int
    entries_reused: int

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "window_index": self.window_index,
            "base_tokens": self.base_tokens,
            "compressed_tokens": self.compressed_tokens,
            "entries_created": self.entries_created,
            "entries_reused": self.entries_reused,
        }


@dataclass(frozen=True)
class EfficiencyReport:
    bytes: int
    base_tokens: int
    compressed_tokens: int
    eta_base: float
    eta_z2z: float
    compression_rate_pct: float
    reuse_rate: float
    window: int
    per_window: tuple[WindowRecord, ...]

    def to_dict(self, include_windows: bool = True) -> dict:
        out = {
            "bytes": self.bytes,
            "base_tokens": self.base_tokens,
            "compressed_tokens": self.compressed_tokens,
            "eta_base": self.eta_base,
            "eta_z2z": self.eta_z2z,
            "compression_rate_pct": self.compression_rate_pct,
            "reuse_rate": self.reuse_rate,
            "window": self.window,
        }
        if include_windows:
            out["per_window"] = [w.to_dict() for w in self.per_window]
        return out


def corpus_report(
    docs: Iterable[TokenDoc],
    *,
    base_vocab_size: int,
    max_merge: int,
    window: int = 2048,
    capacity_limit: Optional[int] = None,
) -> EfficiencyReport:
    """Compress a corpus window by window and aggregate the measures.

    Each document is split into non-overlapping windows of ``window``
    tokens (final partial window included) and every window starts from an
    empty codebook, so entries never leak across window or document
    boundaries.  Document byte counts default to their token counts, which
    is exact for byte-fallback corpora; token files may carry an explicit
    "bytes" field for real-tokenizer streams.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    total_bytes = 0
    total_base = 0
    total_comp = 0
    total_entries = 0
    total_reused = 0
    records: list[WindowRecord] = []
    for doc in docs:
        tokens = doc.tokens
        total_bytes += doc.byte_len if doc.byte_len is not None else len(tokens)
        for w_index, start in enumerate(range(0, len(tokens), window)):
            chunk = tokens[start: start + window]
            codes, cb = encode_all(chunk, base_vocab_size, max_merge, capacity_limit)
            base = cb.base_vocab_size
            nxt = cb.next_id
            used = {c for c in codes if base <= c < nxt}
            records.append(
                WindowRecord(
                    doc_id=doc.doc_id,
                    window_index=w_index,
                    base_tokens=len(chunk),
                    compressed_tokens=len(codes),
                    entries_created=cb.hyper_count,
                    entries_reused=len(used),
                )
            )
            total_base += len(chunk)
            total_comp += len(codes)
            total_entries += cb.hyper_count
            total_reused += len(used)
    if total_base == 0:
        raise EmptyCorpus("no documents with tokens")
    return EfficiencyReport(
        bytes=total_bytes,
        base_tokens=total_base,
        compressed_tokens=total_comp,
        eta_base=token_efficiency(total_bytes, total_base),
        eta_z2z=token_efficiency(total_bytes, total_comp),
        compression_rate_pct=compression_rate(total_base, total_comp),
        reuse_rate=(total_reused / total_entries) if total_entries else 0.0,
        window=window,
        per_window=tuple(records),
    )
