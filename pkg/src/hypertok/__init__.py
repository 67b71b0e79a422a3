"""hypertok: streaming LZW hypertoken engine for dynamic token vocabularies.

Compresses base-token streams into self-describing hypertoken codes at
inference time, keeps encoder/decoder codebooks provably in lockstep, and
ships the surrounding substrate: session bookkeeping for autoregressive
decoding, a deterministic reference of the hypertoken embedding path, and
token-efficiency metrics and benchmarks.
"""

from .codebook import AddOutcome, AddResult, Codebook
from .corpus import (
    TokenDoc,
    Vocab,
    byte_detokenize,
    byte_fallback_vocab,
    byte_tokenize,
    load_external_vocab,
    read_code_docs,
    read_token_docs,
)
from .embeddings import (
    AVERAGING,
    EmbeddingTable,
    HyperCache,
    HyperEncoderSpec,
    MockLoopResult,
    cache_get_or_insert,
    hash_embedding_table,
    hyper_embed,
    joint_logits,
    load_embedding_table,
    mock_decode_loop,
    save_embedding_table,
    softmax_argmax,
)
from .errors import (
    CacheIncomplete,
    DimensionMismatch,
    DomainError,
    EmptyCorpus,
    HypertokError,
    InvalidCounts,
    ParseError,
    SessionAlreadyStarted,
    TokenOutOfRange,
    UnknownCode,
    ZeroTokens,
)
from .lzw import LzwDecoder, LzwEncoder, decode_all, encode_all
from .metrics import (
    EfficiencyReport,
    FlopsOverhead,
    FlopsParams,
    WindowRecord,
    byte_perplexity,
    compression_rate,
    corpus_report,
    flops_overhead,
    reuse_rate,
    token_efficiency,
)
from .session import CanonViolation, Session, StepInfo

__version__ = "0.1.0"

__all__ = [
    "AddOutcome",
    "AddResult",
    "AVERAGING",
    "byte_detokenize",
    "byte_fallback_vocab",
    "byte_perplexity",
    "byte_tokenize",
    "cache_get_or_insert",
    "CacheIncomplete",
    "CanonViolation",
    "Codebook",
    "compression_rate",
    "corpus_report",
    "decode_all",
    "DimensionMismatch",
    "DomainError",
    "EfficiencyReport",
    "EmbeddingTable",
    "EmptyCorpus",
    "encode_all",
    "flops_overhead",
    "FlopsOverhead",
    "FlopsParams",
    "hash_embedding_table",
    "HyperCache",
    "hyper_embed",
    "HyperEncoderSpec",
    "HypertokError",
    "InvalidCounts",
    "joint_logits",
    "load_embedding_table",
    "load_external_vocab",
    "LzwDecoder",
    "LzwEncoder",
    "mock_decode_loop",
    "MockLoopResult",
    "ParseError",
    "read_code_docs",
    "read_token_docs",
    "reuse_rate",
    "save_embedding_table",
    "Session",
    "SessionAlreadyStarted",
    "softmax_argmax",
    "StepInfo",
    "token_efficiency",
    "TokenDoc",
    "TokenOutOfRange",
    "UnknownCode",
    "Vocab",
    "WindowRecord",
    "ZeroTokens",
]
