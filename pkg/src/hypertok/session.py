"""Inference-session state machine over the streaming LZW core.

A session owns a decoder-rule codebook driven by the full code history:
prompt codes first (produced by compressing the prompt), then generated
codes appended one at a time.  Every append applies the decoder add rule
against the previous code, so the codebook any step sees is exactly the
one a decoder replaying the history would hold — sessions are fully
reconstructable from (params, history, prompt_len) alone.

Generated codes must already be assigned (< next_id): a model only has
projection vectors for assigned ids, so the classic code==next_id case
can only occur inside the prompt segment, where the codes come from a
real encoder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .codebook import Codebook
from .errors import SessionAlreadyStarted, UnknownCode
from .lzw import LzwDecoder, encode_all


@dataclass(frozen=True)
class StepInfo:
    """What one generated code did: its expansion and any codebook growth."""

    code: int
    flat_tokens: tuple[int, ...]
    new_entry: Optional[tuple[int, tuple[int, ...]]]


@dataclass(frozen=True)
class CanonViolation:
    """Adjacent generated codes that an available entry could have replaced."""

    position: int  # index of the first code within the generated segment
    pair: tuple[int, int]
    available_id: int


class Session:
    def __init__(
        self,
        base_vocab_size: int,
        max_merge: int,
        capacity_limit: Optional[int] = None,
    ):
        self._dec = LzwDecoder(base_vocab_size, max_merge, capacity_limit)
        self._history: list[int] = []
        self._prompt_len = 0
        self._prompt_ingested = False
        self._flat_len = 0
        # next_id snapshot taken just before each history position was
        # appended; lets canonicality checks date entries without snapshots.
        self._avail_next_id: list[int] = []
        self._gen_flats: list[tuple[int, ...]] = []

    # -- read access ---------------------------------------------------------

    @property
    def codebook(self) -> Codebook:
        return self._dec.codebook

    @property
    def history(self) -> tuple[int, ...]:
        return tuple(self._history)

    @property
    def prompt_len(self) -> int:
        return self._prompt_len

    @property
    def flat_len(self) -> int:
        """Base tokens represented by the whole history (prompt included)."""
        return self._flat_len

    # -- state transitions -----------------------------------------------------

    def _append_code(self, code: int, *, allow_pending: bool) -> StepInfo:
        cb = self._dec.codebook
        next_before = cb.next_id
        if not allow_pending and not 0 <= code < next_before:
            raise UnknownCode(
                f"code {code} not assigned (next id is {next_before})"
            )
        seq = self._dec.decode_step(code)
        self._avail_next_id.append(next_before)
        self._history.append(code)
        self._flat_len += len(seq)
        return StepInfo(code, seq, self._dec.last_new_entry)

    def ingest_prompt(self, base_tokens: Iterable[int]) -> list[int]:
        """Compress the prompt and drive the codes through the session.

        Callable once, and only before any generation.  Returns the prompt
        codes (what the model would be conditioned on).
        """
        if self._prompt_ingested or self._history:
            raise SessionAlreadyStarted("prompt already ingested or generation begun")
        cb = self._dec.codebook
        codes, _ = encode_all(
            base_tokens, cb.base_vocab_size, cb.max_merge, cb.capacity_limit
        )
        for code in codes:
            self._append_code(code, allow_pending=True)
        self._prompt_len = len(codes)
        self._prompt_ingested = True
        return codes

    def append_generated(self, code: int) -> StepInfo:
        """Accept one model-generated code (base or hypertoken)."""
        info = self._append_code(code, allow_pending=False)
        self._gen_flats.append(info.flat_tokens)
        return info

    def append_tokens_greedy(self, base_tokens: Sequence[int]) -> list[int]:
        """Emit ``base_tokens`` as the greedy longest-match code stream.

        This is the encoder-as-model reference driver: each step takes the
        longest match the *live* session codebook offers, then appends it,
        letting the decoder rule grow the codebook between steps.
        """
        cb = self._dec.codebook
        codes: list[int] = []
        pos = 0
        end = len(base_tokens)
        while pos < end:
            code, consumed = cb.longest_match(base_tokens, pos)
            self.append_generated(code)
            codes.append(code)
            pos += consumed
        return codes

    def finalize_output(self) -> list[int]:
        """Flattened base tokens of the generated segment only."""
        out: list[int] = []
        for seq in self._gen_flats:
            out.extend(seq)
        return out

    # -- diagnostics ------------------------------------------------------------

    def canonicality_report(self) -> list[CanonViolation]:
        """Adjacent generated pairs an existing entry could have replaced.

        A pair (c_i, c_i+1) is flagged when the concatenation of their
        expansions matched a codebook entry that was already available at
        the moment the model chose c_i.  Greedy LZW output never triggers
        this; sampled model output may.  Purely diagnostic.
        """
        cb = self._dec.codebook
        gen = self._history[self._prompt_len:]
        violations: list[CanonViolation] = []
        for i in range(len(gen) - 1):
            combined = cb.flatten(gen[i]) + cb.flatten(gen[i + 1])
            if len(combined) > cb.max_merge:
                continue
            entry = cb.entry_id(combined)
            if entry is not None and entry < self._avail_next_id[self._prompt_len + i]:
                violations.append(CanonViolation(i, (gen[i], gen[i + 1]), entry))
        return violations

    # -- reconstruction ----------------------------------------------------------

    @classmethod
    def replay(
        cls,
        base_vocab_size: int,
        max_merge: int,
        capacity_limit: Optional[int],
        history: Sequence[int],
        prompt_len: int,
    ) -> "Session":
        """Rebuild a session from its parameters and code history."""
        if not 0 <= prompt_len <= len(history):
            raise ValueError("prompt_len outside history")
        session = cls(base_vocab_size, max_merge, capacity_limit)
        for i, code in enumerate(history):
            info = session._append_code(code, allow_pending=i < prompt_len)
            if i >= prompt_len:
                session._gen_flats.append(info.flat_tokens)
        session._prompt_len = prompt_len
        session._prompt_ingested = True
        return session
