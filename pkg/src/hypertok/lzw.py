"""Streaming LZW encoder/decoder over base-token streams.

Both sides grow the same codebook from the same code stream, which is
what lets the decoder reconstruct every hypertoken without the codebook
ever being transmitted.  The encoder flushes its match window whenever
window+token is no longer a known match, emitting the window's code and
registering window+token as a new entry; the decoder mirrors each of
those adds one code later (previous expansion + first token of the
current one).  Two departures from textbook LZW:

* merge-size cap: an add whose sequence would exceed max_merge is
  skipped on both sides without consuming an id, so the dictionaries
  stay in lockstep (same rule for a full capacity_limit);
* the code==next_id special case (classic cScSc) is accepted in decode,
  expanding to prev + prev[0], because the encoder can emit an entry on
  the step right after creating it.

The encoder's batch path is deliberately flat: local bindings, integer
trie keys, no per-token allocation.  Throughput on byte-fallback text is
a few million tokens per second in CPython; keep it that way.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .codebook import Codebook
from .errors import TokenOutOfRange, UnknownCode


class LzwEncoder:
    """Streaming compressor; owns and grows its codebook."""

    __slots__ = ("codebook", "_node", "_code", "_wlen", "emitted_count")

    def __init__(
        self,
        base_vocab_size: int,
        max_merge: int,
        capacity_limit: Optional[int] = None,
        *,
        codebook: Optional[Codebook] = None,
    ):
        self.codebook = codebook if codebook is not None else Codebook(
            base_vocab_size, max_merge, capacity_limit
        )
        self._node = 0
        self._code = -1
        self._wlen = 0  # window length; 0 means empty window
        self.emitted_count = 0

    @property
    def window(self) -> tuple[int, ...]:
        """Current match buffer (always itself a valid match, or empty)."""
        if self._wlen == 0:
            return ()
        return self.codebook.flatten(self._code)

    def encode_step(self, tok: int) -> list[int]:
        """Feed one token; returns the 0 or 1 codes emitted."""
        cb = self.codebook
        vocab = cb.base_vocab_size
        if not 0 <= tok < vocab:
            raise TokenOutOfRange(f"token {tok} outside vocabulary of size {vocab}")
        return self._feed_validated((tok,))

    def feed(self, stream: Iterable[int]) -> list[int]:
        """Feed many tokens; returns all codes emitted for this chunk."""
        tokens = stream if isinstance(stream, (list, tuple)) else list(stream)
        if tokens:
            vocab = self.codebook.base_vocab_size
            if min(tokens) < 0 or max(tokens) >= vocab:
                bad = next(t for t in tokens if not 0 <= t < vocab)
                raise TokenOutOfRange(
                    f"token {bad} outside vocabulary of size {vocab}"
                )
        return self._feed_validated(tokens)

    def _feed_validated(self, tokens: Sequence[int]) -> list[int]:
        cb = self.codebook
        vocab = cb.base_vocab_size
        max_merge = cb.max_merge
        children = cb._children
        entry_at = cb._entry_at
        entries = cb._entries
        entry_node = cb._entry_node
        limit = cb.capacity_limit
        limit = limit if limit is not None else 1 << 62
        get = children.get

        node = self._node
        code = self._code
        wlen = self._wlen
        out: list[int] = []
        append = out.append

        for tok in tokens:
            if wlen:
                key = node * vocab + tok
                child = get(key)
                if child is not None:
                    ecode = entry_at[child]
                    if ecode is not None:
                        node = child
                        code = ecode
                        wlen += 1
                        continue
                append(code)
                if wlen < max_merge and len(entries) < limit:
                    if child is None:
                        child = len(entry_at)
                        children[key] = child
                        entry_at.append(None)
                    entry_at[child] = vocab + len(entries)
                    entries.append(
                        (entries[code - vocab] if code >= vocab else (code,))
                        + (tok,)
                    )
                    entry_node.append(child)
            # window := [tok]
            child = get(tok)
            if child is None:
                child = len(entry_at)
                children[tok] = child
                entry_at.append(None)
            node = child
            code = tok
            wlen = 1

        self._node = node
        self._code = code
        self._wlen = wlen
        self.emitted_count += len(out)
        return out

    def finalize(self) -> list[int]:
        """Flush the residual window; idempotent (second call emits [])."""
        if self._wlen == 0:
            return []
        code = self._code
        self._node = 0
        self._code = -1
        self._wlen = 0
        self.emitted_count += 1
        return [code]

    def reset(self) -> None:
        """Fresh empty codebook and window (per-sequence semantics)."""
        cb = self.codebook
        self.codebook = Codebook(cb.base_vocab_size, cb.max_merge, cb.capacity_limit)
        self._node = 0
        self._code = -1
        self._wlen = 0
        self.emitted_count = 0


class LzwDecoder:
    """Streaming decompressor; reconstructs the encoder's codebook."""

    __slots__ = ("codebook", "_prev_code", "_prev_seq", "last_new_entry")

    def __init__(
        self,
        base_vocab_size: int,
        max_merge: int,
        capacity_limit: Optional[int] = None,
        *,
        codebook: Optional[Codebook] = None,
    ):
        self.codebook = codebook if codebook is not None else Codebook(
            base_vocab_size, max_merge, capacity_limit
        )
        self._prev_code: Optional[int] = None
        self._prev_seq: tuple[int, ...] = ()
        # (id, sequence) added by the most recent decode_step, or None.
        self.last_new_entry: Optional[tuple[int, tuple[int, ...]]] = None

    @property
    def prev(self) -> Optional[tuple[int, ...]]:
        """Expansion of the previous code, or None before the first one."""
        return self._prev_seq if self._prev_code is not None else None

    def decode_step(self, code: int) -> tuple[int, ...]:
        """Consume one code and return its base-token expansion.

        Applies the decoder add rule (prev expansion + first token of the
        current one) with the same skip conditions as the encoder, so both
        dictionaries evolve identically.  code == next_id is the classic
        special case and is only decodable when the implied add succeeds.
        """
        cb = self.codebook
        vocab = cb.base_vocab_size
        next_id = vocab + len(cb._entries)
        self.last_new_entry = None
        if self._prev_code is None:
            if not 0 <= code < next_id:
                raise UnknownCode(f"code {code} not assigned (next id is {next_id})")
            seq = cb._entries[code - vocab] if code >= vocab else (code,)
        elif 0 <= code < next_id:
            seq = cb._entries[code - vocab] if code >= vocab else (code,)
            prev_seq = self._prev_seq
            added = cb._extend_match(self._prev_code, seq[0], len(prev_seq))
            if added is not None:
                self.last_new_entry = (added, prev_seq + (seq[0],))
        elif code == next_id:
            # cScSc: the code names the entry this very step creates.
            prev_seq = self._prev_seq
            added = cb._extend_match(self._prev_code, prev_seq[0], len(prev_seq))
            if added != code:
                raise UnknownCode(
                    f"code {code} not decodable: pending entry could not be created"
                )
            seq = prev_seq + (prev_seq[0],)
            self.last_new_entry = (added, seq)
        else:
            raise UnknownCode(f"code {code} not assigned (next id is {next_id})")
        self._prev_code = code
        self._prev_seq = seq
        return seq

    def feed(self, codes: Iterable[int]) -> list[int]:
        """Decode many codes into a flat base-token list."""
        out: list[int] = []
        step = self.decode_step
        for code in codes:
            out.extend(step(code))
        return out


def encode_all(
    stream: Iterable[int],
    base_vocab_size: int,
    max_merge: int,
    capacity_limit: Optional[int] = None,
) -> tuple[list[int], Codebook]:
    """Compress a whole sequence with a fresh codebook.

    Returns the code stream and the final codebook (the fixed dictionary an
    offline preprocessing pass would persist for that sequence).
    """
    enc = LzwEncoder(base_vocab_size, max_merge, capacity_limit)
    codes = enc.feed(stream)
    codes.extend(enc.finalize())
    return codes, enc.codebook


def decode_all(
    codes: Iterable[int],
    base_vocab_size: int,
    max_merge: int,
    capacity_limit: Optional[int] = None,
) -> list[int]:
    """Inverse of encode_all under identical codebook parameters."""
    dec = LzwDecoder(base_vocab_size, max_merge, capacity_limit)
    return dec.feed(codes)
