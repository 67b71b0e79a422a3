"""Dynamic hypertoken codebook: entry storage, id assignment, prefix lookup.

A codebook augments a static vocabulary of ``base_vocab_size`` tokens with
hypertokens, each standing for a merged run of 2..max_merge base tokens.
Hypertoken ids are assigned contiguously upward from ``base_vocab_size`` in
creation order and are never reused or removed.

The prefix index is a flat trie held in parallel structures instead of node
objects: ``_children`` maps ``node * base_vocab_size + token`` to the child
node id and ``_entry_at[node]`` holds the hypertoken id terminating at that
node (or None for pure path nodes).  Integer keys keep the encoder's
inner loop free of tuple allocation; see lzw.py for the loop that leans on
this layout.

Entries are stored fully flattened (base tokens only, no nested references)
so decoding a code is a single list index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence

from .errors import ParseError, TokenOutOfRange, UnknownCode

CODEBOOK_FORMAT_VERSION = 1

# Effectively-unbounded sentinel used when no capacity limit is set.
_NO_LIMIT = 1 << 62


class AddOutcome(Enum):
    ADDED = "added"
    SKIPPED_TOO_LONG = "skipped_too_long"
    SKIPPED_DUPLICATE = "skipped_duplicate"
    SKIPPED_CAPACITY = "skipped_capacity"


@dataclass(frozen=True)
class AddResult:
    """Outcome of try_add; only ADDED carries the assigned code."""

    outcome: AddOutcome
    code: Optional[int] = None

    @property
    def added(self) -> bool:
        return self.outcome is AddOutcome.ADDED


class Codebook:
    __slots__ = (
        "base_vocab_size",
        "max_merge",
        "capacity_limit",
        "_entries",
        "_entry_node",
        "_children",
        "_entry_at",
    )

    def __init__(
        self,
        base_vocab_size: int,
        max_merge: int,
        capacity_limit: Optional[int] = None,
    ):
        if base_vocab_size < 1:
            raise ValueError("base_vocab_size must be >= 1")
        if max_merge < 1:
            raise ValueError("max_merge must be >= 1")
        if capacity_limit is not None and capacity_limit < 0:
            raise ValueError("capacity_limit must be >= 0 or None")
        self.base_vocab_size = base_vocab_size
        self.max_merge = max_merge
        self.capacity_limit = capacity_limit
        self._entries: list[tuple[int, ...]] = []
        self._entry_node: list[int] = []
        # Node 0 is the trie root; root children are keyed by the bare token.
        self._children: dict[int, int] = {}
        self._entry_at: list[Optional[int]] = [None]

    # -- introspection -----------------------------------------------------

    @property
    def next_id(self) -> int:
        return self.base_vocab_size + len(self._entries)

    @property
    def hyper_count(self) -> int:
        return len(self._entries)

    def hyper_entries(self) -> list[tuple[int, ...]]:
        """Entry sequences in id order (entry i has id base_vocab_size + i)."""
        return list(self._entries)

    def items(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        base = self.base_vocab_size
        for i, seq in enumerate(self._entries):
            yield base + i, seq

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return (
            f"Codebook(base_vocab_size={self.base_vocab_size}, "
            f"max_merge={self.max_merge}, entries={len(self._entries)})"
        )

    # -- core operations ----------------------------------------------------

    def flatten(self, code: int) -> tuple[int, ...]:
        """Expand a code to its base tokens; base codes are singletons."""
        if 0 <= code < self.base_vocab_size:
            return (code,)
        idx = code - self.base_vocab_size
        if 0 <= idx < len(self._entries):
            return self._entries[idx]
        raise UnknownCode(f"code {code} not assigned (next id is {self.next_id})")

    def try_add(self, seq: Sequence[int]) -> AddResult:
        """Register ``seq`` as a new hypertoken unless a skip rule applies.

        Skips never consume an id.  A length-1 sequence is already
        representable as a base token and reports SKIPPED_DUPLICATE.
        """
        n = len(seq)
        if n == 0:
            raise ValueError("cannot add an empty sequence")
        vocab = self.base_vocab_size
        for tok in seq:
            if not 0 <= tok < vocab:
                raise TokenOutOfRange(
                    f"token {tok} outside vocabulary of size {vocab}"
                )
        if n == 1:
            return AddResult(AddOutcome.SKIPPED_DUPLICATE)
        if n > self.max_merge:
            return AddResult(AddOutcome.SKIPPED_TOO_LONG)

        # Walk existing nodes first so a skip leaves the trie untouched.
        children = self._children
        node = 0
        depth = 0
        for tok in seq:
            child = children.get(node * vocab + tok if node else tok)
            if child is None:
                break
            node = child
            depth += 1
        if depth == n and self._entry_at[node] is not None:
            return AddResult(AddOutcome.SKIPPED_DUPLICATE)
        limit = self.capacity_limit
        if limit is not None and len(self._entries) >= limit:
            return AddResult(AddOutcome.SKIPPED_CAPACITY)

        entry_at = self._entry_at
        for tok in seq[depth:]:
            child = len(entry_at)
            children[node * vocab + tok if node else tok] = child
            entry_at.append(None)
            node = child
        code = vocab + len(self._entries)
        entry_at[node] = code
        self._entries.append(tuple(seq))
        self._entry_node.append(node)
        return AddResult(AddOutcome.ADDED, code)

    def longest_match(self, stream: Sequence[int], start: int = 0) -> tuple[int, int]:
        """Longest base-or-hypertoken match at ``start``: (code, consumed).

        A single base token always matches, so consumed >= 1.  The starting
        token must be in range; a later out-of-range token simply ends the
        walk (nothing can match across it).
        """
        if not 0 <= start < len(stream):
            raise ValueError(f"start {start} outside stream of length {len(stream)}")
        vocab = self.base_vocab_size
        tok = stream[start]
        if not 0 <= tok < vocab:
            raise TokenOutOfRange(f"token {tok} outside vocabulary of size {vocab}")
        best_code, best_len = tok, 1
        children = self._children
        entry_at = self._entry_at
        node = children.get(tok)
        i = start + 1
        length = 1
        end = len(stream)
        while node is not None and i < end:
            tok = stream[i]
            if not 0 <= tok < vocab:
                break
            node = children.get(node * vocab + tok)
            if node is None:
                break
            length += 1
            i += 1
            code = entry_at[node]
            if code is not None:
                best_code, best_len = code, length
        return best_code, best_len

    def entry_id(self, seq: Sequence[int]) -> Optional[int]:
        """Exact-match hypertoken id for ``seq``, or None."""
        if len(seq) < 2 or len(seq) > self.max_merge:
            return None
        vocab = self.base_vocab_size
        children = self._children
        node = 0
        for tok in seq:
            node = children.get(node * vocab + tok if node else tok)
            if node is None:
                return None
        return self._entry_at[node]

    # -- fast paths shared with the LZW state machines ----------------------

    def _singleton_node(self, tok: int) -> int:
        """Trie node for the one-token match [tok], created on demand."""
        children = self._children
        node = children.get(tok)
        if node is None:
            node = len(self._entry_at)
            children[tok] = node
            self._entry_at.append(None)
        return node

    def _node_of(self, code: int) -> int:
        """Trie node for a valid match code (base or hypertoken)."""
        if code < self.base_vocab_size:
            return self._singleton_node(code)
        return self._entry_node[code - self.base_vocab_size]

    def _extend_match(self, code: int, tok: int, length: int) -> Optional[int]:
        """Add flatten(code) + [tok] under the standard skip rules.

        ``length`` is len(flatten(code)); the caller tracks it.  Returns the
        new hypertoken id or None on any skip.  No argument validation: this
        is the decoder-rule hot path.
        """
        if length >= self.max_merge:
            return None
        vocab = self.base_vocab_size
        node = self._node_of(code)
        key = node * vocab + tok
        children = self._children
        entry_at = self._entry_at
        child = children.get(key)
        if child is not None and entry_at[child] is not None:
            return None  # duplicate
        limit = self.capacity_limit
        if limit is not None and len(self._entries) >= limit:
            return None
        if child is None:
            child = len(entry_at)
            children[key] = child
            entry_at.append(None)
        new_code = vocab + len(self._entries)
        entry_at[child] = new_code
        prev_seq = self._entries[code - vocab] if code >= vocab else (code,)
        self._entries.append(prev_seq + (tok,))
        self._entry_node.append(child)
        return new_code

    # -- serialization -------------------------------------------------------

    def serialize(self) -> bytes:
        """UTF-8 JSON codebook file; see deserialize for the inverse."""
        obj = {
            "format_version": CODEBOOK_FORMAT_VERSION,
            "base_vocab_size": self.base_vocab_size,
            "max_merge": self.max_merge,
            "entries": [list(seq) for seq in self._entries],
        }
        return json.dumps(obj, separators=(",", ":")).encode("utf-8")

    @classmethod
    def deserialize(
        cls, data: bytes | str, capacity_limit: Optional[int] = None
    ) -> "Codebook":
        """Rebuild a codebook from its file form.

        capacity_limit is construction-time configuration, not serialized
        state, so it is supplied by the caller (default: unlimited).
        """
        if isinstance(data, bytes):
            try:
                data = data.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"not UTF-8: {exc}") from None
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
        if not isinstance(obj, dict):
            raise ParseError("top level must be a JSON object")

        def _require_int(field: str, minimum: int) -> int:
            value = obj.get(field)
            if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
                raise ParseError(f"must be an integer >= {minimum}", field=field)
            return value

        version = _require_int("format_version", 1)
        if version != CODEBOOK_FORMAT_VERSION:
            raise ParseError(
                f"unsupported version {version}", field="format_version"
            )
        vocab = _require_int("base_vocab_size", 1)
        merge = _require_int("max_merge", 1)
        entries = obj.get("entries")
        if not isinstance(entries, list):
            raise ParseError("must be a list of token arrays", field="entries")
        if capacity_limit is not None and len(entries) > capacity_limit:
            raise ParseError(
                f"{len(entries)} entries exceed capacity limit {capacity_limit}",
                field="entries",
            )
        cb = cls(vocab, merge, capacity_limit)
        for i, seq in enumerate(entries):
            field = f"entries[{i}]"
            if not isinstance(seq, list) or not all(
                isinstance(t, int) and not isinstance(t, bool) for t in seq
            ):
                raise ParseError("must be an array of integers", field=field)
            try:
                result = cb.try_add(seq)
            except (TokenOutOfRange, ValueError) as exc:
                raise ParseError(str(exc), field=field) from None
            if not result.added:
                raise ParseError(
                    f"rejected ({result.outcome.value})", field=field
                )
        return cb

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return (
            self.base_vocab_size == other.base_vocab_size
            and self.max_merge == other.max_merge
            and self._entries == other._entries
        )

    __hash__ = None  # type: ignore[assignment]
