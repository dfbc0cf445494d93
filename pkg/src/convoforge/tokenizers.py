"""Token counting plugins.

The document filter only needs token *counts*, so the plugin surface is a
single method. Two implementations ship with the package:

- ``WhitespaceTokenizer``: deterministic, dependency-free default.
- ``BpeTokenizer``: greedy pair-merge tokenizer driven by an external merges
  table, for opt-in parity with a specific model vocabulary.

Anything exposing ``count_tokens(text) -> int`` (e.g. a wrapper around a
third-party tokenizer) can be plugged in instead.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Protocol, runtime_checkable


class TokenizerError(ValueError):
    pass


@runtime_checkable
class TokenCounter(Protocol):
    name: str

    def count_tokens(self, text: str) -> int: ...


class WhitespaceTokenizer:
    """Counts whitespace-separated chunks."""

    name = "whitespace"

    def count_tokens(self, text: str) -> int:
        return len(text.split())


class BpeTokenizer:
    """Byte-pair tokenizer backed by an external merges table.

    ``merges`` is an ordered list of symbol pairs, highest priority first.
    Words are split on whitespace, exploded into characters (the last one
    suffixed with ``end_of_word``), then adjacent pairs are merged greedily
    by rank until no listed pair remains. Characters never seen in any merge
    survive as single-symbol tokens, so arbitrary UTF-8 always encodes.
    """

    def __init__(
        self,
        merges: list[tuple[str, str]],
        vocab: dict[str, int] | None = None,
        end_of_word: str = "</w>",
        name: str = "bpe",
    ):
        self.name = name
        self.end_of_word = end_of_word
        self.vocab = dict(vocab) if vocab else None
        self._ranks: dict[tuple[str, str], int] = {}
        for i, pair in enumerate(merges):
            if len(pair) != 2:
                raise TokenizerError(f"merge entry {i} must be a pair, got {pair!r}")
            self._ranks[(pair[0], pair[1])] = i
        self._word_cache: dict[str, int] = {}

    @classmethod
    def from_files(cls, merges_path: str | Path, vocab_path: str | Path | None = None) -> "BpeTokenizer":
        merges = []
        for raw in Path(merges_path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise TokenizerError(f"bad merge line: {raw!r}")
            merges.append((parts[0], parts[1]))
        vocab = None
        if vocab_path is not None:
            vocab = json.loads(Path(vocab_path).read_text(encoding="utf-8"))
            if not isinstance(vocab, dict):
                raise TokenizerError("vocabulary file must hold a JSON object of piece -> id")
        return cls(merges, vocab=vocab)

    def encode_word(self, word: str) -> list[str]:
        symbols = list(word)
        symbols[-1] += self.end_of_word
        while len(symbols) > 1:
            pairs = [(symbols[i], symbols[i + 1]) for i in range(len(symbols) - 1)]
            ranked = [(self._ranks[p], p) for p in set(pairs) if p in self._ranks]
            if not ranked:
                break
            _, target = min(ranked)
            merged: list[str] = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and (symbols[i], symbols[i + 1]) == target:
                    merged.append(symbols[i] + symbols[i + 1])
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols = merged
        return symbols

    def encode(self, text: str) -> list[str]:
        pieces: list[str] = []
        for word in text.split():
            pieces.extend(self.encode_word(word))
        return pieces

    def count_tokens(self, text: str) -> int:
        total = 0
        for word in text.split():
            n = self._word_cache.get(word)
            if n is None:
                n = len(self.encode_word(word))
                self._word_cache[word] = n
            total += n
        return total


def make_tokenizer(spec: str | dict) -> TokenCounter:
    """Build a tokenizer from a config value.

    Accepts ``"whitespace"``, ``{"kind": "whitespace"}`` or
    ``{"kind": "bpe", "merges": path, "vocab": optional path}``.
    """
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    if kind == "whitespace":
        return WhitespaceTokenizer()
    if kind == "bpe":
        merges = spec.get("merges")
        if not merges:
            raise TokenizerError("bpe tokenizer requires a 'merges' file path")
        return BpeTokenizer.from_files(merges, spec.get("vocab"))
    raise TokenizerError(f"unknown tokenizer kind: {kind!r}")
