"""Words and symbol sequences.

Finite words, truncation-aware prefixes of infinite sequences, the
2^-(k+1) disagreement metric, shift, admissibility, and a run-length
block representation that supports arbitrary-precision indexing without
expanding symbols.
"""

from __future__ import annotations

import os
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

from .errors import (
    CapExceededError,
    IndexPastEndError,
    ShiftPastEndError,
    SymbolOutOfRangeError,
    ZeroPowerError,
)
from .transition import TransitionMatrix, Word

DEFAULT_MATERIALIZE_CAP = 10**7


def default_materialize_cap() -> int:
    """Materialization cap; the CHAOSCERT_CAP environment variable overrides."""
    env = os.environ.get("CHAOSCERT_CAP")
    return int(env) if env else DEFAULT_MATERIALIZE_CAP


def word_from_string(text: str) -> Word:
    """Parse a word serialized as a digit string, e.g. "1212" -> (1,2,1,2)."""
    if not text or not text.isdigit():
        raise ValueError(f"not a digit-string word: {text!r}")
    word = tuple(int(ch) for ch in text)
    if any(s == 0 for s in word):
        raise ValueError("symbols are 1-based; digit 0 is not a symbol")
    return word


def word_to_string(word: Iterable[int]) -> str:
    syms = tuple(word)
    if any(not (1 <= s <= 9) for s in syms):
        raise ValueError("digit-string serialization supports symbols 1..9 only")
    return "".join(str(s) for s in syms)


@dataclass(frozen=True)
class SequencePrefix:
    """A finite truncation of a (possibly infinite) symbol sequence.

    `origin` describes the infinite sequence this prefix was cut from;
    two prefixes with the same origin are truncations of one sequence,
    which lets the metric certify distance zero.
    """

    symbols: Word
    origin: str | None = None

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]


def _coerce_prefix(value) -> SequencePrefix:
    if isinstance(value, SequencePrefix):
        return value
    return SequencePrefix(tuple(value))


@dataclass(frozen=True)
class RhoValue:
    """Metric result: exact value, or a certified upper bound when both
    prefixes run out before disagreeing and have different origins."""

    value: Fraction
    exact: bool


def rho(alpha, beta) -> RhoValue:
    """Disagreement metric 2^-(k+1) at the first differing index k.

    Exact when a disagreement happens within the common prefix, or when
    both prefixes truncate the same declared sequence (then 0).  Otherwise
    only the bound rho <= 2^-(L+1) is certified, L the common length.
    """
    a = _coerce_prefix(alpha)
    b = _coerce_prefix(beta)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("metric needs nonempty prefixes")
    common = min(len(a), len(b))
    for k in range(common):
        if a.symbols[k] != b.symbols[k]:
            return RhoValue(Fraction(1, 2 ** (k + 1)), exact=True)
    if a.origin is not None and a.origin == b.origin:
        return RhoValue(Fraction(0), exact=True)
    return RhoValue(Fraction(1, 2 ** (common + 1)), exact=False)


def shift(prefix, k: int) -> SequencePrefix:
    """Drop the first k symbols."""
    p = _coerce_prefix(prefix)
    if k < 0 or k >= len(p):
        raise ShiftPastEndError(f"cannot shift by {k} in a prefix of length {len(p)}")
    if k == 0:
        return p
    origin = f"shift({k}):{p.origin}" if p.origin is not None else None
    return SequencePrefix(p.symbols[k:], origin)


def is_admissible(seq, matrix: TransitionMatrix) -> bool:
    """True iff every adjacent transition has matrix entry 1."""
    symbols = seq.symbols if isinstance(seq, SequencePrefix) else tuple(seq)
    for s in symbols:
        if not 1 <= s <= matrix.m:
            raise SymbolOutOfRangeError(f"symbol {s} outside 1..{matrix.m}")
    return all(matrix.entry(x, y) == 1 for x, y in zip(symbols, symbols[1:]))


def concat(u: Iterable[int], v: Iterable[int]) -> Word:
    """Combination of two words; lengths add."""
    return tuple(u) + tuple(v)


class Block(NamedTuple):
    """One run: `word` repeated `exponent` times (exponent may be huge)."""

    word: Word
    exponent: int

    @property
    def length(self) -> int:
        return len(self.word) * self.exponent


def power(u: Iterable[int], n: int) -> Block:
    """The block u^n; never expanded, total length len(u)*n exactly."""
    word = tuple(u)
    if n < 1:
        raise ZeroPowerError(f"exponent must be >= 1, got {n}")
    if not word:
        raise ValueError("empty word")
    return Block(word, n)


class BlockSequence:
    """A concatenation of blocks, indexable at arbitrary-precision positions.

    Total length and block starts are exact integers; reading a symbol
    walks the block table (binary search), never the symbols themselves.
    """

    def __init__(self, blocks: Iterable):
        blk = []
        for item in blocks:
            b = item if isinstance(item, Block) else Block(tuple(item[0]), int(item[1]))
            if b.exponent < 1:
                raise ZeroPowerError(f"block exponent must be >= 1, got {b.exponent}")
            if not b.word:
                raise ValueError("empty block word")
            blk.append(b)
        self.blocks: tuple[Block, ...] = tuple(blk)
        starts = [0]
        for b in self.blocks:
            starts.append(starts[-1] + b.length)
        self._starts = starts

    @property
    def total_length(self) -> int:
        return self._starts[-1]

    def block_start(self, i: int) -> int:
        return self._starts[i]

    def symbol_at(self, index: int) -> int:
        if index < 0 or index >= self.total_length:
            raise IndexPastEndError(f"index {index} outside 0..{self.total_length - 1}")
        i = bisect_right(self._starts, index) - 1
        block = self.blocks[i]
        return block.word[(index - self._starts[i]) % len(block.word)]

    def materialize(self, n: int, cap: int | None = None) -> SequencePrefix:
        """First n symbols as an explicit prefix, subject to the cap."""
        if cap is None:
            cap = default_materialize_cap()
        if n > cap:
            raise CapExceededError(
                f"materializing {n} symbols exceeds the cap {cap}; "
                "use the closed-form counting paths"
            )
        if n > self.total_length:
            raise IndexPastEndError(f"only {self.total_length} symbols available, asked {n}")
        out: list[int] = []
        for block in self.blocks:
            if len(out) >= n:
                break
            need = n - len(out)
            full = min(block.exponent, need // len(block.word))
            out.extend(block.word * full)
            rest = n - len(out)
            if rest > 0 and full < block.exponent:
                out.extend(block.word[:rest])
        return SequencePrefix(tuple(out))

    def junctions_admissible(self, matrix: TransitionMatrix) -> bool:
        """Every block word admissible, every within-block wrap and every
        block boundary transition allowed."""
        for b in self.blocks:
            if not is_admissible(b.word, matrix):
                return False
            if b.exponent > 1 and matrix.entry(b.word[-1], b.word[0]) != 1:
                return False
        for left, right in zip(self.blocks, self.blocks[1:]):
            if matrix.entry(left.word[-1], right.word[0]) != 1:
                return False
        return True

    def to_json_obj(self) -> list[dict]:
        return [
            {"word": word_to_string(b.word), "exponent": str(b.exponent)}
            for b in self.blocks
        ]

    @classmethod
    def from_json_obj(cls, data) -> "BlockSequence":
        return cls((word_from_string(item["word"]), int(item["exponent"])) for item in data)


class SymbolStream:
    """Read-only source for an infinite (or long finite) symbol sequence."""

    def symbol(self, i: int) -> int:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def prefix(self, n: int) -> SequencePrefix:
        return SequencePrefix(tuple(self.symbol(i) for i in range(n)), self.describe())

    def shifted(self, k: int) -> "SymbolStream":
        return _ShiftedStream(self, k) if k else self


class PeriodicStream(SymbolStream):
    """The periodic sequence (word word word ...); period is made minimal."""

    def __init__(self, word: Iterable[int]):
        word = tuple(word)
        if not word:
            raise ValueError("empty period word")
        self.word = word[: primitive_period(word)] if len(word) > 1 else word
        self.period = len(self.word)

    def symbol(self, i: int) -> int:
        return self.word[i % self.period]

    def describe(self) -> str:
        return f"periodic:{word_to_string(self.word)}"

    def shifted(self, k: int) -> "PeriodicStream":
        r = k % self.period
        return PeriodicStream(self.word[r:] + self.word[:r])


class PrefixStream(SymbolStream):
    """A finite stretch of symbols standing in for a longer sequence."""

    def __init__(self, symbols: Iterable[int], origin: str | None = None):
        self.symbols = tuple(symbols)
        self.origin = origin

    def symbol(self, i: int) -> int:
        if i >= len(self.symbols):
            raise IndexPastEndError(f"prefix stream has only {len(self.symbols)} symbols")
        return self.symbols[i]

    def describe(self) -> str:
        return self.origin or f"prefix:{word_to_string(self.symbols)}"

    def shifted(self, k: int) -> "PrefixStream":
        if k >= len(self.symbols):
            raise ShiftPastEndError(f"cannot shift prefix stream by {k}")
        return PrefixStream(self.symbols[k:], f"shift({k}):{self.describe()}")


class _ShiftedStream(SymbolStream):
    def __init__(self, base: SymbolStream, k: int):
        self.base = base
        self.k = k

    def symbol(self, i: int) -> int:
        return self.base.symbol(i + self.k)

    def describe(self) -> str:
        return f"shift({self.k}):{self.base.describe()}"


def primitive_period(word: tuple[int, ...]) -> int:
    """Length of the smallest repeating unit of `word`."""
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and all(word[i] == word[i % p] for i in range(n)):
            return p
    return n
