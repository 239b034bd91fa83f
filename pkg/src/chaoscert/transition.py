"""Transition-matrix algebra.

Validity and irreducibility checks, admissible-word enumeration, and the
two word-gadget searches (an equal-length word pair and a connector word)
that the schedule constructions consume.  Symbols are 1-based integers
1..m throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    LengthZeroError,
    NonBinaryEntryError,
    NotFoundError,
    TooSmallError,
    ZeroColumnError,
    ZeroRowError,
)

Word = tuple[int, ...]


@dataclass(frozen=True)
class TransitionMatrix:
    """A 0/1 matrix over the alphabet {1..m}."""

    entries: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.entries)

    def entry(self, i: int, j: int) -> int:
        """Entry for the transition i -> j, with 1-based symbols."""
        return self.entries[i - 1][j - 1]

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.m + 1) if self.entry(i, j) == 1)

    def predecessors(self, j: int) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.m + 1) if self.entry(i, j) == 1)

    def symbols(self) -> range:
        return range(1, self.m + 1)

    def to_rows(self) -> list[list[int]]:
        return [list(row) for row in self.entries]


def validate_matrix(entries) -> TransitionMatrix:
    """Check a grid of integers and wrap it as a TransitionMatrix.

    Rules, each with its own error class: the grid is square with m >= 2,
    every entry is 0 or 1, and no row or column is all zeros (so that the
    shift space is nonempty in both directions).
    """
    rows = [tuple(row) for row in entries]
    m = len(rows)
    if m < 2:
        raise TooSmallError(f"need m >= 2, got {m}")
    for row in rows:
        if len(row) != m:
            raise TooSmallError(f"grid is not square: row of length {len(row)} in {m}x{m}")
    for i, row in enumerate(rows):
        for j, a in enumerate(row):
            if a not in (0, 1):
                raise NonBinaryEntryError(f"entry ({i + 1},{j + 1}) = {a!r} is not 0/1")
    for i, row in enumerate(rows):
        if not any(row):
            raise ZeroRowError(f"row {i + 1} is all zeros")
    for j in range(m):
        if not any(row[j] for row in rows):
            raise ZeroColumnError(f"column {j + 1} is all zeros")
    return TransitionMatrix(tuple(rows))


def is_irreducible(matrix: TransitionMatrix) -> bool:
    """True iff the directed graph i -> j (entry 1) is strongly connected.

    Equivalent to: for every ordered pair (i, j) some power of the matrix
    has a positive (i, j) entry.
    """
    m = matrix.m

    def reachable(start: int, forward: bool) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            nexts = matrix.successors(x) if forward else matrix.predecessors(x)
            for y in nexts:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    return len(reachable(1, True)) == m and len(reachable(1, False)) == m


def star_row(matrix: TransitionMatrix) -> int | None:
    """Smallest row index whose row sum is at least 2, or None."""
    for i in matrix.symbols():
        if sum(matrix.entries[i - 1]) >= 2:
            return i
    return None


def _mat_mult(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    n = len(a)
    return [
        [sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
        for i in range(n)
    ]


def count_admissible_words(matrix: TransitionMatrix, n: int) -> int:
    """Number of admissible words of length n: the entry sum of the
    (n-1)-th matrix power."""
    if n < 1:
        raise LengthZeroError("word length must be >= 1")
    m = matrix.m
    power = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    base = matrix.to_rows()
    for _ in range(n - 1):
        power = _mat_mult(power, base)
    return sum(sum(row) for row in power)


def enumerate_admissible_words(matrix: TransitionMatrix, n: int) -> list[Word]:
    """All admissible words of length n, in lexicographic order."""
    if n < 1:
        raise LengthZeroError("word length must be >= 1")
    out: list[Word] = []
    word = [0] * n

    def extend(pos: int) -> None:
        if pos == n:
            out.append(tuple(word))
            return
        candidates = matrix.symbols() if pos == 0 else matrix.successors(word[pos - 1])
        for s in candidates:
            word[pos] = s
            extend(pos + 1)

    extend(0)
    return out


def _reach_table(matrix: TransitionMatrix, target: int, steps: int) -> list[set[int]]:
    """can[r] = symbols from which `target` is reachable in exactly r steps."""
    can = [{target}]
    for _ in range(steps):
        prev = can[-1]
        can.append({i for i in matrix.symbols() if any(j in prev for j in matrix.successors(i))})
    return can


def _iter_words_between(matrix: TransitionMatrix, first: int, last: int, length: int):
    """Admissible words of the given length from `first` to `last`,
    lexicographically, with dead-end pruning."""
    if length == 1:
        if first == last:
            yield (first,)
        return
    can = _reach_table(matrix, last, length - 1)
    word = [first] + [0] * (length - 1)

    def extend(pos: int):
        if pos == length:
            yield tuple(word)
            return
        remaining = length - 1 - pos
        for s in matrix.successors(word[pos - 1]):
            if s in can[remaining]:
                word[pos] = s
                yield from extend(pos + 1)

    if first in can[length - 1]:
        yield from extend(1)


@dataclass(frozen=True)
class WordPairGadget:
    """Two distinct equal-length admissible words sharing first and last
    symbols, with the last symbol allowed to transition back to the first."""

    a0: int
    a_prime: int
    v1: Word
    v2: Word
    l: int

    def check(self, matrix: TransitionMatrix) -> None:
        """Re-validate every invariant; raises ValueError on violation."""
        if self.v1 == self.v2:
            raise ValueError("gadget words must differ")
        if not (len(self.v1) == len(self.v2) == self.l):
            raise ValueError("gadget words must share the declared length")
        for w in (self.v1, self.v2):
            if w[0] != self.a0 or w[-1] != self.a_prime:
                raise ValueError("gadget words must run from a0 to a_prime")
            for x, y in zip(w, w[1:]):
                if matrix.entry(x, y) != 1:
                    raise ValueError(f"gadget word {w} is not admissible")
        if matrix.entry(self.a_prime, self.a0) != 1:
            raise ValueError("a_prime must transition back to a0")


def find_equal_length_pair(matrix: TransitionMatrix, a0: int, max_len: int | None = None) -> WordPairGadget:
    """Search for the minimal equal-length pair gadget starting at a0.

    Scans lengths upward; for each length, candidate end symbols a' with
    entry(a', a0) = 1 in symbol order; the first two words found (they come
    out lexicographically) win.  Deterministic by construction.
    """
    if max_len is None:
        max_len = matrix.m * matrix.m + 2 * matrix.m + 2
    for length in range(2, max_len + 1):
        for a_prime in matrix.symbols():
            if matrix.entry(a_prime, a0) != 1:
                continue
            found: list[Word] = []
            for w in _iter_words_between(matrix, a0, a_prime, length):
                found.append(w)
                if len(found) == 2:
                    return WordPairGadget(a0, a_prime, found[0], found[1], length)
    raise NotFoundError(
        f"no equal-length word pair from symbol {a0} within length {max_len}; "
        "hypotheses (irreducibility and a row sum >= 2) are likely violated"
    )


def find_connector(matrix: TransitionMatrix, a0: int, max_len: int | None = None) -> Word:
    """Shortest admissible word (i...j) with entry(a0, i) = entry(j, a0) = 1,
    lexicographic tie-break."""
    if max_len is None:
        max_len = 2 * matrix.m + 2
    enders = set(matrix.predecessors(a0))
    for length in range(1, max_len + 1):
        # can[r] = symbols from which some ender is reachable in exactly r steps
        can = [enders]
        for _ in range(length - 1):
            prev = can[-1]
            can.append({i for i in matrix.symbols() if any(j in prev for j in matrix.successors(i))})
        word = [0] * length

        def extend(pos: int):
            if pos == length:
                yield tuple(word)
                return
            candidates = matrix.successors(a0) if pos == 0 else matrix.successors(word[pos - 1])
            remaining = length - 1 - pos
            for s in candidates:
                if s in can[remaining]:
                    word[pos] = s
                    yield from extend(pos + 1)

        for w in extend(0):
            return w
    raise NotFoundError(
        f"no connector word around symbol {a0} within length {max_len}; "
        "the matrix is likely not irreducible"
    )
