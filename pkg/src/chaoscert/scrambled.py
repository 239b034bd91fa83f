"""Block-schedule constructions for scrambled families.

Two machines produce run-length schedules over a transition matrix:

* ``phi1`` interleaves parameter-chosen words from an equal-length pair
  gadget with ever-longer recurrence prefixes of a reference sequence;
  block exponents follow the doubling rule s_1 = 1,
  s_i = 2^(i-1) * (length of everything to the left).

* ``phi2`` works from a periodic reference sequence: each stage lays down
  a long prefix run completed to a period boundary, a connector word, and
  a batch of parameter-chosen repeated words, with exponents
  m_i = 2^i * (length to the left).

Both are fed binary parameter sequences in {1,2}^N; the supplied family
generator guarantees any two parameters disagree at infinitely many
positions, which is the only property the downstream counting uses.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import isqrt

from .errors import (
    IndexPastEndError,
    InsufficientParameterError,
    NonAdmissibleGadgetError,
    NotRecurrentError,
    PeriodRequiredError,
)
from .symbolic import (
    BlockSequence,
    PeriodicStream,
    SymbolStream,
    is_admissible,
    word_to_string,
)
from .transition import (
    TransitionMatrix,
    Word,
    WordPairGadget,
    find_connector,
    find_equal_length_pair,
)

# Explicit words above this length are not stored in schedule entries;
# such blocks carry word=None and are defined by the reference sequence.
EXPLICIT_WORD_LIMIT = 1 << 16


# ---------------------------------------------------------------------------
# parameter families in {1,2}^N


class ParamRule:
    """A binary sequence c = (c_0 c_1 ...) over {1,2}, addressable anywhere."""

    def letter(self, k: int) -> int:
        raise NotImplementedError

    def letters(self, n: int) -> tuple[int, ...]:
        return tuple(self.letter(k) for k in range(n))

    def describe(self) -> str:
        return self.__class__.__name__


def stage_of_position(k: int) -> tuple[int, int]:
    """Decompose a flat position into (stage, offset): stage s occupies
    positions s(s-1)/2 .. s(s+1)/2 - 1 and repeats coordinates 1..s."""
    s = (isqrt(8 * k + 1) + 1) // 2
    return s, k - s * (s - 1) // 2


class EmbeddedParam(ParamRule):
    """Diagonal embedding of a coordinate stream: stage s spells out
    coordinates 1..s, so two streams differing at coordinate r produce
    sequences differing at position r-1 of every stage >= r."""

    def __init__(self, coords, name: str = ""):
        self._coords = coords  # callable j >= 1 -> {1, 2}
        self._name = name

    def coordinate(self, j: int) -> int:
        return self._coords(j)

    def letter(self, k: int) -> int:
        _, offset = stage_of_position(k)
        return self._coords(offset + 1)

    def describe(self) -> str:
        return self._name or "embedded"


class FiniteParam(ParamRule):
    def __init__(self, letters):
        self._letters = tuple(letters)
        if any(x not in (1, 2) for x in self._letters):
            raise ValueError("parameter letters must be 1 or 2")

    def letter(self, k: int) -> int:
        if k >= len(self._letters):
            raise InsufficientParameterError(
                f"parameter sequence has {len(self._letters)} letters, needed index {k}"
            )
        return self._letters[k]

    def describe(self) -> str:
        return f"finite:{word_to_string(self._letters)}"


def as_param(value) -> ParamRule:
    if isinstance(value, ParamRule):
        return value
    return FiniteParam(value)


class _SaltBits:
    """Lazily extended pseudo-random bit list shared by one family."""

    def __init__(self, seed):
        self._rng = random.Random(seed)
        self._bits: list[int] = []

    def bit(self, j: int) -> int:
        while len(self._bits) < j:
            self._bits.append(self._rng.getrandbits(1))
        return self._bits[j - 1]


class _IndexedCoords:
    """Coordinate j of family member i: the j-th binary digit of i,
    XORed with a shared salt bit (so the salt never changes pairwise
    disagreements)."""

    def __init__(self, index: int, salt: _SaltBits):
        self.index = index
        self.salt = salt

    def __call__(self, j: int) -> int:
        bit = (self.index >> (j - 1)) & 1
        return 1 + (bit ^ self.salt.bit(j))


def scrambled_params(count: int, seed=0) -> list[EmbeddedParam]:
    """A family of `count` parameter rules, pairwise differing at
    infinitely many positions.

    Members get distinct coordinate streams (binary digits of the member
    index, salted by a shared seeded bit stream); the diagonal embedding
    then repeats every differing coordinate once per stage from some
    stage on.
    """
    if count < 2:
        raise ValueError("a scrambled family needs at least two members")
    salt = _SaltBits(seed)
    return [
        EmbeddedParam(_IndexedCoords(i, salt), name=f"param{i}")
        for i in range(count)
    ]


def disagreement_positions(c, d, upto: int) -> list[int]:
    """All positions below `upto` where the two parameter sequences differ."""
    a = as_param(c)
    b = as_param(d)
    return [i for i in range(upto) if a.letter(i) != b.letter(i)]


# ---------------------------------------------------------------------------
# recurrence scaffolding for the first construction


def recurrence_indices(alpha: SymbolStream, a0: int, k: int, budget: int = 1_000_000) -> tuple[int, ...]:
    """First k indices i >= 1 with alpha[i] == a0, strictly increasing."""
    out: list[int] = []
    i = 1
    while len(out) < k:
        if i > budget:
            raise NotRecurrentError(
                f"symbol {a0} recurred only {len(out)} times within budget {budget}"
            )
        try:
            sym = alpha.symbol(i)
        except IndexPastEndError as exc:
            raise NotRecurrentError(
                f"sequence ended after {i} symbols with {len(out)} recurrences of {a0}"
            ) from exc
        if sym == a0:
            out.append(i)
        i += 1
    return tuple(out)


def most_frequent_symbol(alpha: SymbolStream, window: int) -> int:
    """Most frequent symbol in the first `window` symbols, smallest on ties."""
    counts: dict[int, int] = {}
    for i in range(window):
        try:
            s = alpha.symbol(i)
        except IndexPastEndError:
            break
        counts[s] = counts.get(s, 0) + 1
    if not counts:
        raise ValueError("empty sequence")
    best = max(counts.values())
    return min(s for s, c in counts.items() if c == best)


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class ScheduleEntry:
    """One block of the constructed sequence: `word` repeated `exponent`
    times starting at symbol position `start`.

    `index` is the global counter the exponent rule runs on (None for
    unindexed filler blocks in the periodic construction).  `word` is None
    for long reference-prefix blocks kept implicit; `word_len` is always
    the single-repetition length.
    """

    index: int | None
    stage: int
    kind: str  # phi1: v | u; phi2: a0 | C | B | Bbar | psi
    word: Word | None
    word_len: int
    exponent: int
    start: int
    letter: int | None = None
    u_index: int | None = None
    capped: bool = False

    @property
    def length(self) -> int:
        return self.exponent * self.word_len

    @property
    def end(self) -> int:
        return self.start + self.length


class Schedule:
    """The block structure of one constructed sequence."""

    def __init__(self, construction: str, entries, a0: int, cap: int | None,
                 origin: str = "", period: int | None = None, gadget_len: int | None = None):
        self.construction = construction
        self.entries: tuple[ScheduleEntry, ...] = tuple(entries)
        self.a0 = a0
        self.cap = cap
        self.origin = origin
        self.period = period
        self.gadget_len = gadget_len

    @property
    def total_length(self) -> int:
        return self.entries[-1].end if self.entries else 0

    def is_capped(self) -> bool:
        return any(e.capped for e in self.entries)

    def indexed_entries(self) -> list[ScheduleEntry]:
        return [e for e in self.entries if e.index is not None]

    def entry_at(self, index: int) -> ScheduleEntry:
        for e in self.entries:
            if e.index == index:
                return e
        raise KeyError(f"no block with index {index}")

    def max_index(self) -> int:
        return max((e.index for e in self.entries if e.index is not None), default=0)

    def skeleton(self) -> tuple:
        """Everything except word identity: equal for all parameters."""
        return tuple(
            (e.index, e.stage, e.kind, e.word_len, e.exponent, e.start)
            for e in self.entries
        )

    def block_sequence(self) -> BlockSequence:
        if any(e.word is None for e in self.entries):
            raise ValueError("schedule holds implicit blocks; cannot expand words")
        return BlockSequence((e.word, e.exponent) for e in self.entries)

    def position_count_through(self, index: int) -> int:
        """Number of repetition-start positions in blocks 1..index
        (the checkpoint n_j of the sequence construction)."""
        return sum(e.exponent for e in self.entries if e.index is not None and e.index <= index)

    def to_jsonl_rows(self) -> list[dict]:
        rows = []
        for e in self.entries:
            rows.append({
                "stage": e.stage,
                "kind": e.kind,
                "index": e.index,
                "word": word_to_string(e.word) if e.word is not None else None,
                "word_len": str(e.word_len),
                "exponent": str(e.exponent),
                "start": str(e.start),
                "letter": e.letter,
                "capped": e.capped,
            })
        return rows


def p_sequence(schedule: Schedule, count: int) -> list[int]:
    """First `count` repetition-start positions across all blocks, sorted
    (they are produced in increasing order by construction).

    For the sequence construction every repetition of every block starts
    with the leading symbol a0, so these are exactly the positions the
    sequence distribution functions sample.
    """
    if schedule.construction != "phi1":
        raise ValueError("repetition-start sampling is defined for the phi1 construction")
    out: list[int] = []
    for e in schedule.entries:
        for r in range(min(e.exponent, count - len(out))):
            out.append(e.start + r * e.word_len)
        if len(out) >= count:
            break
    return out


def validate_schedule_junctions(schedule: Schedule, matrix: TransitionMatrix, alpha: SymbolStream | None = None) -> bool:
    """Structural admissibility: each block internally admissible (with its
    wrap when repeated) and every block boundary transition allowed."""

    def first_symbol(e: ScheduleEntry) -> int:
        if e.word is not None:
            return e.word[0]
        return alpha.symbol(0)

    def last_symbol(e: ScheduleEntry) -> int:
        if e.word is not None:
            return e.word[-1]
        return alpha.symbol(e.word_len - 1)

    for e in schedule.entries:
        if e.word is not None:
            if not is_admissible(e.word, matrix):
                return False
            if e.exponent > 1 and matrix.entry(e.word[-1], e.word[0]) != 1:
                return False
        elif alpha is None:
            raise ValueError("implicit blocks need the reference sequence to validate")
    for left, right in zip(schedule.entries, schedule.entries[1:]):
        if matrix.entry(last_symbol(left), first_symbol(right)) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# construction 1: recurrence prefixes + equal-length pair


class Phi1Context:
    """Fixed ingredients of the first construction.

    The reference sequence is rotated so that its most frequent symbol in
    a scan window leads; that removes the silent assumption that the
    leading symbol recurs.  Recurrence indices and the prefix words u_k
    are computed lazily.
    """

    def __init__(self, matrix: TransitionMatrix, alpha: SymbolStream, a0: int,
                 gadget: WordPairGadget, cap: int | None = None,
                 recurrence_budget: int = 1_000_000):
        self.matrix = matrix
        self.alpha = alpha
        self.a0 = a0
        self.gadget = gadget
        self.cap = cap
        self.recurrence_budget = recurrence_budget
        self._nu: list[int] = []
        self._next_scan = 1

    def nu(self, k: int) -> int:
        """k-th recurrence index of a0 in the reference sequence (k >= 1)."""
        while len(self._nu) < k:
            i = self._next_scan
            if i > self.recurrence_budget:
                raise NotRecurrentError(
                    f"symbol {self.a0} recurred only {len(self._nu)} times "
                    f"within budget {self.recurrence_budget}"
                )
            try:
                if self.alpha.symbol(i) == self.a0:
                    self._nu.append(i)
            except IndexPastEndError as exc:
                raise NotRecurrentError("reference sequence ended during recurrence scan") from exc
            self._next_scan = i + 1
        return self._nu[k - 1]

    def u_word(self, k: int) -> Word:
        return tuple(self.alpha.symbol(i) for i in range(self.nu(k)))


def build_phi1_context(matrix: TransitionMatrix, alpha: SymbolStream,
                       cap: int | None = None, gadget: WordPairGadget | None = None,
                       scan_window: int = 2048,
                       recurrence_budget: int = 1_000_000) -> Phi1Context:
    lead = most_frequent_symbol(alpha, scan_window)
    rotation = 0
    while alpha.symbol(rotation) != lead:
        rotation += 1
    rotated = alpha.shifted(rotation)
    a0 = rotated.symbol(0)
    if gadget is None:
        gadget = find_equal_length_pair(matrix, a0)
    try:
        gadget.check(matrix)
    except ValueError as exc:
        raise NonAdmissibleGadgetError(str(exc)) from exc
    if gadget.a0 != a0:
        raise NonAdmissibleGadgetError(
            f"gadget starts at {gadget.a0} but the rotated sequence leads with {a0}"
        )
    return Phi1Context(matrix, rotated, a0, gadget, cap=cap,
                       recurrence_budget=recurrence_budget)


def phi1(param, ctx: Phi1Context, target_len: int | None = None,
         min_blocks: int | None = None) -> Schedule:
    """Block schedule of the first construction for one parameter.

    Stage g emits g parameter-chosen pair-gadget blocks (consuming the
    next g parameter letters) followed by the prefix blocks u_1 .. u_g.
    The i-th block overall gets exponent 1 (i = 1) or 2^(i-1) times the
    total length laid down so far; with a cap, exponents clamp at the cap
    and the entry is flagged.
    """
    if target_len is None and min_blocks is None:
        raise ValueError("need target_len or min_blocks")
    rule = as_param(param)
    entries: list[ScheduleEntry] = []
    total = 0
    idx = 0
    consumed = 0
    stage = 0

    def emit(kind: str, word: Word, letter=None, u_index=None):
        nonlocal total, idx
        idx += 1
        true_exp = 1 if idx == 1 else (1 << (idx - 1)) * total
        capped = ctx.cap is not None and true_exp > ctx.cap
        exp = ctx.cap if capped else true_exp
        entries.append(ScheduleEntry(
            index=idx, stage=stage, kind=kind, word=word, word_len=len(word),
            exponent=exp, start=total, letter=letter, u_index=u_index, capped=capped,
        ))
        total += exp * len(word)

    def finished() -> bool:
        return ((target_len is None or total >= target_len)
                and (min_blocks is None or idx >= min_blocks))

    while not finished():
        stage += 1
        for _ in range(stage):
            letter = rule.letter(consumed)
            consumed += 1
            emit("v", ctx.gadget.v1 if letter == 1 else ctx.gadget.v2, letter=letter)
            if finished():
                break
        if finished():
            break
        for k in range(1, stage + 1):
            emit("u", ctx.u_word(k), u_index=k)
            if finished():
                break

    return Schedule("phi1", entries, a0=ctx.a0, cap=ctx.cap,
                    origin=ctx.alpha.describe(), gadget_len=ctx.gadget.l)


# ---------------------------------------------------------------------------
# construction 2: periodic prefix runs + connector


class Phi2Context:
    """Fixed ingredients of the periodic construction: a periodic
    reference sequence with minimal period, the equal-length word pair
    (u, v), and a connector word C whose ends glue to the lead symbol."""

    def __init__(self, matrix: TransitionMatrix, alpha: PeriodicStream,
                 gadget: WordPairGadget, connector: Word, cap: int | None = None):
        self.matrix = matrix
        self.alpha = alpha
        self.gadget = gadget
        self.connector = connector
        self.cap = cap
        self.a0 = alpha.symbol(0)
        self.u = gadget.v1
        self.v = gadget.v2

    @property
    def period(self) -> int:
        return self.alpha.period

    def alpha_prefix_word(self, n: int) -> Word | None:
        """Explicit prefix word, or None when too long to store."""
        limit = max(self.cap or 0, EXPLICIT_WORD_LIMIT)
        if n > limit:
            return None
        return tuple(self.alpha.symbol(i) for i in range(n))


def build_phi2_context(matrix: TransitionMatrix, alpha, cap: int | None = None,
                       gadget: WordPairGadget | None = None,
                       connector: Word | None = None) -> Phi2Context:
    if not isinstance(alpha, PeriodicStream):
        raise PeriodRequiredError("the periodic construction needs a periodic reference sequence")
    word = alpha.word
    if not is_admissible(word, matrix) or matrix.entry(word[-1], word[0]) != 1:
        raise NonAdmissibleGadgetError(f"periodic word {word} is not admissible with its wrap")
    a0 = word[0]
    if gadget is None:
        gadget = find_equal_length_pair(matrix, a0)
    try:
        gadget.check(matrix)
    except ValueError as exc:
        raise NonAdmissibleGadgetError(str(exc)) from exc
    if connector is None:
        connector = find_connector(matrix, a0)
    if matrix.entry(a0, connector[0]) != 1 or matrix.entry(connector[-1], a0) != 1:
        raise NonAdmissibleGadgetError(f"connector {connector} does not glue to symbol {a0}")
    return Phi2Context(matrix, alpha, gadget, connector, cap=cap)


def phi2(param, ctx: Phi2Context, target_len: int | None = None,
         min_indexed: int | None = None) -> Schedule:
    """Block schedule of the periodic construction for one parameter.

    Stage 1 is the lead symbol, the connector, and one parameter block.
    Every later stage g lays down a reference-prefix block of length p
    (p = 2^i times the length so far, i the global counter), completes it
    to a period boundary, appends the connector, then g parameter blocks
    with exponents m = 2^i times the length so far.

    The completion block is dropped exactly when the prefix already ends
    with the lead symbol; otherwise it continues the prefix to the next
    period boundary, so every prefix-plus-completion run is itself a
    prefix of the reference sequence ending at the lead symbol.
    """
    if target_len is None and min_indexed is None:
        raise ValueError("need target_len or min_indexed")
    rule = as_param(param)
    T = ctx.period
    entries: list[ScheduleEntry] = []
    total = 0
    idx = 0
    consumed = 0
    stage = 1

    def append(kind: str, word: Word | None, word_len: int, exponent: int = 1,
               index=None, letter=None, capped: bool = False):
        nonlocal total
        entries.append(ScheduleEntry(
            index=index, stage=stage, kind=kind, word=word, word_len=word_len,
            exponent=exponent, start=total, letter=letter, capped=capped,
        ))
        total += exponent * word_len

    def next_indexed_value() -> tuple[int, int, bool]:
        nonlocal idx
        idx += 1
        true_val = (1 << idx) * total
        capped = ctx.cap is not None and true_val > ctx.cap
        return idx, (ctx.cap if capped else true_val), capped

    def emit_psi():
        nonlocal consumed
        i, m, capped = next_indexed_value()
        letter = rule.letter(consumed)
        consumed += 1
        word = ctx.u if letter == 1 else ctx.v
        append("psi", word, len(word), exponent=m, index=i, letter=letter, capped=capped)

    def finished() -> bool:
        return ((target_len is None or total >= target_len)
                and (min_indexed is None or idx >= min_indexed))

    append("a0", (ctx.a0,), 1)
    append("C", ctx.connector, len(ctx.connector))
    emit_psi()
    while not finished():
        stage += 1
        i, p, capped = next_indexed_value()
        append("B", ctx.alpha_prefix_word(p), p, index=i, capped=capped)
        last = ctx.alpha.symbol(p - 1)
        if last != ctx.a0:
            q = (p - 1) % T
            bbar = tuple(ctx.alpha.symbol(x) for x in range(q + 1, T + 1))
            append("Bbar", bbar, len(bbar))
        append("C", ctx.connector, len(ctx.connector))
        if finished():
            break
        for _ in range(stage):
            emit_psi()
            if finished():
                break

    return Schedule("phi2", entries, a0=ctx.a0, cap=ctx.cap,
                    origin=ctx.alpha.describe(), period=T, gadget_len=ctx.gadget.l)
