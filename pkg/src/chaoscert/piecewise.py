"""Exact piecewise-affine maps on unions of compact rational intervals.

Evaluation, images, preimages, the strict coupled-expansion certificate,
and itinerary cylinder sets with their diameters.  All endpoints are
`fractions.Fraction`; no floating point enters any certified quantity.

Images and preimages are computed on piece closures.  For continuous maps
(the bundled corpus is continuous) this is the map itself; for maps with
jumps it is an upper approximation, and the certificate reports the jumps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    EmptyCylinderError,
    NonAdmissibleWordError,
    OutOfDomainError,
)
from .symbolic import SequencePrefix
from .transition import TransitionMatrix, Word


def rational(value) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"refusing inexact value {value!r}; pass int, Fraction or 'p/q' string")


def format_rational(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True)
class RationalInterval:
    """Closed interval [lo, hi]; degenerate (lo == hi) allowed."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def intersect(self, other: "RationalInterval") -> "RationalInterval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return RationalInterval(lo, hi) if lo <= hi else None


class IntervalSet:
    """A finite union of closed rational intervals, kept sorted and merged."""

    __slots__ = ("components",)

    def __init__(self, intervals=()):
        ivs = sorted(
            (iv if isinstance(iv, RationalInterval) else RationalInterval(rational(iv[0]), rational(iv[1]))
             for iv in intervals),
            key=lambda iv: (iv.lo, iv.hi),
        )
        merged: list[RationalInterval] = []
        for iv in ivs:
            if merged and iv.lo <= merged[-1].hi:
                if iv.hi > merged[-1].hi:
                    merged[-1] = RationalInterval(merged[-1].lo, iv.hi)
            else:
                merged.append(iv)
        self.components: tuple[RationalInterval, ...] = tuple(merged)

    @classmethod
    def point(cls, x) -> "IntervalSet":
        x = rational(x)
        return cls([RationalInterval(x, x)])

    @classmethod
    def interval(cls, lo, hi) -> "IntervalSet":
        return cls([RationalInterval(rational(lo), rational(hi))])

    def is_empty(self) -> bool:
        return not self.components

    def hull(self) -> RationalInterval | None:
        if not self.components:
            return None
        return RationalInterval(self.components[0].lo, self.components[-1].hi)

    def diameter(self) -> Fraction:
        """Convex-hull width: equals the metric diameter for intervals and
        upper-bounds it for disconnected sets (safe for shrink evidence)."""
        h = self.hull()
        return h.width if h is not None else Fraction(0)

    def contains_point(self, x: Fraction) -> bool:
        return any(c.contains(x) for c in self.components)

    def contains_set(self, other: "IntervalSet") -> bool:
        """Every component of `other` lies inside some component of self."""
        mine = self.components
        i = 0
        for c in other.components:
            while i < len(mine) and mine[i].hi < c.lo:
                i += 1
            if i == len(mine) or not (mine[i].lo <= c.lo and c.hi <= mine[i].hi):
                return False
        return True

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a in self.components:
            for b in other.components:
                iv = a.intersect(b)
                if iv is not None:
                    out.append(iv)
        return IntervalSet(out)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.components + other.components)

    def gap_to(self, other: "IntervalSet") -> Fraction:
        """Min distance between the two sets; 0 when they meet."""
        if self.is_empty() or other.is_empty():
            raise ValueError("gap between empty sets is undefined")
        best: Fraction | None = None
        for a in self.components:
            for b in other.components:
                d = max(b.lo - a.hi, a.lo - b.hi, Fraction(0))
                if best is None or d < best:
                    best = d
                if best == 0:
                    return Fraction(0)
        return best

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self) -> str:
        parts = ", ".join(f"[{c.lo}, {c.hi}]" for c in self.components)
        return f"IntervalSet({parts})"

    def to_json_obj(self) -> list[list[str]]:
        return [[str(c.lo), str(c.hi)] for c in self.components]


@dataclass(frozen=True)
class AffinePiece:
    """One affine branch on a subinterval, with explicit endpoint ownership."""

    lo: Fraction
    hi: Fraction
    lo_closed: bool
    hi_closed: bool
    slope: Fraction
    intercept: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("piece endpoints out of order")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError("a degenerate piece must own its point")

    def owns(self, x: Fraction) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def closure(self) -> RationalInterval:
        return RationalInterval(self.lo, self.hi)

    def apply(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept

    def image_of(self, iv: RationalInterval) -> RationalInterval:
        """Image of a subinterval of the closure under the branch."""
        a = self.apply(iv.lo)
        b = self.apply(iv.hi)
        return RationalInterval(min(a, b), max(a, b))

    def preimage_of(self, target: RationalInterval) -> RationalInterval | None:
        """Solutions of slope*x + intercept in target, within the closure."""
        if self.slope == 0:
            return self.closure() if target.contains(self.intercept) else None
        a = (target.lo - self.intercept) / self.slope
        b = (target.hi - self.intercept) / self.slope
        sol = RationalInterval(min(a, b), max(a, b))
        return sol.intersect(self.closure())


class PiecewiseAffineMap:
    """An ordered list of affine pieces forming a function on their union."""

    def __init__(self, pieces):
        pieces = tuple(pieces)
        if not pieces:
            raise ValueError("need at least one piece")
        ordered = sorted(pieces, key=lambda p: (p.lo, p.hi))
        for left, right in zip(ordered, ordered[1:]):
            if right.lo < left.hi:
                raise ValueError(f"pieces overlap near x={right.lo}")
            if right.lo == left.hi and left.hi_closed == right.lo_closed:
                owner = "both pieces" if left.hi_closed else "no piece"
                raise ValueError(f"boundary x={right.lo} owned by {owner}")
        self.pieces: tuple[AffinePiece, ...] = tuple(ordered)

    def domain(self) -> IntervalSet:
        return IntervalSet(p.closure() for p in self.pieces)

    def eval(self, x) -> Fraction:
        x = rational(x)
        for p in self.pieces:
            if p.owns(x):
                return p.apply(x)
        raise OutOfDomainError(f"x = {x} is not in the map domain")

    def image(self, s: IntervalSet) -> IntervalSet:
        """Exact image of a set, computed piecewise on closures."""
        if not self.domain().contains_set(s):
            raise OutOfDomainError("image argument leaves the map domain")
        out = []
        for p in self.pieces:
            cl = p.closure()
            for comp in s.components:
                iv = cl.intersect(comp)
                if iv is not None:
                    out.append(p.image_of(iv))
        return IntervalSet(out)

    def preimage_in(self, target: IntervalSet, within: IntervalSet) -> IntervalSet:
        """Exact {x in within : f(x) in target} (closure semantics)."""
        out = []
        for p in self.pieces:
            for t in target.components:
                sol = p.preimage_of(t)
                if sol is None:
                    continue
                for w in within.components:
                    iv = sol.intersect(w)
                    if iv is not None:
                        out.append(iv)
        return IntervalSet(out)

    def continuity_jumps(self) -> tuple[tuple[Fraction, Fraction, Fraction], ...]:
        """Boundary points where touching pieces disagree: (x, left, right)."""
        jumps = []
        for left, right in zip(self.pieces, self.pieces[1:]):
            if left.hi == right.lo:
                a = left.apply(left.hi)
                b = right.apply(right.lo)
                if a != b:
                    jumps.append((left.hi, a, b))
        return tuple(jumps)

    @classmethod
    def from_config(cls, config: dict) -> "PiecewiseAffineMap":
        pieces = [
            AffinePiece(
                lo=rational(item["lo"]),
                hi=rational(item["hi"]),
                lo_closed=bool(item.get("lo_closed", True)),
                hi_closed=bool(item.get("hi_closed", True)),
                slope=rational(item["slope"]),
                intercept=rational(item["intercept"]),
            )
            for item in config["pieces"]
        ]
        return cls(pieces)

    def to_config(self) -> dict:
        dom = self.domain().hull()
        return {
            "domain": [str(dom.lo), str(dom.hi)],
            "pieces": [
                {
                    "lo": str(p.lo),
                    "hi": str(p.hi),
                    "lo_closed": p.lo_closed,
                    "hi_closed": p.hi_closed,
                    "slope": str(p.slope),
                    "intercept": str(p.intercept),
                }
                for p in self.pieces
            ],
        }


class Partition:
    """Labeled compact pieces V_1..V_m with pairwise disjoint interiors."""

    def __init__(self, parts: dict):
        items = {}
        for label, value in parts.items():
            label = int(label)
            items[label] = value if isinstance(value, IntervalSet) else IntervalSet([value])
        self.parts: dict[int, IntervalSet] = dict(sorted(items.items()))
        if any(v.is_empty() for v in self.parts.values()):
            raise ValueError("partition pieces must be nonempty")

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(self.parts)

    def piece(self, label: int) -> IntervalSet:
        return self.parts[label]

    def union_set(self) -> IntervalSet:
        out = IntervalSet([])
        for v in self.parts.values():
            out = out.union(v)
        return out

    def pairwise_gaps(self) -> dict[tuple[int, int], Fraction]:
        labels = self.labels
        return {
            (i, j): self.parts[i].gap_to(self.parts[j])
            for a, i in enumerate(labels)
            for j in labels[a + 1:]
        }

    def interiors_disjoint(self) -> tuple[bool, list[tuple[int, int]]]:
        """Interiors are disjoint iff every pairwise intersection is a
        finite set of points (all overlap components degenerate)."""
        bad = []
        labels = self.labels
        for a, i in enumerate(labels):
            for j in labels[a + 1:]:
                inter = self.parts[i].intersect(self.parts[j])
                if any(c.width > 0 for c in inter.components):
                    bad.append((i, j))
        return (not bad, bad)

    @classmethod
    def from_config(cls, config: dict) -> "Partition":
        return cls({
            int(label): IntervalSet([(rational(lo), rational(hi))])
            for label, (lo, hi) in config.items()
        })

    def to_config(self) -> dict:
        return {str(k): [str(v.hull().lo), str(v.hull().hi)] for k, v in self.parts.items()}


@dataclass(frozen=True)
class RowCheck:
    symbol: int
    required: IntervalSet
    image: IntervalSet
    ok: bool


@dataclass(frozen=True)
class CertificateReport:
    """Everything the coupled-expansion verdict rests on, exact."""

    rows: tuple[RowCheck, ...]
    gaps: dict
    min_gap: Fraction
    interiors_disjoint: bool
    overlapping_pairs: tuple
    domain_covers_partition: bool
    continuity_jumps: tuple
    verdict: str  # not-CE | CE | strictly-CE
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.verdict == "strictly-CE"


def verify_strict_coupled_expanding(
    f: PiecewiseAffineMap, partition: Partition, matrix: TransitionMatrix
) -> CertificateReport:
    """Check, row by row, image(V_i) covers the union of V_j allowed by
    row i, plus interior disjointness and the pairwise gap matrix.

    Failures land in the report; nothing raises.
    """
    failures: list[str] = []
    labels = partition.labels
    if set(labels) != set(matrix.symbols()):
        failures.append(
            f"partition labels {labels} do not match matrix symbols 1..{matrix.m}"
        )

    covers = f.domain().contains_set(partition.union_set())
    if not covers:
        failures.append("partition is not contained in the map domain")

    valid = set(matrix.symbols())
    rows = []
    for i in labels:
        required = IntervalSet([])
        for j in labels:
            if i in valid and j in valid and matrix.entry(i, j) == 1:
                required = required.union(partition.piece(j))
        try:
            img = f.image(partition.piece(i))
        except OutOfDomainError:
            rows.append(RowCheck(i, required, IntervalSet([]), False))
            failures.append(f"row {i} inclusion fails")
            continue
        ok = img.contains_set(required)
        rows.append(RowCheck(i, required, img, ok))
        if not ok:
            failures.append(f"row {i} inclusion fails")

    disjoint, bad_pairs = partition.interiors_disjoint()
    for i, j in bad_pairs:
        failures.append(f"interiors of V_{i} and V_{j} overlap")

    gaps = partition.pairwise_gaps()
    min_gap = min(gaps.values()) if gaps else Fraction(0)

    ce = disjoint and covers and all(r.ok for r in rows) and not any(
        msg.startswith("partition labels") for msg in failures
    )
    if ce and min_gap > 0:
        verdict = "strictly-CE"
    elif ce:
        verdict = "CE"
        failures.append("pairwise gap is 0 (not strict)")
    else:
        verdict = "not-CE"

    return CertificateReport(
        rows=tuple(rows),
        gaps=gaps,
        min_gap=min_gap,
        interiors_disjoint=disjoint,
        overlapping_pairs=tuple(bad_pairs),
        domain_covers_partition=covers,
        continuity_jumps=f.continuity_jumps(),
        verdict=verdict,
        failures=tuple(failures),
    )


def cylinder(
    f: PiecewiseAffineMap,
    partition: Partition,
    word: Word,
    matrix: TransitionMatrix | None = None,
) -> IntervalSet:
    """The set of points whose first len(word) iterates visit the named
    partition pieces: intersection of pulled-back pieces, computed by
    exact preimages from the tail.
    """
    word = tuple(word)
    if not word:
        raise NonAdmissibleWordError("empty word")
    for s in word:
        if s not in partition.parts:
            raise NonAdmissibleWordError(f"symbol {s} has no partition piece")
    if matrix is not None:
        for x, y in zip(word, word[1:]):
            if matrix.entry(x, y) != 1:
                raise NonAdmissibleWordError(f"transition {x}->{y} not allowed")
    current = partition.piece(word[-1])
    for s in reversed(word[:-1]):
        current = f.preimage_in(current, partition.piece(s))
    if current.is_empty():
        raise EmptyCylinderError(
            f"cylinder for word {word} is empty; a coupled-expansion hypothesis is violated"
        )
    return current


def cylinder_diameters(
    f: PiecewiseAffineMap,
    partition: Partition,
    prefix,
    matrix: TransitionMatrix | None = None,
) -> list[Fraction]:
    """Diameters of the nested cylinders for every prefix depth 1..len."""
    symbols = prefix.symbols if isinstance(prefix, SequencePrefix) else tuple(prefix)
    return [
        cylinder(f, partition, symbols[:depth], matrix).diameter()
        for depth in range(1, len(symbols) + 1)
    ]


@dataclass(frozen=True)
class SingletonEvidence:
    """Finite-depth evidence that a nested cylinder family shrinks to a point."""

    achieved: bool
    depth: int | None
    diameter: Fraction | None
    tau: Fraction


def singleton_evidence(
    f: PiecewiseAffineMap,
    partition: Partition,
    stream,
    tau,
    max_depth: int = 256,
    matrix: TransitionMatrix | None = None,
) -> SingletonEvidence:
    """First prefix depth whose cylinder diameter drops below tau."""
    tau = rational(tau)
    prefix = stream.prefix(max_depth)
    last = None
    for depth in range(1, max_depth + 1):
        cyl = cylinder(f, partition, prefix.symbols[:depth], matrix)
        last = cyl.diameter()
        if last < tau:
            return SingletonEvidence(True, depth, last, tau)
    return SingletonEvidence(False, None, last, tau)


def alpha_window_diameters(
    f: PiecewiseAffineMap,
    partition: Partition,
    period_word: Word,
    k: int,
    matrix: TransitionMatrix | None = None,
) -> Fraction:
    """Worst cylinder diameter over all phase windows of k+1 symbols cut
    from the periodic sequence (word word ...)."""
    word = tuple(period_word)
    t = len(word)
    worst = Fraction(0)
    for phase in range(t):
        window = tuple(word[(phase + i) % t] for i in range(k + 1))
        d = cylinder(f, partition, window, matrix).diameter()
        if d > worst:
            worst = d
    return worst


def pick_representative(
    f: PiecewiseAffineMap,
    partition: Partition,
    prefix,
    depth: int,
    matrix: TransitionMatrix | None = None,
) -> Fraction:
    """Deterministic point inside the depth-cylinder: hull midpoint, or the
    midpoint of the widest (then leftmost) component when the hull midpoint
    falls in a gap of a disconnected cylinder."""
    symbols = prefix.symbols if isinstance(prefix, SequencePrefix) else tuple(prefix)
    if depth < 1 or depth > len(symbols):
        raise ValueError(f"depth {depth} outside 1..{len(symbols)}")
    cyl = cylinder(f, partition, symbols[:depth], matrix)
    hull = cyl.hull()
    mid = (hull.lo + hull.hi) / 2
    if cyl.contains_point(mid):
        return mid
    widest = max(cyl.components, key=lambda c: (c.width, -c.lo))
    return (widest.lo + widest.hi) / 2


def min_pairwise_cylinder_gap(
    f: PiecewiseAffineMap,
    partition: Partition,
    words,
    matrix: TransitionMatrix | None = None,
) -> Fraction:
    """Smallest distance between cylinders of distinct words in `words`."""
    words = [tuple(w) for w in words]
    cyls = [cylinder(f, partition, w, matrix) for w in words]
    best: Fraction | None = None
    for a in range(len(words)):
        for b in range(a + 1, len(words)):
            d = cyls[a].gap_to(cyls[b])
            if best is None or d < best:
                best = d
    if best is None:
        raise ValueError("need at least two words")
    return best
