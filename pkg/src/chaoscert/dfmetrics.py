"""Distribution functions over orbit pairs, and closed-form near/far
counting over block schedules.

Empirical distribution values are exact rational counts of iteration
times at which two orbits are strictly closer than a threshold.  The
closed-form side classifies whole schedule blocks as certified-near
(both sequences share the block and its repeated word has a small enough
cylinder) or certified-far (the blocks repeat different words whose
cylinders are separated), and turns block exponents into position counts
without ever expanding symbols.

Limits are never asserted: every report is finite-checkpoint evidence
with explicit thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import OrbitEscapedDomainError, OutOfDomainError, SkeletonMismatchError
from .piecewise import PiecewiseAffineMap, rational
from .scrambled import Schedule, ScheduleEntry


def orbit(f: PiecewiseAffineMap, x, n: int) -> list[Fraction]:
    """[x, f(x), ..., f^(n-1)(x)], exact; reports the first escaping step."""
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    x = rational(x)
    out = [x]
    for i in range(1, n):
        try:
            x = f.eval(x)
        except OutOfDomainError as exc:
            raise OrbitEscapedDomainError(f"orbit left the domain at step {i}: {exc}", i) from exc
        out.append(x)
    return out


@dataclass(frozen=True)
class OrbitPair:
    """Two exact orbits and their pointwise distances."""

    x: Fraction
    y: Fraction
    distances: tuple[Fraction, ...]

    @classmethod
    def from_map(cls, f: PiecewiseAffineMap, x, y, n: int) -> "OrbitPair":
        ox = orbit(f, x, n)
        oy = orbit(f, y, n)
        return cls(rational(x), rational(y), tuple(abs(a - b) for a, b in zip(ox, oy)))


def _distances(pair_or_values) -> tuple[Fraction, ...]:
    if isinstance(pair_or_values, OrbitPair):
        return pair_or_values.distances
    return tuple(pair_or_values)


def df_n(pair_or_values, t, n: int) -> Fraction:
    """Fraction of the first n iteration times with distance strictly < t."""
    values = _distances(pair_or_values)
    t = rational(t)
    if n < 1 or n > len(values):
        raise ValueError(f"need 1 <= n <= {len(values)}, got {n}")
    return Fraction(sum(1 for d in values[:n] if d < t), n)


def df_seq(values_at_positions, t, n: int) -> Fraction:
    """Same strict counting, over distances sampled at prescribed
    positions (the repetition-start sequence of a schedule)."""
    return df_n(values_at_positions, t, n)


@dataclass(frozen=True)
class DFCurve:
    """Distribution values on a grid: one row per checkpoint, one column
    per threshold; values must be nondecreasing along the threshold axis."""

    position_space: str  # "sequence" | "orbit"
    checkpoints: tuple[tuple[int, int], ...]  # (block index label, position count n)
    t_grid: tuple[Fraction, ...]
    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.values) != len(self.checkpoints):
            raise ValueError("one row per checkpoint required")
        for row in self.values:
            if len(row) != len(self.t_grid):
                raise ValueError("one value per grid threshold required")
            for a, b in zip(row, row[1:]):
                if b < a:
                    raise ValueError("distribution values must be nondecreasing in t")
            for v in row:
                if v < 0 or v > 1:
                    raise ValueError("distribution values live in [0,1]")

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.values[i]

    def to_csv_rows(self) -> list[tuple[str, str, str]]:
        out = []
        for (label, n), row in zip(self.checkpoints, self.values):
            for t, v in zip(self.t_grid, row):
                out.append((str(n), str(t), str(v)))
        return out


def empirical_curve(distances, checkpoints, t_grid, position_space: str = "orbit") -> DFCurve:
    """DFCurve of direct strict counts at the given (label, n) checkpoints."""
    values = tuple(
        tuple(df_n(distances, t, n) for t in t_grid)
        for _, n in checkpoints
    )
    return DFCurve(position_space, tuple(checkpoints), tuple(rational(t) for t in t_grid), values)


# ---------------------------------------------------------------------------
# regimes and closed-form counting


@dataclass(frozen=True)
class NearRegime:
    """Threshold eps plus the word geometry that certifies closeness:
    cylinder diameters per repeated word, and (for reference-prefix words)
    the first prefix length whose cylinder drops below eps."""

    eps: Fraction
    n0: int | None = None
    word_diams: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FarRegime:
    """Threshold d0 plus separation data: exact gaps for specific word
    pairs, and optionally a single lower bound on the gap between any two
    distinct equal-length admissible words (used to certify every window
    offset inside opposing runs)."""

    d0: Fraction
    word_gaps: dict = field(default_factory=dict)
    all_pairs_min_gap: Fraction | None = None


@dataclass(frozen=True)
class Regime:
    near: NearRegime
    far: FarRegime
    window_k: int | None = None  # periodic construction: windows of k+1 symbols


def _pair_key(wa, wb):
    return (wa, wb) if wa <= wb else (wb, wa)


def _entry_pairs(sched_a: Schedule, sched_b: Schedule):
    return list(zip(sched_a.entries, sched_b.entries))


def _check_skeletons(sched_a: Schedule, sched_b: Schedule) -> None:
    if sched_a.construction != sched_b.construction:
        raise SkeletonMismatchError("schedules come from different constructions")
    if sched_a.skeleton() != sched_b.skeleton():
        raise SkeletonMismatchError("schedules do not share a block skeleton")


def _is_shared(ea: ScheduleEntry, eb: ScheduleEntry) -> bool:
    if ea.kind in ("v", "psi"):
        return ea.letter == eb.letter
    return True  # u, B, Bbar, C, a0 blocks never depend on the parameter


def _near_block(ea: ScheduleEntry, eb: ScheduleEntry, near: NearRegime) -> bool:
    if not _is_shared(ea, eb):
        return False
    if ea.word is not None and ea.word in near.word_diams:
        return near.word_diams[ea.word] < near.eps
    if ea.kind == "u" and near.n0 is not None:
        return ea.word_len >= near.n0
    return False


def _far_block(ea: ScheduleEntry, eb: ScheduleEntry, far: FarRegime) -> bool:
    if ea.kind not in ("v", "psi") or ea.letter == eb.letter:
        return False
    if ea.word is None or eb.word is None:
        return False
    gap = far.word_gaps.get(_pair_key(ea.word, eb.word))
    if gap is None and far.all_pairs_min_gap is not None:
        gap = far.all_pairs_min_gap
    return gap is not None and gap >= far.d0


@dataclass(frozen=True)
class SymbolicBounds:
    """Counts and ratio bounds at one schedule checkpoint.

    `near_count` positions are certified closer than eps, `far_count`
    certified at least d0 apart; `near_ratio` / `far_ratio` are the exact
    certified count ratios, while `near_bound` / `far_bound` are the
    closed-form single-block ratios (the quantities whose monotone march
    toward 1 and 0 the construction is designed around).
    """

    checkpoint: int
    kind: str
    position_space: str
    n_positions: int
    near_count: int
    far_count: int
    near_ratio: Fraction
    far_ratio: Fraction
    near_bound: Fraction | None
    far_bound: Fraction | None


def symbolic_df_bounds(sched_a: Schedule, sched_b: Schedule, regime: Regime,
                       checkpoint: int) -> SymbolicBounds:
    """Closed-form near/far counting at a block checkpoint, never
    materializing symbols.

    For the sequence construction, positions are repetition starts and the
    checkpoint is a global block index j: n is the number of positions in
    blocks 1..j.  For the periodic construction, positions are plain
    iteration times; a prefix-block checkpoint counts up to the end of its
    period-completion run, a parameter-block checkpoint up to the end of
    that run.
    """
    _check_skeletons(sched_a, sched_b)
    if sched_a.construction == "phi1":
        return _bounds_phi1(sched_a, sched_b, regime, checkpoint)
    return _bounds_phi2(sched_a, sched_b, regime, checkpoint)


def _bounds_phi1(sched_a: Schedule, sched_b: Schedule, regime: Regime, j: int) -> SymbolicBounds:
    pairs = [(ea, eb) for ea, eb in _entry_pairs(sched_a, sched_b)
             if ea.index is not None and ea.index <= j]
    if not pairs or pairs[-1][0].index != j:
        raise KeyError(f"schedule has no block with index {j}")
    n = sum(ea.exponent for ea, _ in pairs)
    near = sum(ea.exponent for ea, eb in pairs if _near_block(ea, eb, regime.near))
    far = sum(ea.exponent for ea, eb in pairs if _far_block(ea, eb, regime.far))

    ej = pairs[-1][0]
    s = ej.exponent
    k_j = n - s + 1
    base = max(ej.start, k_j)  # start >= k_j whenever words have length >= 2
    near_bound = Fraction(s, base + s - 1)
    far_bound = Fraction(base - 1, base + s - 1)
    return SymbolicBounds(
        checkpoint=j, kind=ej.kind, position_space="sequence",
        n_positions=n, near_count=near, far_count=far,
        near_ratio=Fraction(near, n), far_ratio=Fraction(n - far, n),
        near_bound=near_bound, far_bound=far_bound,
    )


def _alpha_runs(sched: Schedule):
    """Maximal runs of reference-sequence content: the lead symbol, and
    each prefix block merged with its period-completion block."""
    runs = []
    entries = sched.entries
    i = 0
    while i < len(entries):
        e = entries[i]
        if e.kind == "a0":
            runs.append((e.start, e.word_len, None))
            i += 1
        elif e.kind == "B":
            length = e.word_len
            if i + 1 < len(entries) and entries[i + 1].kind == "Bbar":
                length += entries[i + 1].word_len
                i += 1
            runs.append((e.start, length, e.index))
            i += 1
        else:
            i += 1
    return runs


def _bounds_phi2(sched_a: Schedule, sched_b: Schedule, regime: Regime, j: int) -> SymbolicBounds:
    ej = sched_a.entry_at(j)
    if ej.kind not in ("B", "psi"):
        raise KeyError(f"block {j} is a {ej.kind} block; checkpoints sit on B or psi blocks")
    T = sched_a.period
    l = sched_a.gadget_len
    k = regime.window_k
    if k is None or k < 1:
        raise ValueError("the periodic construction needs window_k >= 1 in the regime")

    runs = _alpha_runs(sched_a)
    if ej.kind == "B":
        run_len = next(length for start, length, idx in runs if idx == j)
        n = ej.start + run_len - 1  # index of the run's closing lead symbol
    else:
        n = ej.end

    near = 0
    for start, length, _idx in runs:
        if start + length - 1 <= n and length > k:
            near += length - k

    far = 0
    for ea, eb in _entry_pairs(sched_a, sched_b):
        if ea.kind != "psi" or ea.letter == eb.letter or ea.end > n:
            continue
        if ea.word is None or eb.word is None:
            continue
        if regime.far.all_pairs_min_gap is not None and regime.far.all_pairs_min_gap >= regime.far.d0:
            far += ea.length - l + 1  # every window offset inside the run
        else:
            gap = regime.far.word_gaps.get(_pair_key(ea.word, eb.word))
            if gap is not None and gap >= regime.far.d0:
                far += ea.exponent  # repetition starts only

    if ej.kind == "B":
        p = ej.word_len
        near_bound = Fraction(p - k, p + ej.start + T) if p > k else Fraction(0)
        far_bound = None
    else:
        m = ej.exponent
        near_bound = None
        far_bound = Fraction(ej.start + l - 1, ej.start + m * l)

    return SymbolicBounds(
        checkpoint=j, kind=ej.kind, position_space="orbit",
        n_positions=n, near_count=near, far_count=far,
        near_ratio=Fraction(near, n), far_ratio=Fraction(n - far, n),
        near_bound=near_bound, far_bound=far_bound,
    )


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Thresholds:
    hi: Fraction = Fraction(98, 100)
    lo: Fraction = Fraction(2, 100)

    def __post_init__(self):
        if not (0 < self.lo < self.hi < 1):
            raise ValueError("need 0 < lo < hi < 1")


@dataclass(frozen=True)
class PairVerdict:
    """Finite-checkpoint evidence class for one pair, with witnesses."""

    kind: str  # seq-DC | D1 | D2 | D3 | none
    witnesses: dict
    thresholds: Thresholds


def classify_pair(near_curve: DFCurve, far_curve: DFCurve,
                  thresholds: Thresholds | None = None) -> PairVerdict:
    """Evidence verdict from a lower-evidence curve (near) and an
    upper-evidence curve (far).

    Full evidence needs one checkpoint whose near values clear `hi` at
    every grid threshold, and one far value at a positive threshold not
    exceeding `lo`; it is labeled for the curve's position space
    (seq-DC along a prescribed sequence, D1 for plain iteration times).
    Weaker strict-separation evidence yields D2/D3 on finite-n proxies.
    """
    th = thresholds or Thresholds()
    witnesses: dict = {}

    near_hit = None
    for i, (label, n) in enumerate(near_curve.checkpoints):
        row = near_curve.row(i)
        if min(row) >= th.hi:
            near_hit = (label, n, min(row))
            break
    if near_hit:
        witnesses["near_checkpoint"] = near_hit[0]
        witnesses["near_n"] = near_hit[1]
        witnesses["near_min_value"] = near_hit[2]

    far_hit = None
    for i, (label, n) in enumerate(far_curve.checkpoints):
        row = far_curve.row(i)
        for s, v in sorted(zip(far_curve.t_grid, row), reverse=True):
            if s > 0 and v <= th.lo:
                far_hit = (label, n, s, v)
                break
        if far_hit:
            break
    if far_hit:
        witnesses["far_checkpoint"] = far_hit[0]
        witnesses["far_n"] = far_hit[1]
        witnesses["s_witness"] = far_hit[2]
        witnesses["far_value"] = far_hit[3]

    if near_hit and far_hit:
        kind = "seq-DC" if near_curve.position_space == "sequence" else "D1"
        return PairVerdict(kind, witnesses, th)

    # strict-separation proxies: best lower evidence above best upper evidence
    margin = th.hi - th.lo
    separation = None
    for col, t in enumerate(near_curve.t_grid):
        if t not in far_curve.t_grid:
            continue
        fcol = far_curve.t_grid.index(t)
        best_near = max(row[col] for row in near_curve.values)
        best_far = min(row[fcol] for row in far_curve.values)
        if best_far <= best_near - margin:
            separation = (t, best_near, best_far)
            break
    if separation:
        witnesses["separation_t"] = separation[0]
        witnesses["separation_near"] = separation[1]
        witnesses["separation_far"] = separation[2]
        return PairVerdict("D2" if near_hit else "D3", witnesses, th)

    return PairVerdict("none", witnesses, th)


# ---------------------------------------------------------------------------
# window-based direct classification (the oracle the symbolic counts face)


def classify_window(sym_a, sym_b, pos: int, window_len: int,
                    diam_of, gap_of, eps: Fraction, d0: Fraction) -> str | None:
    """Classify one position from raw symbols: 'near' when both sequences
    share the window and its cylinder is thinner than eps, 'far' when the
    windows differ and their cylinders sit at least d0 apart, else None."""
    wa = tuple(sym_a[pos:pos + window_len])
    wb = tuple(sym_b[pos:pos + window_len])
    if len(wa) < window_len or len(wb) < window_len:
        return None
    if wa == wb:
        d = diam_of(wa)
        return "near" if d is not None and d < eps else None
    g = gap_of(wa, wb)
    return "far" if g is not None and g >= d0 else None
