"""Acceptance suite: one test per release criterion, each printing a
pass line with its measured runtime.  Every assertion is exact rational
arithmetic at the stated tolerance; nothing is calibrated after the fact.
"""

import random
import time
from fractions import Fraction as F
from itertools import combinations

import pytest

from chaoscert.dfmetrics import (
    FarRegime,
    NearRegime,
    Regime,
    df_seq,
    symbolic_df_bounds,
)
from chaoscert.piecewise import (
    RationalInterval,
    cylinder,
    cylinder_diameters,
    singleton_evidence,
    verify_strict_coupled_expanding,
)
from chaoscert.pipeline import RunConfig, load_bundle, run_df
from chaoscert.scrambled import build_phi1_context, build_phi2_context, p_sequence, phi1, phi2, scrambled_params
from chaoscert.symbolic import PeriodicStream, is_admissible, rho
from chaoscert.transition import (
    count_admissible_words,
    enumerate_admissible_words,
    find_equal_length_pair,
    is_irreducible,
    star_row,
    validate_matrix,
)


@pytest.fixture(scope="module")
def corpus():
    return RunConfig.from_bundle(load_bundle("example32"))


def _report(number: int, started: float, limit: float, detail: str) -> None:
    elapsed = time.monotonic() - started
    assert elapsed < limit, f"criterion {number} exceeded {limit}s ({elapsed:.1f}s)"
    print(f"ACCEPTANCE {number}: PASS in {elapsed:.2f}s ({detail})")


def test_criterion_1_certification(corpus):
    started = time.monotonic()
    matrix = validate_matrix([[0, 1], [1, 1]])
    assert is_irreducible(matrix)
    assert star_row(matrix) == 2
    report = verify_strict_coupled_expanding(corpus.map, corpus.partition, matrix)
    assert report.verdict == "strictly-CE"
    assert report.min_gap == F(1)
    _report(1, started, 1.0, "strictly-CE with exact gap 1")


def test_criterion_2_cylinder_closed_form(corpus):
    started = time.monotonic()
    f, partition, matrix = corpus.map, corpus.partition, corpus.matrix

    # independent route: the two-step branch through (2/3, 1] composes to
    # x -> -9/2 x + 9/2, so each added period pulls back through its inverse
    def contraction_oracle(depth: int) -> RationalInterval:
        iv = RationalInterval(F(0), F(1))
        for _ in range(depth):
            lo = (F(9, 2) - iv.hi) / F(9, 2)
            hi = (F(9, 2) - iv.lo) / F(9, 2)
            iv = RationalInterval(lo, hi)
        return iv

    for k in range(0, 9):
        word = (1, 2) * k + (1,)
        cyl = cylinder(f, partition, word, matrix)
        assert cyl.diameter() == F(2, 9) ** k
        oracle = contraction_oracle(k)
        assert cyl.components == (oracle,)
    _report(2, started, 1.0, "diam equals (2/9)^k for k=0..8 via two routes")


def test_criterion_3_singleton_evidence(corpus):
    started = time.monotonic()
    evidence = singleton_evidence(corpus.map, corpus.partition,
                                  PeriodicStream((1, 2)), F(1, 10**9),
                                  max_depth=40, matrix=corpus.matrix)
    assert evidence.achieved
    steps = (evidence.depth - 1) // 2
    assert steps == 14 and evidence.depth == 29
    # analytic bound: smallest k with (2/9)^k < 10^-9
    analytic = next(k for k in range(1, 40) if F(2, 9) ** k < F(1, 10**9))
    assert analytic == 14
    assert evidence.diameter == F(2, 9) ** 14
    _report(3, started, 1.0, "first depth below 1e-9 is 14 contraction steps (29 symbols)")


def test_criterion_4_word_count_oracle(corpus):
    started = time.monotonic()
    matrix = corpus.matrix
    expected = [2, 3, 5, 8, 13, 21]
    for n, want in enumerate(expected, start=1):
        words = enumerate_admissible_words(matrix, n)
        assert len(words) == want
        assert count_admissible_words(matrix, n) == want
        brute = [w for w in _all_words(2, n)
                 if all(matrix.entry(a, b) == 1 for a, b in zip(w, w[1:]))]
        assert words == brute
    _report(4, started, 1.0, "counts 2,3,5,8,13,21 via enumeration and transfer sums")


def _all_words(m, n):
    from itertools import product
    return list(product(range(1, m + 1), repeat=n))


def _phi1_pair(corpus, cap=None, **kwargs):
    ctx = build_phi1_context(corpus.matrix, PeriodicStream((1, 2)), cap=cap)
    pa, pb = scrambled_params(2, seed=0)
    return ctx, phi1(pa, ctx, **kwargs), phi1(pb, ctx, **kwargs)


def _example_regime(corpus, ctx, schedules, eps=F(1, 10)):
    f, partition = corpus.map, corpus.partition
    words = {e.word for s in schedules for e in s.entries if e.word is not None}
    diams = {w: cylinder(f, partition, w).diameter() for w in words}
    v1, v2 = ctx.gadget.v1, ctx.gadget.v2
    d0 = cylinder(f, partition, v1).gap_to(cylinder(f, partition, v2))
    gaps = {(min(v1, v2), max(v1, v2)): d0}
    prefix_diams = cylinder_diameters(f, partition, PeriodicStream((1, 2)).prefix(24),
                                      corpus.matrix)
    n0 = next(depth for depth, d in enumerate(prefix_diams, start=1) if d < eps)
    return Regime(near=NearRegime(eps=eps, n0=n0, word_diams=diams),
                  far=FarRegime(d0=d0, word_gaps=gaps)), d0


def test_criterion_5_schedule_ratio_bounds(corpus):
    started = time.monotonic()
    ctx, sched_a, sched_b = _phi1_pair(corpus, min_blocks=12)
    regime, _ = _example_regime(corpus, ctx, [sched_a, sched_b])

    bounds = symbolic_df_bounds(sched_a, sched_b, regime, 7)
    s = sched_a.entry_at(7).exponent
    assert bounds.near_bound == F(s, 1) / (F(s, 2**6) + s - 1)
    assert bounds.near_bound > F(984, 1000)
    assert bounds.far_bound == (F(s, 2**6) - 1) / (F(s, 2**6) + s - 1)
    assert bounds.far_bound < F(16, 1000)

    nears, fars = [], []
    for j in range(3, 13):
        b = symbolic_df_bounds(sched_a, sched_b, regime, j)
        nears.append(b.near_bound)
        fars.append(b.far_bound)
    assert all(a < b for a, b in zip(nears, nears[1:]))
    assert all(a > b for a, b in zip(fars, fars[1:]))
    _report(5, started, 10.0,
            f"checkpoint-7 bounds {float(bounds.near_bound):.6f}/{float(bounds.far_bound):.6f}, monotone over j=3..12")


def test_criterion_6_oracle_equivalence(corpus):
    started = time.monotonic()
    f, partition = corpus.map, corpus.partition
    target = 10**6
    ctx, sched_a, sched_b = _phi1_pair(corpus, cap=2**10, target_len=target)
    regime, d0 = _example_regime(corpus, ctx, [sched_a, sched_b])
    eps = regime.near.eps

    expand = min(sched_a.total_length, target + 64)
    sym_a = sched_a.block_sequence().materialize(expand).symbols
    sym_b = sched_b.block_sequence().materialize(expand).symbols
    assert len(sym_a) >= 10**6

    checkpoint = max(e.index for e in sched_a.entries
                     if e.end + e.word_len <= expand)
    symbolic = symbolic_df_bounds(sched_a, sched_b, regime, checkpoint)

    diam_cache = dict(regime.near.word_diams)
    gap_cache = dict(regime.far.word_gaps)

    def diam_of(w):
        if w not in diam_cache:
            diam_cache[w] = cylinder(f, partition, w).diameter()
        return diam_cache[w]

    def gap_of(wa, wb):
        key = (wa, wb) if wa <= wb else (wb, wa)
        if key not in gap_cache:
            gap_cache[key] = cylinder(f, partition, wa).gap_to(
                cylinder(f, partition, wb))
        return gap_cache[key]

    # direct pass over the repetition-start positions, reading raw symbols
    positions = []
    near_direct = far_direct = 0
    certified = []  # distance stand-in per position: diam if shared, gap if split
    near_values = []
    far_values = []
    for entry in sched_a.entries:
        if entry.index is None or entry.index > checkpoint:
            continue
        w = entry.word_len
        for r in range(entry.exponent):
            pos = entry.start + r * w
            positions.append(pos)
            wa = sym_a[pos:pos + w]
            wb = sym_b[pos:pos + w]
            if wa == wb:
                d = diam_of(wa)
                certified.append(d)
                if d < eps:
                    near_direct += 1
                    near_values.append(d)
            else:
                g = gap_of(wa, wb)
                certified.append(g)
                if g >= d0:
                    far_direct += 1
                    far_values.append(g)

    n = symbolic.n_positions
    assert len(positions) == n
    assert positions == p_sequence(sched_a, n)
    assert near_direct == symbolic.near_count
    assert far_direct == symbolic.far_count
    assert df_seq(certified, eps, n) == symbolic.near_ratio
    assert df_seq(near_values, eps, len(near_values)) == F(1)
    assert df_seq(far_values, d0, len(far_values)) == F(0)
    _report(6, started, 60.0,
            f"{n} positions: direct counts {near_direct}/{far_direct} match the closed form")


def test_criterion_7_end_to_end_evidence(corpus):
    started = time.monotonic()
    from dataclasses import replace
    result = run_df(replace(corpus, s_max=2**10), orbit_check_n=512)
    verdict = result.verdict
    assert verdict.kind == "seq-DC"
    assert verdict.witnesses["near_min_value"] >= F(98, 100)
    assert verdict.witnesses["far_value"] <= F(2, 100)
    assert verdict.witnesses["s_witness"] == result.d0 == F(5, 9)
    assert result.orbit_check is not None and result.orbit_check["ok"]
    _report(7, started, 120.0,
            f"seq-DC evidence with witness s = {verdict.witnesses['s_witness']}")


def test_criterion_8_structural_invariants(corpus):
    started = time.monotonic()
    f, partition, matrix = corpus.map, corpus.partition, corpus.matrix

    # cylinder nesting, functoriality, and equal-length disjointness for
    # every admissible word up to length 10
    cyls = {}
    for n in range(1, 11):
        for w in enumerate_admissible_words(matrix, n):
            cyls[w] = cylinder(f, partition, w, matrix)
    for w, cyl in cyls.items():
        assert not cyl.is_empty()
        if len(w) > 1:
            assert cyls[w[:-1]].contains_set(cyl)
            assert f.image(cyl) == cyls[w[1:]]
    for n in range(1, 11):
        level = enumerate_admissible_words(matrix, n)
        for wa, wb in combinations(level, 2):
            assert cyls[wa].intersect(cyls[wb]).is_empty()

    # metric triangle inequality on 10^4 random prefix triples
    rng = random.Random(2024)
    for _ in range(10**4):
        a, b, c = (tuple(rng.choice((1, 2)) for _ in range(64)) for _ in range(3))
        rab, rbc, rac = rho(a, b), rho(b, c), rho(a, c)
        if rab.exact and rbc.exact and rac.exact:
            assert rac.value <= rab.value + rbc.value

    # schedule admissibility and parameter-independent skeletons on 10 pairs
    ctx = build_phi1_context(matrix, PeriodicStream((1, 2)))
    family = scrambled_params(5, seed=0)
    schedules = [phi1(p, ctx, min_blocks=12) for p in family]
    for sched in schedules:
        prefix = sched.block_sequence().materialize(10**4)
        assert is_admissible(prefix, matrix)
    for sa, sb in combinations(schedules, 2):
        assert sa.skeleton() == sb.skeleton()
        assert p_sequence(sa, 200) == p_sequence(sb, 200)

    ctx2 = build_phi2_context(matrix, PeriodicStream((1, 2)), cap=2**10)
    schedules2 = [phi2(p, ctx2, target_len=10**4) for p in family]
    for sched in schedules2:
        prefix = sched.block_sequence().materialize(10**4)
        assert is_admissible(prefix, matrix)
    for sa, sb in combinations(schedules2, 2):
        assert sa.skeleton() == sb.skeleton()
    _report(8, started, 60.0,
            "cylinder laws exhaustive to length 10; metric and schedule invariants hold")
