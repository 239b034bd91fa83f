from fractions import Fraction as F

import pytest

from chaoscert.dfmetrics import (
    DFCurve,
    FarRegime,
    NearRegime,
    OrbitPair,
    Regime,
    Thresholds,
    classify_pair,
    classify_window,
    df_n,
    df_seq,
    empirical_curve,
    orbit,
    symbolic_df_bounds,
)
from chaoscert.errors import OrbitEscapedDomainError, SkeletonMismatchError
from chaoscert.piecewise import AffinePiece, PiecewiseAffineMap, cylinder
from chaoscert.scrambled import (
    FiniteParam,
    build_phi1_context,
    build_phi2_context,
    phi1,
    phi2,
)
from chaoscert.symbolic import PeriodicStream


class TestOrbit:
    def test_example_orbit(self, fmap):
        assert orbit(fmap, F(5, 2), 3) == [F(5, 2), F(3, 2), F(3)]

    def test_fixed_point(self, fmap):
        assert orbit(fmap, F(9, 4), 4) == [F(9, 4)] * 4

    def test_length_one(self, fmap):
        assert orbit(fmap, F(1, 3), 1) == [F(1, 3)]

    def test_escape_reported(self):
        doubling = PiecewiseAffineMap([AffinePiece(F(0), F(1), True, True, F(2), F(0))])
        with pytest.raises(OrbitEscapedDomainError) as err:
            orbit(doubling, F(7, 8), 4)
        assert err.value.index == 2  # 7/8 -> 7/4 leaves [0,1] on the second step


class TestDfCounting:
    def test_identical_points(self, fmap):
        pair = OrbitPair.from_map(fmap, F(1, 3), F(1, 3), 5)
        for t in (F(1, 100), F(1), F(10)):
            assert df_n(pair, t, 5) == 1

    def test_all_far(self):
        assert df_n([F(2), F(2), F(2)], F(1), 3) == 0

    def test_alternating(self):
        assert df_n([F(0), F(3), F(0), F(3)], F(1), 4) == F(1, 2)

    def test_strict_inequality(self):
        assert df_n([F(1)], F(1), 1) == 0

    def test_monotone_in_t_and_saturates(self):
        values = [F(1), F(3), F(1, 2)]
        results = [df_n(values, t, 3) for t in (F(1, 4), F(1), F(2), F(5))]
        assert results == sorted(results)
        assert df_n(values, F(3) + 1, 3) == 1

    def test_df_seq_single_position(self):
        assert df_seq([F(1, 100)], F(1), 1) == 1


@pytest.fixture(scope="module")
def phi1_setup(matrix, fmap, partition):
    ctx = build_phi1_context(matrix, PeriodicStream((1, 2)))
    sched_a = phi1(FiniteParam((2, 2, 1, 2, 1, 2, 2, 2, 2, 2)), ctx, min_blocks=12)
    sched_b = phi1(FiniteParam((1, 1, 1, 1, 1, 1, 1, 1, 1, 1)), ctx, min_blocks=12)
    v1, v2 = ctx.gadget.v1, ctx.gadget.v2
    words = [v1, v2] + [ctx.u_word(k) for k in (1, 2, 3)]
    diams = {w: cylinder(fmap, partition, w).diameter() for w in words}
    d0 = cylinder(fmap, partition, v1).gap_to(cylinder(fmap, partition, v2))
    gaps = {(min(v1, v2), max(v1, v2)): d0}
    regime = Regime(near=NearRegime(eps=F(1, 10), n0=5, word_diams=diams),
                    far=FarRegime(d0=d0, word_gaps=gaps))
    return ctx, sched_a, sched_b, regime, d0


class TestSymbolicBoundsPhi1:
    def test_paper_ratio_at_checkpoint_seven(self, phi1_setup):
        _, sa, sb, regime, _ = phi1_setup
        b = symbolic_df_bounds(sa, sb, regime, 7)
        s = sa.entry_at(7).exponent
        assert b.near_bound == F(s, 1) / (F(s, 2**6) + s - 1)
        assert b.far_bound == (F(s, 2**6) - 1) / (F(s, 2**6) + s - 1)
        assert b.near_bound > F(984, 1000)
        assert b.far_bound < F(16, 1000)

    def test_counts_are_block_sums(self, phi1_setup):
        _, sa, sb, regime, _ = phi1_setup
        b = symbolic_df_bounds(sa, sb, regime, 12)
        # near blocks at eps=1/10: u_3 (diam 4/81) and any letter-agreeing
        # v2 blocks (diam 2/27); u_1, u_2, v1 cylinders are too wide
        expected_near = 0
        expected_far = 0
        for ea, eb in zip(sa.entries, sb.entries):
            if ea.kind == "u" and ea.u_index == 3:
                expected_near += ea.exponent
            if ea.kind == "v" and ea.letter == eb.letter == 2:
                expected_near += ea.exponent
            if ea.kind == "v" and ea.letter != eb.letter:
                expected_far += ea.exponent
        assert b.near_count == expected_near
        assert b.far_count == expected_far
        assert b.n_positions == sum(e.exponent for e in sa.entries)

    def test_bounds_march_monotonically(self, phi1_setup):
        _, sa, sb, regime, _ = phi1_setup
        nears = []
        fars = []
        for j in range(3, 13):
            b = symbolic_df_bounds(sa, sb, regime, j)
            nears.append(b.near_bound)
            fars.append(b.far_bound)
        assert all(a < b for a, b in zip(nears, nears[1:]))
        assert all(a > b for a, b in zip(fars, fars[1:]))

    def test_skeleton_mismatch(self, phi1_setup):
        ctx, sa, _, regime, _ = phi1_setup
        shorter = phi1(FiniteParam((1,) * 10), ctx, min_blocks=10)
        with pytest.raises(SkeletonMismatchError):
            symbolic_df_bounds(sa, shorter, regime, 7)

    def test_missing_checkpoint(self, phi1_setup):
        _, sa, sb, regime, _ = phi1_setup
        with pytest.raises(KeyError):
            symbolic_df_bounds(sa, sb, regime, 99)


@pytest.fixture(scope="module")
def phi2_setup(matrix, fmap, partition):
    ctx = build_phi2_context(matrix, PeriodicStream((1, 2)))
    sa = phi2(FiniteParam((2, 2, 1, 2, 1, 1, 2, 2, 1, 2, 1, 2, 2, 2, 1)), ctx, min_indexed=14)
    sb = phi2(FiniteParam((1,) * 15), ctx, min_indexed=14)
    words = [ctx.u, ctx.v]
    diams = {w: cylinder(fmap, partition, w).diameter() for w in words}
    gap = cylinder(fmap, partition, ctx.u).gap_to(cylinder(fmap, partition, ctx.v))
    regime = Regime(near=NearRegime(eps=F(1, 10), word_diams=diams),
                    far=FarRegime(d0=gap / 2, word_gaps={}, all_pairs_min_gap=gap),
                    window_k=4)
    return ctx, sa, sb, regime


class TestSymbolicBoundsPhi2:

    def test_prefix_checkpoint_bound(self, phi2_setup):
        ctx, sa, sb, regime = phi2_setup
        b = symbolic_df_bounds(sa, sb, regime, 5)  # second prefix block
        e = sa.entry_at(5)
        p, k = e.word_len, 4
        assert b.kind == "B"
        assert b.near_bound == F(p - k, p + e.start + 2)
        assert b.near_ratio >= b.near_bound

    def test_parameter_checkpoint_bound(self, phi2_setup):
        ctx, sa, sb, regime = phi2_setup
        b = symbolic_df_bounds(sa, sb, regime, 6)
        e = sa.entry_at(6)
        m, l = e.exponent, 4
        assert b.kind == "psi"
        assert b.far_bound == F(e.start + l - 1, e.start + m * l)
        assert b.far_ratio <= F(e.start + l - 1, b.n_positions) + F(1, b.n_positions)

    def test_bound_trends(self, phi2_setup):
        _, sa, sb, regime = phi2_setup
        b_checkpoints = [e.index for e in sa.entries if e.kind == "B"]
        psi_checkpoints = [e.index for e in sa.entries if e.kind == "psi"]
        nears = [symbolic_df_bounds(sa, sb, regime, j).near_bound for j in b_checkpoints]
        fars = [symbolic_df_bounds(sa, sb, regime, j).far_bound for j in psi_checkpoints]
        assert all(a < b for a, b in zip(nears, nears[1:]))
        assert all(a > b for a, b in zip(fars, fars[1:]))
        assert nears[-1] > F(99, 100)
        assert fars[-1] < F(1, 100)

    def test_counts_match_window_scan_small_scale(self, matrix, fmap, partition):
        # capped run small enough to expand, then classify every position
        # of every reference run and differing parameter run by raw windows
        from chaoscert.piecewise import min_pairwise_cylinder_gap
        from chaoscert.transition import enumerate_admissible_words

        ctx = build_phi2_context(matrix, PeriodicStream((1, 2)), cap=64)
        sa = phi2(FiniteParam((2, 1, 2, 2, 1)), ctx, min_indexed=5)
        sb = phi2(FiniteParam((1, 1, 1, 2, 2)), ctx, min_indexed=5)
        min_gap = min_pairwise_cylinder_gap(
            fmap, partition, enumerate_admissible_words(matrix, 4))
        d0 = min_gap / 2
        k = 4
        regime = Regime(near=NearRegime(eps=F(1, 10), word_diams={}),
                        far=FarRegime(d0=d0, all_pairs_min_gap=min_gap),
                        window_k=k)
        last = max(e.index for e in sa.entries if e.index is not None)
        b = symbolic_df_bounds(sa, sb, regime, last)
        n = b.n_positions
        expand = min(n + 16, sa.total_length)
        syms_a = sa.block_sequence().materialize(expand).symbols
        syms_b = sb.block_sequence().materialize(expand).symbols

        diam_cache = {}
        def diam_of(w):
            if w not in diam_cache:
                diam_cache[w] = cylinder(fmap, partition, w).diameter()
            return diam_cache[w]
        gap_cache = {}
        def gap_of(wa, wb):
            key = (wa, wb) if wa <= wb else (wb, wa)
            if key not in gap_cache:
                gap_cache[key] = cylinder(fmap, partition, wa).gap_to(
                    cylinder(fmap, partition, wb))
            return gap_cache[key]

        near_direct = sum(
            1 for i in range(n)
            if classify_window(syms_a, syms_b, i, k + 1, diam_of, gap_of,
                               F(1, 10), d0) == "near")
        far_direct = sum(
            1 for i in range(n)
            if classify_window(syms_a, syms_b, i, 4, diam_of, gap_of,
                               F(1, 10), d0) == "far")
        # the symbolic counts certify a subset of what raw windows certify
        assert b.near_count <= near_direct
        assert b.far_count <= far_direct


class TestClassify:
    def grid(self):
        return tuple(F(x, 4) for x in range(1, 9))

    def test_identical_pair_is_none(self):
        grid = self.grid()
        ones = tuple([F(1)] * len(grid))
        near = DFCurve("sequence", ((2, 10),), grid, (ones,))
        far = DFCurve("sequence", ((2, 10),), grid, (ones,))
        verdict = classify_pair(near, far)
        assert verdict.kind == "none"

    def test_synthetic_type_one_evidence(self):
        # distances alternate runs of zeros and twos, run i having length
        # 2^i times the prefix; counts follow from run arithmetic since the
        # runs quickly grow past anything a materialized list could hold
        runs = [(F(0), 1)]
        total = 1
        for i in range(2, 15):
            value = F(0) if len(runs) % 2 == 0 else F(2)
            length = 2**i * total
            runs.append((value, length))
            total += length

        checkpoints = []
        rows = []
        grid = self.grid()  # all grid thresholds lie in (0, 2]
        zeros = 0
        n = 0
        for label, (value, length) in enumerate(runs, start=1):
            n += length
            if value == 0:
                zeros += length
            checkpoints.append((label, n))
            rows.append(tuple([F(zeros, n)] * len(grid)))
        curve = DFCurve("orbit", tuple(checkpoints), grid, tuple(rows))

        # the run arithmetic agrees with direct counting on a short prefix
        sample_n = checkpoints[2][1]
        expanded = [v for v, length in runs[:3] for _ in range(length)]
        for t in grid:
            assert df_n(expanded, t, sample_n) == rows[2][0]

        verdict = classify_pair(curve, curve, Thresholds())
        assert verdict.kind == "D1"
        assert verdict.witnesses["s_witness"] > 0

    def test_sequence_space_label(self):
        grid = self.grid()
        near = DFCurve("sequence", ((7, 100),), grid, (tuple([F(99, 100)] * 8),))
        far = DFCurve("sequence", ((7, 100),), grid, (tuple([F(1, 100)] * 8),))
        assert classify_pair(near, far).kind == "seq-DC"

    def test_curve_requires_monotone_rows(self):
        grid = self.grid()
        with pytest.raises(ValueError):
            DFCurve("orbit", ((1, 4),), grid,
                    ((F(1), F(0)) + tuple([F(0)] * 6),))


class TestClassifyWindow:
    def test_basic(self, fmap, partition):
        def diam_of(w):
            return cylinder(fmap, partition, w).diameter()

        def gap_of(wa, wb):
            return cylinder(fmap, partition, wa).gap_to(cylinder(fmap, partition, wb))

        a = (1, 2, 1, 2, 1, 2, 1, 2)
        b = (1, 2, 1, 2, 1, 2, 1, 2)
        assert classify_window(a, b, 0, 5, diam_of, gap_of, F(1, 10), F(5, 9)) == "near"
        assert classify_window(a, b, 0, 3, diam_of, gap_of, F(1, 100), F(5, 9)) is None
        c = (1, 2, 2, 2, 1, 2, 1, 2)
        assert classify_window(a, c, 0, 4, diam_of, gap_of, F(1, 10), F(5, 9)) == "far"
        assert classify_window(a, c, 6, 4, diam_of, gap_of, F(1, 10), F(5, 9)) is None
