"""End-to-end runs: configuration, certification, schedule building, and
distribution-function evidence.

The command-line layer is a thin wrapper over `run_check`, `run_build`
and `run_df`; tests drive these directly.  Everything certified is an
exact rational; the only floats are grid-placement helpers and
human-readable annotations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction

from . import corpus
from .dfmetrics import (
    DFCurve,
    FarRegime,
    NearRegime,
    OrbitPair,
    PairVerdict,
    Regime,
    SymbolicBounds,
    Thresholds,
    classify_pair,
    classify_window,
    df_n,
    symbolic_df_bounds,
)
from .errors import ChaosCertError, PeriodRequiredError
from .piecewise import (
    CertificateReport,
    Partition,
    PiecewiseAffineMap,
    SingletonEvidence,
    alpha_window_diameters,
    cylinder,
    cylinder_diameters,
    min_pairwise_cylinder_gap,
    pick_representative,
    rational,
    singleton_evidence,
    verify_strict_coupled_expanding,
)
from .scrambled import (
    ParamRule,
    Phi1Context,
    Phi2Context,
    Schedule,
    build_phi1_context,
    build_phi2_context,
    p_sequence,
    phi1,
    phi2,
    scrambled_params,
)
from .symbolic import (
    PeriodicStream,
    PrefixStream,
    SymbolStream,
    word_from_string,
)
from .transition import (
    TransitionMatrix,
    enumerate_admissible_words,
    is_irreducible,
    star_row,
    validate_matrix,
)


class CheckFailedError(ChaosCertError):
    def __init__(self, result: "CheckResult"):
        super().__init__("; ".join(result.failures()))
        self.result = result


# ---------------------------------------------------------------------------
# configuration


def parse_alpha_spec(spec) -> SymbolStream:
    """'periodic:12' or 'prefix:121212...' (or the dict equivalents)."""
    if isinstance(spec, dict):
        if "periodic" in spec:
            return PeriodicStream(word_from_string(spec["periodic"]))
        if "prefix" in spec:
            return PrefixStream(word_from_string(spec["prefix"]))
        raise ValueError(f"unknown alpha spec {spec!r}")
    if isinstance(spec, str):
        kind, _, body = spec.partition(":")
        if kind == "periodic" and body:
            return PeriodicStream(word_from_string(body))
        if kind == "prefix" and body:
            return PrefixStream(word_from_string(body))
    raise ValueError(f"unknown alpha spec {spec!r}")


def load_matrix_source(source) -> TransitionMatrix:
    """JSON array of 0/1 rows, a path to one, or inline rows like '01;11'."""
    if isinstance(source, TransitionMatrix):
        return source
    if isinstance(source, (list, tuple)):
        return validate_matrix(source)
    text = str(source)
    if ";" in text and all(ch in "01;" for ch in text):
        rows = [[int(ch) for ch in row] for row in text.split(";") if row]
        return validate_matrix(rows)
    with open(text, "r", encoding="utf-8") as fh:
        return validate_matrix(json.load(fh))


def load_map_source(source) -> PiecewiseAffineMap:
    if isinstance(source, PiecewiseAffineMap):
        return source
    if isinstance(source, dict):
        return PiecewiseAffineMap.from_config(source)
    with open(source, "r", encoding="utf-8") as fh:
        return PiecewiseAffineMap.from_config(json.load(fh))


def load_partition_source(source) -> Partition:
    if isinstance(source, Partition):
        return source
    if isinstance(source, dict):
        return Partition.from_config(source)
    with open(source, "r", encoding="utf-8") as fh:
        return Partition.from_config(json.load(fh))


@dataclass
class RunConfig:
    """Everything one run needs; see the bundled example32.json for the
    on-disk shape."""

    matrix: TransitionMatrix
    map: PiecewiseAffineMap
    partition: Partition
    alpha: SymbolStream
    construction: str = "phi1"
    params: int = 2
    seed: int = 0
    s_max: int | None = None
    materialize_cap: int | None = None
    tau: Fraction = Fraction(1, 10**9)
    hi: Fraction = Fraction(98, 100)
    lo: Fraction = Fraction(2, 100)

    def __post_init__(self):
        if self.construction not in ("phi1", "phi2"):
            raise ValueError(f"unknown construction {self.construction!r}")
        if not (0 < self.lo < self.hi < 1):
            raise ValueError("thresholds must satisfy 0 < lo < hi < 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.s_max is not None and self.s_max < 1:
            raise ValueError("exponent cap must be positive")
        if self.materialize_cap is not None and self.materialize_cap < 1:
            raise ValueError("materialization cap must be positive")
        if self.params < 2:
            raise ValueError("need at least two parameters")

    @classmethod
    def from_bundle(cls, bundle: dict, **overrides) -> "RunConfig":
        kwargs = {
            "matrix": load_matrix_source(bundle["matrix"]),
            "map": load_map_source(bundle["map"]),
            "partition": load_partition_source(bundle["partition"]),
            "alpha": parse_alpha_spec(bundle.get("alpha", "periodic:12")),
        }
        kwargs.update(overrides)
        return cls(**kwargs)


def load_bundle(name_or_path) -> dict:
    """The packaged 'example32' bundle, or a JSON file with the same keys."""
    if str(name_or_path) == "example32":
        return corpus.example32_bundle()
    with open(name_or_path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# check


@dataclass
class CheckResult:
    matrix: TransitionMatrix
    irreducible: bool
    star: int | None
    report: CertificateReport

    @property
    def ok(self) -> bool:
        return self.irreducible and self.star is not None and self.report.ok

    def failures(self) -> list[str]:
        out = list(self.report.failures)
        if not self.irreducible:
            out.append("matrix is not irreducible")
        if self.star is None:
            out.append("no row sums to 2 or more")
        return out

    def to_json_obj(self) -> dict:
        return {
            "m": self.matrix.m,
            "irreducible": self.irreducible,
            "star_row": self.star,
            "verdict": self.report.verdict,
            "gap": str(self.report.min_gap),
            "interiors_disjoint": self.report.interiors_disjoint,
            "continuity_jumps": [
                [str(x), str(a), str(b)] for x, a, b in self.report.continuity_jumps
            ],
            "rows": [
                {
                    "symbol": r.symbol,
                    "ok": r.ok,
                    "image": r.image.to_json_obj(),
                    "required": r.required.to_json_obj(),
                }
                for r in self.report.rows
            ],
            "clauses": self.failures(),
            "ok": self.ok,
        }


def run_check(cfg: RunConfig) -> CheckResult:
    return CheckResult(
        matrix=cfg.matrix,
        irreducible=is_irreducible(cfg.matrix),
        star=star_row(cfg.matrix),
        report=verify_strict_coupled_expanding(cfg.map, cfg.partition, cfg.matrix),
    )


# ---------------------------------------------------------------------------
# build


@dataclass
class BuildResult:
    check: CheckResult
    ctx: object  # Phi1Context | Phi2Context
    params: list[ParamRule]
    schedules: list[Schedule]
    p_prefix: list[int] | None
    singleton: SingletonEvidence


def run_build(cfg: RunConfig, target_len: int | None = None,
              min_blocks: int | None = None, p_count: int = 1000,
              singleton_depth: int = 128) -> BuildResult:
    check = run_check(cfg)
    if not check.ok:
        raise CheckFailedError(check)

    family = scrambled_params(cfg.params, cfg.seed)
    if cfg.construction == "phi1":
        ctx = build_phi1_context(cfg.matrix, cfg.alpha, cap=cfg.s_max)
        if target_len is None and min_blocks is None:
            if cfg.s_max is not None:
                target_len = 10**6
            else:
                min_blocks = 24
        schedules = [phi1(p, ctx, target_len=target_len, min_blocks=min_blocks)
                     for p in family]
        prefix = p_sequence(schedules[0], p_count)
        alpha_for_evidence = ctx.alpha
    else:
        if not isinstance(cfg.alpha, PeriodicStream):
            raise PeriodRequiredError("the phi2 construction needs a periodic alpha spec")
        ctx = build_phi2_context(cfg.matrix, cfg.alpha, cap=cfg.s_max)
        if target_len is None and min_blocks is None:
            if cfg.s_max is not None:
                target_len = 10**6
            else:
                min_blocks = 15
        schedules = [phi2(p, ctx, target_len=target_len, min_indexed=min_blocks)
                     for p in family]
        prefix = None
        alpha_for_evidence = ctx.alpha

    evidence = singleton_evidence(cfg.map, cfg.partition, alpha_for_evidence,
                                  cfg.tau, max_depth=singleton_depth, matrix=cfg.matrix)
    return BuildResult(check, ctx, family, schedules, prefix, evidence)


# ---------------------------------------------------------------------------
# word geometry tables


def build_word_tables(f: PiecewiseAffineMap, partition: Partition, schedules) -> tuple[dict, dict]:
    """Cylinder diameters for every explicit repeated word, and exact gaps
    for every pair of distinct equal-length words appearing at the same
    block position."""
    words = set()
    pairs = set()
    for sched in schedules:
        for e in sched.entries:
            if e.word is not None:
                words.add(e.word)
    for a in schedules:
        for b in schedules:
            if a is b:
                continue
            for ea, eb in zip(a.entries, b.entries):
                if ea.word is not None and eb.word is not None and ea.word != eb.word:
                    pairs.add((min(ea.word, eb.word), max(ea.word, eb.word)))
    diams = {w: cylinder(f, partition, w).diameter() for w in sorted(words)}
    gaps = {
        (wa, wb): cylinder(f, partition, wa).gap_to(cylinder(f, partition, wb))
        for wa, wb in sorted(pairs)
    }
    return diams, gaps


def geometric_grid(t_min: Fraction, t_max: Fraction, points: int = 17) -> tuple[Fraction, ...]:
    """Roughly geometric rational grid with exact endpoints."""
    if t_min <= 0 or t_max <= t_min:
        raise ValueError("need 0 < t_min < t_max")
    if points < 2:
        return (t_min,)
    ratio = (float(t_max) / float(t_min)) ** (1.0 / (points - 1))
    r = Fraction(round(ratio * 10**6), 10**6)
    grid = [t_min]
    for _ in range(points - 2):
        nxt = grid[-1] * r
        if nxt >= t_max:
            break
        grid.append(nxt)
    grid.append(t_max)
    return tuple(grid)


# ---------------------------------------------------------------------------
# distribution-function evidence


@dataclass
class DFResult:
    build: BuildResult
    d0: Fraction
    t_grid: tuple[Fraction, ...]
    bounds_rows: list[dict]
    near_curve: DFCurve
    far_curve: DFCurve
    verdict: PairVerdict
    orbit_check: dict | None = None


def _first_window_k_below(f, partition, word, t: Fraction, matrix, budget: int = 128) -> int:
    for k in range(1, budget + 1):
        if alpha_window_diameters(f, partition, word, k, matrix) < t:
            return k
    raise ChaosCertError(f"periodic windows never dropped below {t} within {budget} symbols")


def run_df(cfg: RunConfig, report_checkpoints=range(3, 13),
           orbit_check_n: int = 1024) -> DFResult:
    """Evidence for the first parameter pair.

    The verdict always comes from the exact (uncapped) schedules; when the
    configuration asks for a capped variant, an additional exact-orbit
    cross-check compares direct distribution counts with window-certified
    classification on the capped, materialized construction.
    """
    exact_cfg = replace(cfg, s_max=None)
    f, partition, matrix = cfg.map, cfg.partition, cfg.matrix

    if cfg.construction == "phi1":
        build = run_build(exact_cfg, min_blocks=1)  # context + check; schedules below
        ctx: Phi1Context = build.ctx
        v1, v2 = ctx.gadget.v1, ctx.gadget.v2
        d0 = cylinder(f, partition, v1).gap_to(cylinder(f, partition, v2))
        t_max = 2 * f.domain().hull().width
        t_grid = geometric_grid(d0 / 8, t_max)

        # deepest prefix word any grid threshold needs
        k_need = 1
        while cylinder(f, partition, ctx.u_word(k_need)).diameter() >= t_grid[0]:
            k_need += 1
            if k_need > 64:
                raise ChaosCertError("prefix-word cylinders are not shrinking")
        g_near = max(k_need, 3)
        j_max = max(g_near * g_near + k_need + 2, max(report_checkpoints), 14)

        pa, pb = build.params[0], build.params[1]
        sched_a = phi1(pa, ctx, min_blocks=j_max)
        sched_b = phi1(pb, ctx, min_blocks=j_max)

        # make sure a differing block with a small far bound is in range
        for _ in range(8):
            differing = [ea.index for ea, eb in zip(sched_a.entries, sched_b.entries)
                         if ea.kind == "v" and ea.letter != eb.letter]
            if any(j >= 7 for j in differing):
                break
            j_max += 8
            sched_a = phi1(pa, ctx, min_blocks=j_max)
            sched_b = phi1(pb, ctx, min_blocks=j_max)
        else:
            raise ChaosCertError("parameters never produced a differing block in range")
        build.schedules = [sched_a, sched_b]
        build.p_prefix = p_sequence(sched_a, 1000)

        diams, gaps = build_word_tables(f, partition, [sched_a, sched_b])
        prefix_diams = cylinder_diameters(
            f, partition, ctx.alpha.prefix(2 * ctx.nu(k_need) + 4), matrix)

        def n0_for(eps: Fraction) -> int:
            for depth, d in enumerate(prefix_diams, start=1):
                if d < eps:
                    return depth
            raise ChaosCertError(f"no prefix depth with cylinder below {eps}")

        def regime_for(eps: Fraction, far_s: Fraction) -> Regime:
            return Regime(
                near=NearRegime(eps=eps, n0=n0_for(eps), word_diams=diams),
                far=FarRegime(d0=far_s, word_gaps=gaps),
            )

        checkpoints = list(range(2, j_max + 1))
    else:
        build = run_build(exact_cfg, min_blocks=1)
        ctx: Phi2Context = build.ctx
        words_l = enumerate_admissible_words(matrix, ctx.gadget.l)
        min_gap = min_pairwise_cylinder_gap(f, partition, words_l)
        d0 = min_gap / 2
        t_max = 2 * f.domain().hull().width
        t_grid = geometric_grid(d0 / 8, t_max)

        j_max = max(max(report_checkpoints), 20)
        pa, pb = build.params[0], build.params[1]
        sched_a = phi2(pa, ctx, min_indexed=j_max)
        sched_b = phi2(pb, ctx, min_indexed=j_max)
        build.schedules = [sched_a, sched_b]

        diams, gaps = build_word_tables(f, partition, [sched_a, sched_b])
        window_ks = {t: _first_window_k_below(f, partition, ctx.alpha.word, t, matrix)
                     for t in t_grid}

        def regime_for(eps: Fraction, far_s: Fraction) -> Regime:
            return Regime(
                near=NearRegime(eps=eps, word_diams=diams),
                far=FarRegime(d0=far_s, word_gaps=gaps, all_pairs_min_gap=min_gap),
                window_k=window_ks[eps],
            )

        checkpoints = [e.index for e in sched_a.entries
                       if e.index is not None and e.kind in ("B", "psi")]

    regimes_near = {t: regime_for(t, d0) for t in t_grid}
    far_grid = tuple(sorted(set(t_grid) | {d0}))
    regimes_far = {s: regime_for(t_grid[0], s) for s in far_grid}

    near_rows = []
    far_rows = []
    labels = []
    bounds_by_j: dict[int, SymbolicBounds] = {}
    for j in checkpoints:
        near_row = [symbolic_df_bounds(sched_a, sched_b, regimes_near[t], j).near_ratio
                    for t in t_grid]
        far_row = [symbolic_df_bounds(sched_a, sched_b, regimes_far[s], j).far_ratio
                   for s in far_grid]
        bounds_by_j[j] = symbolic_df_bounds(sched_a, sched_b, regimes_far[d0], j)
        labels.append((j, bounds_by_j[j].n_positions))
        near_rows.append(tuple(near_row))
        far_rows.append(tuple(far_row))

    space = "sequence" if cfg.construction == "phi1" else "orbit"
    near_curve = DFCurve(space, tuple(labels), tuple(t_grid), tuple(near_rows))
    far_curve = DFCurve(space, tuple(labels), far_grid, tuple(far_rows))
    verdict = classify_pair(near_curve, far_curve, Thresholds(cfg.hi, cfg.lo))

    bounds_rows = []
    for j in report_checkpoints:
        if j not in bounds_by_j:
            continue
        b = bounds_by_j[j]
        bounds_rows.append({
            "checkpoint": j,
            "kind": b.kind,
            "exponent": str(sched_a.entry_at(j).exponent),
            "near_bound": str(b.near_bound) if b.near_bound is not None else None,
            "far_bound": str(b.far_bound) if b.far_bound is not None else None,
        })

    orbit_check = None
    if cfg.s_max is not None and orbit_check_n:
        orbit_check = run_orbit_crosscheck(cfg, min(orbit_check_n, 10**5),
                                           diams_gaps=(diams, gaps), d0=d0)

    return DFResult(build=build, d0=d0, t_grid=tuple(t_grid),
                    bounds_rows=bounds_rows, near_curve=near_curve,
                    far_curve=far_curve, verdict=verdict, orbit_check=orbit_check)


def run_orbit_crosscheck(cfg: RunConfig, n: int, diams_gaps=None, d0=None) -> dict:
    """Exact-orbit distribution counts on the capped construction, squeezed
    between the window-certified near and far fractions."""
    if cfg.s_max is None:
        raise ValueError("the orbit cross-check runs on a capped configuration")
    f, partition, matrix = cfg.map, cfg.partition, cfg.matrix
    build = run_build(cfg, target_len=max(4 * n, 4096), p_count=0)
    sched_a, sched_b = build.schedules[0], build.schedules[1]
    window = sched_a.gadget_len
    seq_a = sched_a.block_sequence().materialize(n + window).symbols
    seq_b = sched_b.block_sequence().materialize(n + window).symbols

    if diams_gaps is None:
        diams_gaps = build_word_tables(f, partition, [sched_a, sched_b])
    diam_cache: dict = {}
    gap_cache: dict = {}

    def diam_of(w):
        if w not in diam_cache:
            diam_cache[w] = cylinder(f, partition, w).diameter()
        return diam_cache[w]

    def gap_of(wa, wb):
        key = (wa, wb) if wa <= wb else (wb, wa)
        if key not in gap_cache:
            gap_cache[key] = cylinder(f, partition, wa).gap_to(cylinder(f, partition, wb))
        return gap_cache[key]

    x = pick_representative(f, partition, seq_a, n + window, matrix)
    y = pick_representative(f, partition, seq_b, n + window, matrix)
    pair = OrbitPair.from_map(f, x, y, n)

    if d0 is None:
        gadget = build.ctx.gadget
        d0 = gap_of(gadget.v1, gadget.v2)
    thresholds = [d0, 4 * d0]
    summary = {"n": n, "x": str(x), "y": str(y), "checks": []}
    for t in thresholds:
        t = rational(t)
        near = far = 0
        consistent = True
        for i in range(n):
            c = classify_window(seq_a, seq_b, i, window, diam_of, gap_of, t, t)
            if c == "near":
                near += 1
                consistent = consistent and pair.distances[i] < t
            elif c == "far":
                far += 1
                consistent = consistent and pair.distances[i] >= t
        value = df_n(pair, t, n)
        sandwich = Fraction(near, n) <= value <= Fraction(n - far, n)
        summary["checks"].append({
            "t": str(t),
            "df": str(value),
            "near_fraction": str(Fraction(near, n)),
            "far_fraction": str(Fraction(far, n)),
            "window_consistent": consistent,
            "sandwich": sandwich,
        })
    summary["ok"] = all(c["window_consistent"] and c["sandwich"] for c in summary["checks"])
    return summary
