"""Command-line front end.

Commands: check, build, df, demo, words.  Exit codes: 0 success,
1 failed certification, 2 configuration or file errors.  Certificates
serialize rationals as "p/q" strings and big integers as decimal strings;
floats appear only in clearly marked approximate annotations.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .corpus import example32_bundle
from .dfmetrics import DFCurve, PairVerdict
from .errors import ChaosCertError
from .pipeline import (
    CheckFailedError,
    DFResult,
    RunConfig,
    load_bundle,
    load_map_source,
    load_matrix_source,
    load_partition_source,
    parse_alpha_spec,
    run_build,
    run_check,
    run_df,
)
from .piecewise import cylinder, rational, singleton_evidence
from .symbolic import word_to_string
from .transition import count_admissible_words, enumerate_admissible_words


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_jsonl(path: Path, rows) -> None:
    lines = [json.dumps(row, sort_keys=True) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_curve_csv(path: Path, curve: DFCurve) -> None:
    lines = ["n,t,value"]
    lines += [",".join(row) for row in curve.to_csv_rows()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _verdict_obj(verdict: PairVerdict) -> dict:
    witnesses = {
        key: (str(value) if isinstance(value, Fraction) else value)
        for key, value in verdict.witnesses.items()
    }
    return {
        "kind": verdict.kind,
        "witnesses": witnesses,
        "thresholds": {"hi": str(verdict.thresholds.hi), "lo": str(verdict.thresholds.lo)},
    }


def _approx(q: Fraction) -> str:
    return f"{float(q):.6g}"


def _out_dir(args) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_from_args(args) -> RunConfig:
    overrides = {}
    if getattr(args, "construction", None):
        overrides["construction"] = args.construction
    if getattr(args, "params", None):
        overrides["params"] = args.params
    if getattr(args, "cap", None):
        overrides["s_max"] = args.cap
    if getattr(args, "tau", None):
        overrides["tau"] = rational(args.tau)
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed

    if getattr(args, "config", None):
        bundle = load_bundle(args.config)
        if getattr(args, "matrix", None):
            bundle["matrix"] = args.matrix
        if getattr(args, "map", None):
            bundle["map"] = args.map
        if getattr(args, "partition", None):
            bundle["partition"] = args.partition
        if getattr(args, "alpha", None):
            bundle["alpha"] = args.alpha
        return RunConfig.from_bundle(bundle, **overrides)

    missing = [name for name in ("matrix", "map", "partition") if not getattr(args, name, None)]
    if missing:
        raise ValueError(f"missing --config or --{'/--'.join(missing)}")
    return RunConfig(
        matrix=load_matrix_source(args.matrix),
        map=load_map_source(args.map),
        partition=load_partition_source(args.partition),
        alpha=parse_alpha_spec(args.alpha or "periodic:12"),
        **overrides,
    )


def cmd_check(args) -> int:
    cfg = _config_from_args(args)
    result = run_check(cfg)
    obj = result.to_json_obj()
    out = _out_dir(args)
    if out is not None:
        _write_json(out / "certificate.json", obj)
    print(json.dumps(obj, indent=2, sort_keys=True))
    return 0 if result.ok else 1


def cmd_words(args) -> int:
    matrix = load_matrix_source(args.matrix)
    words = enumerate_admissible_words(matrix, args.length)
    count = count_admissible_words(matrix, args.length)
    if args.format == "json":
        print(json.dumps(
            {"length": args.length, "count": count,
             "words": [word_to_string(w) for w in words]},
            sort_keys=True))
    else:
        for w in words:
            print(word_to_string(w))
        print(f"count {count}")
    return 0


def cmd_build(args) -> int:
    cfg = _config_from_args(args)
    result = run_build(cfg, target_len=args.target_len, p_count=args.p_count)
    out = _out_dir(args) or Path(".")
    for i, sched in enumerate(result.schedules):
        _write_jsonl(out / f"schedule_param{i}.jsonl", sched.to_jsonl_rows())
    if result.p_prefix is not None:
        _write_json(out / "p_prefix.json", {"positions": [str(p) for p in result.p_prefix]})
    evidence = result.singleton
    _write_json(out / "singleton.json", {
        "achieved": evidence.achieved,
        "depth": evidence.depth,
        "diameter": str(evidence.diameter) if evidence.diameter is not None else None,
        "tau": str(evidence.tau),
    })
    capped = any(s.is_capped() for s in result.schedules)
    print(f"wrote {len(result.schedules)} schedules to {out} "
          f"(capped: {str(capped).lower()})")
    if not evidence.achieved:
        print("warning: singleton evidence not achieved at the configured depth",
              file=sys.stderr)
    return 0


def _print_df_report(result: DFResult) -> None:
    print(f"d0 = {result.d0} (~{_approx(result.d0)})")
    print("checkpoint bounds:")
    for row in result.bounds_rows:
        near = row["near_bound"]
        far = row["far_bound"]
        near_txt = f"{near} (~{_approx(Fraction(near))})" if near else "-"
        far_txt = f"{far} (~{_approx(Fraction(far))})" if far else "-"
        print(f"  j={row['checkpoint']:>3} {row['kind']:>4} near>={near_txt}  far<={far_txt}")
    verdict = result.verdict
    print(f"verdict: {verdict.kind}")
    for key, value in sorted(verdict.witnesses.items()):
        if isinstance(value, Fraction):
            print(f"  {key} = {value} (~{_approx(value)})")
        else:
            print(f"  {key} = {value}")


def cmd_df(args) -> int:
    cfg = _config_from_args(args)
    result = run_df(cfg, orbit_check_n=args.orbit_n)
    out = _out_dir(args)
    if out is not None:
        _write_curve_csv(out / "near_curve.csv", result.near_curve)
        _write_curve_csv(out / "far_curve.csv", result.far_curve)
        _write_json(out / "bounds.json", result.bounds_rows)
        _write_json(out / "verdict.json", _verdict_obj(result.verdict))
        if result.orbit_check is not None:
            _write_json(out / "orbit_check.json", result.orbit_check)
    _print_df_report(result)
    if result.orbit_check is not None:
        print(f"orbit cross-check (n={result.orbit_check['n']}): "
              f"{'ok' if result.orbit_check['ok'] else 'FAILED'}")
    return 0


def cmd_demo(args) -> int:
    out = Path(args.out or "chaoscert-demo")
    out.mkdir(parents=True, exist_ok=True)
    bundle = example32_bundle()
    cfg = RunConfig.from_bundle(bundle)

    print("== check ==")
    check = run_check(cfg)
    _write_json(out / "certificate.json", check.to_json_obj())
    print(f"matrix irreducible: {check.irreducible}, star row: {check.star}")
    print(f"verdict: {check.report.verdict}, gap: {check.report.min_gap}")
    if not check.ok:
        return 1

    print("== nested cylinder diameters ==")
    word = (1, 2)
    for k in range(0, 9):
        prefix = word * k + (1,)
        diam = cylinder(cfg.map, cfg.partition, prefix, cfg.matrix).diameter()
        print(f"  depth {2 * k + 1:>2} ({word_to_string(prefix[:6])}{'...' if len(prefix) > 6 else ''}):"
              f" {diam} (~{_approx(diam)})")

    evidence = singleton_evidence(cfg.map, cfg.partition, cfg.alpha, cfg.tau,
                                  max_depth=64, matrix=cfg.matrix)
    print(f"singleton evidence: diameter {evidence.diameter} (~{_approx(evidence.diameter)})"
          f" < {evidence.tau} at depth {evidence.depth}"
          f" ({(evidence.depth - 1) // 2} two-symbol contraction steps)")
    _write_json(out / "singleton.json", {
        "achieved": evidence.achieved, "depth": evidence.depth,
        "diameter": str(evidence.diameter), "tau": str(evidence.tau),
    })

    print("== build ==")
    build = run_build(cfg, min_blocks=14)
    for i, sched in enumerate(build.schedules):
        _write_jsonl(out / f"schedule_param{i}.jsonl", sched.to_jsonl_rows())
    _write_json(out / "p_prefix.json",
                {"positions": [str(p) for p in build.p_prefix]})
    head = ", ".join(str(p) for p in build.p_prefix[:10])
    print(f"first sample positions: {head}, ...")

    print("== distribution-function evidence ==")
    result = run_df(cfg)
    _write_curve_csv(out / "near_curve.csv", result.near_curve)
    _write_curve_csv(out / "far_curve.csv", result.far_curve)
    _write_json(out / "bounds.json", result.bounds_rows)
    _write_json(out / "verdict.json", _verdict_obj(result.verdict))
    _print_df_report(result)
    print(f"artifacts in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaoscert",
        description="Certify strictly coupled-expanding interval maps and "
                    "evaluate distributional-chaos evidence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--config", help="bundle JSON path or the name 'example32'")
        p.add_argument("--matrix", help="matrix JSON path, or inline rows like '01;11'")
        p.add_argument("--map", help="map config JSON path")
        p.add_argument("--partition", help="partition JSON path")
        p.add_argument("--alpha", help="reference sequence, e.g. periodic:12 or prefix:1212")
        p.add_argument("--construction", choices=("phi1", "phi2"))
        p.add_argument("--params", type=int, help="family size (default 2)")
        p.add_argument("--cap", type=int, help="exponent cap for the capped variant")
        p.add_argument("--tau", help="singleton evidence threshold, rational (default 1/10^9)")
        p.add_argument("--seed", type=int, help="family seed (default 0)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p_check = sub.add_parser("check", help="run the coupled-expansion certificate")
    add_config_flags(p_check)
    p_check.set_defaults(func=cmd_check)

    p_words = sub.add_parser("words", help="enumerate admissible words")
    p_words.add_argument("--matrix", required=True)
    p_words.add_argument("--length", type=int, required=True)
    p_words.add_argument("--format", choices=("json", "lines"), default="lines")
    p_words.set_defaults(func=cmd_words)

    p_build = sub.add_parser("build", help="emit block schedules and sample positions")
    add_config_flags(p_build)
    p_build.add_argument("--target-len", type=int, help="truncate schedules at this length")
    p_build.add_argument("--p-count", type=int, default=1000,
                         help="how many sample positions to write")
    p_build.set_defaults(func=cmd_build)

    p_df = sub.add_parser("df", help="distribution-function curves and verdict")
    add_config_flags(p_df)
    p_df.add_argument("--orbit-n", type=int, default=1024,
                      help="exact-orbit cross-check length for capped runs (max 10^5)")
    p_df.set_defaults(func=cmd_df)

    p_demo = sub.add_parser("demo", help="bundled walk-through")
    p_demo.add_argument("--out", help="output directory (default chaoscert-demo)")
    p_demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CheckFailedError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError, ChaosCertError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
