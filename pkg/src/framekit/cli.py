"""Command-line interface: generate frames, run certificates, emit reports.

Every command prints a JSON envelope (or CSV rows) holding the tool
version, the fully resolved configuration, SHA-256 digests of the input
files and the report itself.  Exit codes: 0 pass, 1 certified check failed,
2 usage or invalid input, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .errors import DidNotConverge
from .frames import Frame, make_harmonic_frame, make_random_unit_tight_frame, orthonormal_frame
from .fusion import FusionFrame, certify_near_tightness, fusion_frame_from_partition
from .geometry import certify_equi_isoclinic, certify_near_orthogonality, pairwise_correlations
from .numerics import DEFAULT_TOL, Tolerances
from .partition import Partition
from .replacement import certify_replacement, replace_blocks
from .reporting import csv_text, digest, dumps, envelope, read_json, unwrap
from .rip import DEFAULT_BUDGET, RipReport, rip_exhaustive, rip_randomized
from .verify import CHECK_NAMES, ConfigError, DEFAULT_CONFIG, resolve_config, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NO_CONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- argument helpers -------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--tol-sym", type=float)
    p.add_argument("--tol-eigen", type=float)
    p.add_argument("--tol-rank", type=float)
    p.add_argument("--tol-iso", type=float)
    p.add_argument("--max-sweeps", type=int)


def _add_partition(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--blocks", help='explicit blocks, e.g. "0,1,2;3,4;5"')
    g.add_argument("--block-size", type=int, help="contiguous blocks of this size")


def _tolerances(args) -> Tolerances:
    for name in ("tol_sym", "tol_eigen", "tol_rank", "tol_iso"):
        v = getattr(args, name)
        if v is not None and not v > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if args.max_sweeps is not None and args.max_sweeps < 1:
        raise UsageError("--max-sweeps must be positive")
    return DEFAULT_TOL.replace(tol_sym=args.tol_sym, tol_eigen=args.tol_eigen,
                               rank_tol=args.tol_rank, tol_iso=args.tol_iso,
                               max_sweeps=args.max_sweeps)


def _partition(args, count: int) -> Partition:
    if args.blocks is not None:
        return Partition.parse(args.blocks, count)
    if args.block_size is not None:
        return Partition.contiguous(count, args.block_size)
    raise UsageError("a partition is required: pass --blocks or --block-size")


def _load_frame(path: str, tol: Tolerances) -> Frame:
    return Frame.from_json(unwrap(read_json(path)), tol)


def _load_rip(path: str) -> RipReport:
    return RipReport.from_json(unwrap(read_json(path)))


def _positive(name: str, value) -> None:
    if value is None or value < 1:
        raise UsageError(f"{name} must be a positive integer")


def _emit(args, command: str, config: dict, inputs: list[str], report: dict,
          rows: list[dict]) -> None:
    config = {**config, "tolerances": asdict(_tolerances(args)), "format": args.format}
    if args.format == "csv":
        text = csv_text(rows)
    else:
        text = dumps(envelope(command, config, inputs, report))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_frame(path: str, f: Frame) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(f.to_json()))


def _bounds_json(f: Frame) -> dict:
    b = f.bounds
    return {"lower": b.lower, "upper": b.upper, "tight_ratio": b.tight_ratio}


# -- commands ---------------------------------------------------------------

def cmd_generate(args) -> int:
    tol = _tolerances(args)
    _positive("--dim", args.dim)
    if args.kind == "orthonormal":
        f = orthonormal_frame(args.dim, args.field)
    else:
        _positive("--count", args.count)
        if args.kind == "harmonic":
            f = make_harmonic_frame(args.dim, args.count, args.field, tol)
        else:
            if args.seed is None:
                raise UsageError("random-tight needs --seed")
            f = make_random_unit_tight_frame(args.dim, args.count, args.seed, field=args.field,
                                             tolerances=tol)
    _write_frame(args.frame_out, f)
    config = {"kind": args.kind, "dim": args.dim, "count": f.count, "seed": args.seed,
              "field": args.field, "frame_out": args.frame_out}
    bounds = _bounds_json(f)
    report = {"dim": f.dim, "count": f.count, "field": f.field, "bounds": bounds,
              "frame_digest": digest(args.frame_out)}
    row = {"dim": f.dim, "count": f.count, "field": f.field, **bounds}
    _emit(args, "generate", config, [], report, [row])
    return EXIT_PASS


def cmd_rip(args) -> int:
    tol = _tolerances(args)
    _positive("--s", args.s)
    f = _load_frame(args.frame, tol)
    if args.method == "exhaustive":
        rip = rip_exhaustive(f, args.s, args.budget)
    else:
        if args.samples is None or args.seed is None:
            raise UsageError("the randomized method needs --samples and --seed")
        _positive("--samples", args.samples)
        rip = rip_randomized(f, args.s, args.samples, args.seed)
    report = rip.to_json()
    config = {"frame": args.frame, "s": args.s, "method": args.method, "budget": args.budget,
              "samples": args.samples, "seed": args.seed}
    _emit(args, "rip", config, [args.frame], report, [report])
    return EXIT_PASS


def _rip_for(args, f: Frame, s_default: int) -> tuple[RipReport, list[str]]:
    if args.rip:
        return _load_rip(args.rip), [args.rip]
    s = args.s if args.s is not None else s_default
    _positive("--s", s)
    return rip_exhaustive(f, s, args.budget), []


def cmd_fusion(args) -> int:
    tol = _tolerances(args)
    f = _load_frame(args.frame, tol)
    part = _partition(args, f.count)
    rip, rip_inputs = _rip_for(args, f, part.max_block)
    nt = certify_near_tightness(f, part, rip, args.epsilon)
    ff = fusion_frame_from_partition(f, part)
    if args.fusion_out:
        with open(args.fusion_out, "w") as fh:
            fh.write(dumps(ff.to_json()))
    report = {**nt.to_json(), "s": rip.s, "blocks": [list(b) for b in part]}
    rows = [{"block": j, "indices": list(b), "subspace_dim": sub.dim, "dependent": sub.dependent,
             "epsilon_input": nt.epsilon_input, "measured_lower": nt.measured[0],
             "measured_upper": nt.measured[1], "theoretical_lower": nt.theoretical[0],
             "theoretical_upper": nt.theoretical[1], "holds": nt.holds}
            for j, (b, sub) in enumerate(zip(part, ff.subspaces))]
    config = {"frame": args.frame, "blocks": part.to_spec(), "rip": args.rip, "s": rip.s,
              "epsilon": args.epsilon, "fusion_out": args.fusion_out}
    _emit(args, "fusion", config, [args.frame, *rip_inputs], report, rows)
    return EXIT_PASS if nt.holds else EXIT_FAIL


def cmd_angles(args) -> int:
    tol = _tolerances(args)
    if args.fusion:
        if args.frame or args.blocks or args.block_size or args.rip:
            raise UsageError("--fusion cannot be combined with a frame, partition or --rip")
        ff = FusionFrame.from_json(unwrap(read_json(args.fusion)), tol)
        corr = pairwise_correlations(ff.subspaces, tol)
        report = {"pairs": [{"i": i, "j": j, "max_correlation": c} for i, j, c in corr],
                  "max_correlation": max((c for _, _, c in corr), default=0.0)}
        passed = True
        if len(ff) >= 2 and len({s.dim for s in ff.subspaces}) == 1:
            iso = certify_equi_isoclinic(ff.subspaces, args.epsilon, tol)
            report.update(iso.to_json())
            if args.epsilon is not None:
                passed = iso.holds_at(args.epsilon)
        elif args.epsilon is not None:
            raise UsageError("isoclinic certification needs subspaces of equal dimension")
        config = {"fusion": args.fusion, "epsilon": args.epsilon}
        inputs = [args.fusion]
    else:
        if not args.frame:
            raise UsageError("pass a frame file with a partition, or --fusion FILE")
        f = _load_frame(args.frame, tol)
        part = _partition(args, f.count)
        rip, rip_inputs = _rip_for(args, f, 2 * part.max_block)
        rep = certify_near_orthogonality(f, part, rip, args.epsilon)
        report = {**rep.to_json(), "s": rip.s, "blocks": [list(b) for b in part]}
        corr = rep.correlations
        passed = rep.holds
        config = {"frame": args.frame, "blocks": part.to_spec(), "rip": args.rip, "s": rip.s,
                  "epsilon": args.epsilon}
        inputs = [args.frame, *rip_inputs]
    rows = [{"i": i, "j": j, "max_correlation": c} for i, j, c in corr]
    _emit(args, "angles", config, inputs, report, rows)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_replace(args) -> int:
    tol = _tolerances(args)
    _positive("--s", args.s)
    f = _load_frame(args.frame, tol)
    part = _partition(args, f.count)
    if (args.k1 is None) == (args.replace_blocks is None):
        raise UsageError("pass exactly one of --k1 or --replace-blocks")
    if args.k1 is not None:
        if not 0 <= args.k1 <= len(part):
            raise UsageError(f"--k1 must lie in [0, {len(part)}]")
        ids = list(range(args.k1))
    else:
        try:
            ids = [int(t) for t in args.replace_blocks.split(",") if t.strip()]
        except ValueError as exc:
            raise UsageError(f"cannot parse --replace-blocks {args.replace_blocks!r}") from exc
    if args.rip:
        rip, rip_inputs = _load_rip(args.rip), [args.rip]
    else:
        rip, rip_inputs = rip_exhaustive(f, args.s, args.budget), []
    if args.samples is not None and args.seed is None:
        raise UsageError("--samples needs --seed")
    rf = replace_blocks(f, part, ids, args.s)
    rep = certify_replacement(rf, args.s, rip, args.epsilon, args.budget, args.samples, args.seed)
    if args.out_frame:
        _write_frame(args.out_frame, rf.frame)
    report = {**rep.to_json(), "replaced_blocks": list(rf.replaced_blocks),
              "blocks": [list(b) for b in part]}
    config = {"frame": args.frame, "blocks": part.to_spec(), "replaced_blocks": ids, "s": args.s,
              "rip": args.rip, "epsilon": args.epsilon, "budget": args.budget,
              "samples": args.samples, "seed": args.seed, "out_frame": args.out_frame}
    rows = [{"block": j, "indices": list(part[j]), **rep.to_json()} for j in rf.replaced_blocks]
    _emit(args, "replace", config, [args.frame, *rip_inputs], report, rows)
    return EXIT_FAIL if rep.holds is False else EXIT_PASS


def cmd_verify_all(args) -> int:
    if args.defaults and args.config:
        raise UsageError("pass either --defaults or --config, not both")
    if args.defaults:
        raw, inputs = dict(DEFAULT_CONFIG), []
    elif args.config:
        raw, inputs = read_json(args.config), [args.config]
    else:
        raise UsageError("verify-all needs --defaults or --config FILE")
    try:
        cfg = resolve_config(raw)
    except ConfigError as exc:
        raise UsageError(f"config: {exc}") from exc
    results = run_suite(cfg)
    for r in results:
        sys.stderr.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<32} {r.detail}\n")
    passed = all(r.passed for r in results)
    report = {"passed": passed, "checks": [r.to_json() for r in results]}
    _emit(args, "verify-all", cfg, inputs, report, [r.to_json() for r in results])
    return EXIT_PASS if passed else EXIT_FAIL


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framekit", description="Finite frames, RIP certificates and fusion frames.")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("generate", help="write a frame file")
    p.add_argument("kind", choices=("harmonic", "random-tight", "orthonormal"))
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--field", choices=("real", "complex"), default="real")
    p.add_argument("--frame-out", required=True, help="path of the frame JSON to write")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_generate)

    p = sub.add_parser("rip", help="restricted-isometry constant of a frame")
    p.add_argument("frame")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--method", choices=("exhaustive", "randomized"), default="exhaustive")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_rip)

    p = sub.add_parser("fusion", help="near-tightness of the block-span fusion frame")
    p.add_argument("frame")
    _add_partition(p)
    p.add_argument("--rip", help="RIP report from the rip command (computed if absent)")
    p.add_argument("--s", type=int, help="subset size when computing the RIP constant")
    p.add_argument("--epsilon", type=float, help="override the measured epsilon")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--fusion-out", help="write the fusion frame JSON here")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_fusion)

    p = sub.add_parser("angles", help="principal angles, near-orthogonality, isoclinic fit")
    p.add_argument("frame", nargs="?")
    p.add_argument("--fusion", help="fusion frame JSON instead of frame + partition")
    _add_partition(p)
    p.add_argument("--rip")
    p.add_argument("--s", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_angles)

    p = sub.add_parser("replace", help="whiten blocks and certify the surviving RIP bracket")
    p.add_argument("frame")
    _add_partition(p)
    p.add_argument("--k1", type=int, help="replace the first K1 blocks")
    p.add_argument("--replace-blocks", help="comma-separated block ids to replace")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--rip")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out-frame", help="write the replaced frame here")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_replace)

    p = sub.add_parser("verify-all", help="run the certification suite",
                       description="Checks: " + ", ".join(CHECK_NAMES))
    p.add_argument("--defaults", action="store_true", help="run with the default config")
    p.add_argument("--config", help="JSON config with seed, checks, counts, force_epsilon")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_verify_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_PASS
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        getattr(args, "parser", parser).print_usage(sys.stderr)
        sys.stderr.write(f"framekit {args.command}: {exc}\n")
        return EXIT_USAGE
    except DidNotConverge as exc:
        sys.stderr.write(f"framekit {args.command}: did not converge: {exc}\n")
        return EXIT_NO_CONVERGENCE
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"framekit {args.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
