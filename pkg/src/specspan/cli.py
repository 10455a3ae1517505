"""Command-line front end.

Exit codes: 0 success, 2 bad flags, 3 generation/guard failure, 4 verification
failure.  stdout carries machine-readable JSON only; human messages go to
stderr.  Every command honors --seed for bit-exact reproducibility of all
non-timing fields.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import detmax, hardgen
from .coreset import (BadPartColumn, PartitionedInput, PartitionScheme, Solver,
                      partition, run_pipeline)
from .formats import FormatError, read_vector_file, report_json, write_report, write_vector_file
from .spanner import SpannerParams, build_k_spanner, certify_all, verify_k_spanner, verify_weak

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_GENERATION = 3
EXIT_VERIFY = 4


def _empty_report(config: dict, seed: int | None) -> dict:
    return {
        "config": config,
        "parts": None,
        "coreset_sizes": None,
        "union_size": None,
        "objective": None,
        "reference": None,
        "ratio": None,
        "guarantee": None,
        "comm_bytes": None,
        "timings_ms": {},
        "seed": seed,
        "version": "1",
    }


def _cmd_gen(args) -> int:
    try:
        if args.kind == "sphere":
            vs = hardgen.sample_sphere(args.n, args.d, args.seed)
            write_vector_file(args.out, vs, metadata={
                "kind": "sphere", "d": args.d, "n": args.n, "seed": args.seed,
            })
        elif args.kind == "pm1":
            vs = hardgen.gen_pm1_lowerbound(args.d, args.n, args.seed)
            write_vector_file(args.out, vs, metadata={
                "kind": "pm1", "d": args.d, "n": args.n, "seed": args.seed,
            })
        else:
            inst = hardgen.gen_hard_instance(
                args.d, args.beta, args.M, args.seed, args.n_override)
            full = inst.parts.union
            ids = np.concatenate([
                np.full(len(part), i, dtype=np.int64)
                for i, part in enumerate(inst.parts.parts)
            ])
            write_vector_file(args.out, full, part_ids=ids, metadata={
                "kind": "hard", "d": inst.d, "m": inst.m,
                "parts": len(inst.parts),
                "beta": inst.beta, "M": inst.big_m, "seed": inst.seed,
                "n_per_set": inst.n_per_set,
                "planted": ",".join(str(i) for i in inst.planted),
            })
    except (hardgen.SamplingFailed, hardgen.DimensionTooSmall, ValueError) as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    return EXIT_OK


def _cmd_spanner(args) -> int:
    if args.alpha is not None and args.alpha < 1.0:
        print("--alpha must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        vs, _, _ = read_vector_file(args.input)
    except FormatError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    k = args.k if args.k is not None else vs.dim
    params = SpannerParams(k=k, alpha=args.alpha, alpha_scale=args.alpha_scale)
    t0 = time.perf_counter()
    try:
        sp = build_k_spanner(vs, k, params=params)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    t_build = time.perf_counter()
    verdict = "skipped"
    ok = True
    if args.verify == "weak":
        ok, _ = verify_weak(vs, sp, sp.alpha)
    elif args.verify == "strong":
        certs = certify_all(vs, sp, sp.alpha)
        ok = all(c.passes(sp.alpha) for c in certs)
    elif args.verify == "k":
        ok = verify_k_spanner(vs, sp, k, sp.alpha)
    if args.verify != "none":
        verdict = "pass" if ok else "fail"
    t_verify = time.perf_counter()
    report = _empty_report({
        "command": "spanner", "input": args.input, "k": k,
        "alpha": sp.alpha, "verify": args.verify,
        "size": sp.size, "indices": list(sp.indices), "verdict": verdict,
    }, None)
    report["timings_ms"] = {
        "build": (t_build - t0) * 1e3,
        "verify": (t_verify - t_build) * 1e3,
    }
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report_json(report))
    if args.indices_out:
        with open(args.indices_out, "w") as fh:
            fh.write("\n".join(str(i) for i in sp.indices) + "\n")
    print(report_json({"size": sp.size, "verdict": verdict}), end="")
    if args.verify != "none" and not ok:
        print("verification failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_detmax(args) -> int:
    try:
        vs, _, _ = read_vector_file(args.input)
    except FormatError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        if args.method == "brute":
            sol = detmax.brute_force_detmax(vs, args.k)
        elif args.method == "greedy":
            sol = detmax.greedy_local_search(vs, args.k)
        else:
            if args.k != vs.dim:
                raise detmax.Degenerate(
                    f"fw-round requires --k equal to the dimension ({vs.dim})")
            frac = detmax.fractional_detmax(vs, args.k)
            sol = detmax.nikolov_round(vs, frac, args.k, args.trials, args.seed).best
    except (detmax.TooLarge, detmax.Degenerate) as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    elapsed = (time.perf_counter() - t0) * 1e3
    report = _empty_report({
        "command": "detmax", "input": args.input, "k": args.k,
        "method": args.method, "trials": args.trials,
        "indices": list(sol.indices),
    }, args.seed)
    report["objective"] = sol.value
    report["timings_ms"] = {"solve": elapsed}
    write_report(report, args.out)
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    try:
        vs, part_ids, metadata = read_vector_file(args.input)
    except FormatError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        if part_ids is not None and args.parts is None:
            pinput = partition(vs, int(part_ids.max()) + 1,
                               PartitionScheme.FROM_FILE, part_ids=part_ids)
        elif args.parts is not None:
            scheme = PartitionScheme.ROUND_ROBIN if args.scheme == "rr" else PartitionScheme.HASH
            pinput = partition(vs, args.parts, scheme, seed=args.seed)
        else:
            pinput = PartitionedInput([vs])
    except BadPartColumn as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    params = SpannerParams(k=args.k, alpha=args.alpha, alpha_scale=args.alpha_scale)
    solver = {s.value: s for s in Solver}[args.solver]
    try:
        report = run_pipeline(pinput, args.k, params=params, solver=solver,
                              seed=args.seed, trials=args.trials)
    except (detmax.TooLarge, detmax.Degenerate) as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    out = report.to_dict()
    if "planted" in metadata:
        planted = [int(tok) for tok in metadata["planted"].split(",") if tok]
        union_labels = set(out["config"]["union_labels"])
        out["planted_survival"] = [lbl in union_labels for lbl in planted]
    write_report(out, args.report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="specspan",
        description="Spectral spanners, determinant maximization, core-set pipelines.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate instance files")
    gsub = gen.add_subparsers(dest="kind", required=True)
    for kind in ("sphere", "hard", "pm1"):
        gp = gsub.add_parser(kind)
        gp.add_argument("--d", type=int, required=True)
        gp.add_argument("--seed", type=int, default=0)
        gp.add_argument("--out", required=True)
        if kind == "hard":
            gp.add_argument("--beta", type=float, default=1.0)
            gp.add_argument("--M", type=float, default=hardgen.DEFAULT_M_SCALAR)
            gp.add_argument("--n-override", dest="n_override", type=int, default=None)
        else:
            gp.add_argument("--n", type=int, required=True)
        gp.set_defaults(func=_cmd_gen)

    spn = sub.add_parser("spanner", help="build and verify a spectral spanner")
    spn.add_argument("--input", required=True)
    spn.add_argument("--k", type=int, default=None)
    spn.add_argument("--alpha", type=float, default=None)
    spn.add_argument("--alpha-scale", dest="alpha_scale", type=float, default=1.0)
    spn.add_argument("--verify", choices=["none", "weak", "strong", "k"], default="weak")
    spn.add_argument("--out", default=None)
    spn.add_argument("--indices-out", dest="indices_out", default=None)
    spn.set_defaults(func=_cmd_spanner)

    dm = sub.add_parser("detmax", help="offline determinant maximization")
    dm.add_argument("--input", required=True)
    dm.add_argument("--k", type=int, required=True)
    dm.add_argument("--method", choices=["brute", "greedy", "fw-round"], default="greedy")
    dm.add_argument("--trials", type=int, default=1000)
    dm.add_argument("--seed", type=int, default=0)
    dm.add_argument("--out", default=None)
    dm.set_defaults(func=_cmd_detmax)

    pl = sub.add_parser("pipeline", help="composable core-set pipeline")
    pl.add_argument("--input", required=True)
    pl.add_argument("--parts", type=int, default=None)
    pl.add_argument("--scheme", choices=["rr", "hash"], default="rr")
    pl.add_argument("--k", type=int, required=True)
    pl.add_argument("--alpha", type=float, default=None)
    pl.add_argument("--alpha-scale", dest="alpha_scale", type=float, default=1.0)
    pl.add_argument("--solver", choices=["brute", "greedy", "fw-round"], default="greedy")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--trials", type=int, default=1000)
    pl.add_argument("--report", default=None)
    pl.set_defaults(func=_cmd_pipeline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "alpha", None) is not None and args.alpha < 1.0:
        print("--alpha must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
