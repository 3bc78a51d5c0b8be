"""Command line front end.

Examples
--------
::

    matchperm test --input exams.csv
    matchperm test --input exams.csv --mode mc --seed 7 --replicates 1000 --output json
    matchperm moments --input exams.csv
    matchperm diagnose --input exams.csv --output json
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .diagnostics import diagnose
from .engine import run_test
from .errors import InternalConsistencyError, MatchPermError
from .matchings import DEFAULT_CUTOFF, Matching, SamplerConfig, canonical_matching
from .matrix import exact_moments, read_csv

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def read_matching_file(path, n: int) -> Matching:
    """Read ``i j`` pairs (1-based, whitespace separated), one per line; ``#`` starts a comment."""
    pairs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected two indices, got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    if any(i == j for i, j in pairs):
        raise ValueError("a subject cannot be paired with itself")
    return Matching.from_pairs(pairs, n=n, one_based=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchperm",
        description="Permutation test for unusually similar designated pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="square similarity matrix (CSV or TSV)")
    common.add_argument("--strict", action="store_true", help="reject asymmetric matrices instead of averaging")
    common.add_argument("--output", choices=["text", "json"], default="text")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--replicates", type=int, default=100_000)
    sampling.add_argument("--seed", type=int, default=0)
    sampling.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF, help="largest n enumerated exactly")
    sampling.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo (does not change results)")

    t = sub.add_parser("test", parents=[common, sampling], help="run the permutation test")
    t.add_argument("--matching", help="file of 1-based 'i j' pairs; default pairs (1,2), (3,4), ...")
    t.add_argument("--mode", choices=["auto", "exact", "mc", "normal"], default="auto")
    t.add_argument("--alternative", choices=["greater", "less", "two-sided"], default="greater")

    sub.add_parser("moments", parents=[common], help="mean and variance of the statistic")

    d = sub.add_parser("diagnose", parents=[common, sampling], help="check the coupling identities and the bound")
    d.add_argument("--matchings", type=int, default=1000, help="sampled matchings for the linearity check")
    d.add_argument("--triples", type=int, default=10_000, help="sampled (pi, I, J) for the increment bound")
    return parser


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.6g}"


def _text_report(r) -> str:
    lines = [
        f"n = {r.n}, alternative = {r.alternative}, mode = {r.mode}",
        f"U = {_fmt(r.u)}   E[U] = {_fmt(r.mean)}   Var[U] = {_fmt(r.variance)}   W = {_fmt(r.w)}",
    ]
    if r.p_exact is not None:
        lines.append(f"exact p-value       {r.p_exact:.6g}")
    if r.p_mc is not None:
        lines.append(
            f"Monte Carlo p-value {r.p_mc:.6g} (s.e. {r.mc_std_error:.2g}, {r.replicates} replicates, seed {r.seed})"
        )
    if r.p_normal is not None:
        lines.append(f"normal p-value      {r.p_normal:.6g}")
    if r.delta_bound is not None:
        lines.append(f"error bound         {r.delta_bound:.6g}")
        if r.delta_bound >= 1:
            lines.append("  bound uninformative at this n (>= 1)")
    lines += [f"warning: {w}" for w in r.warnings]
    return "\n".join(lines)


def _run(args) -> str:
    E = read_csv(args.input, policy="strict" if args.strict else "average")

    if args.command == "moments":
        m = exact_moments(E)
        warnings = list(E.warnings)
        if m.variance == 0:
            warnings.append("degenerate null distribution: Var(U) = 0")
        if args.output == "json":
            return json.dumps({"n": E.n, "mean": m.mean, "variance": m.variance, "warnings": warnings}, indent=2)
        return "\n".join([f"n = {E.n}", f"E[U] = {m.mean:.10g}", f"Var[U] = {m.variance:.10g}"] + [f"warning: {w}" for w in warnings])

    cfg = SamplerConfig(
        seed=args.seed, replicates=args.replicates, enumeration_cutoff=args.cutoff, workers=args.workers
    )
    if args.command == "diagnose":
        rep = diagnose(E, cfg, n_matchings=args.matchings, n_triples=args.triples)
        if args.output == "json":
            return rep.to_json()
        return "\n".join(f"{k} = {v}" for k, v in rep.to_dict().items())

    pi0 = read_matching_file(args.matching, E.n) if args.matching else canonical_matching(E.n)
    report = run_test(E, pi0, cfg, mode=args.mode, alternative=args.alternative)
    return report.to_json() if args.output == "json" else _text_report(report)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = _run(args)
    except InternalConsistencyError as exc:
        print(f"matchperm: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (MatchPermError, ValueError, OSError) as exc:
        print(f"matchperm: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
