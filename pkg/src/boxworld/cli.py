"""Command-line surface.

Every command is deterministic given its inputs and seed, prints either a
human-readable report or versioned JSON (`--format json`), and exits 0 on
success, 1 on a failed assertion or verdict, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import __version__
from .boxes import (classical_realization, damping_weight, example_damped,
                    example_main, load_state, noisy_pr_box, pr_box,
                    state_to_json_obj, validate_state)
from .cone import (closed_form_damped_vector, cone_contains,
                   separability_report)
from .entropy import binary_entropy, entropy_vector, optimal_strategy
from .errors import BoxworldError, TableStructureError
from .locality import (DEFAULT_CELL_BUDGET, DEFAULT_SIDE_BUDGET, is_local)
from .measurements import Leaf, strategy_to_json_obj
from .suites import DEFAULT_COUNTS, run_property_suite

SCHEMA = "boxworld.report/1"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _emit(args, report: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps({"schema": SCHEMA, **report}, indent=1))
    else:
        for line in text_lines:
            print(line)


def _parse_number(text: str):
    """Fractions stay exact; anything else becomes a float."""
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def _parse_target(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("target must be 'x,y,z'")
    return tuple(_parse_number(p.strip()) for p in parts)


def _parse_partition(text: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    sides = text.split("|")
    if len(sides) != 2:
        raise argparse.ArgumentTypeError("partition must be 'i,j|k,...'")
    try:
        return tuple(tuple(int(i) for i in side.split(",") if i.strip() != "")
                     for side in sides)
    except ValueError:
        raise argparse.ArgumentTypeError("partition indices must be integers")


def _strategy_lines(strategy, indent: str = "  ") -> list[str]:
    lines: list[str] = []

    def walk(node, depth):
        pad = indent * depth
        if isinstance(node, Leaf):
            lines.append(f"{pad}-> outcome {node.outcome}")
            return
        lines.append(f"{pad}measure box {node.box} with input {node.input}:")
        for out, child in enumerate(node.children):
            lines.append(f"{pad}{indent}on output {out}:")
            walk(child, depth + 2)

    walk(strategy.root, 0)
    return lines


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(args) -> int:
    try:
        state_obj = json.load(open(args.state_file))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read state file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        from .boxes import BoxSpec, SystemLayout

        lay = SystemLayout(tuple(BoxSpec(b["inputs"], b["outputs"])
                                 for b in state_obj["layout"]))
        table = {(tuple(e["x"]), tuple(e["a"])): Fraction(e["p"])
                 for e in state_obj["table"]}
        report = validate_state(lay, table)
    except (TableStructureError, KeyError, TypeError, ValueError) as exc:
        print(f"error: malformed state: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(args, {"command": "validate", "valid": report.ok,
                 "violations": [str(v) for v in report.violations]},
          ["valid" if report.ok else "invalid:"]
          + [f"  {v}" for v in report.violations])
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_main_family(args) -> int:
    N = args.N
    state = example_main(N)
    vec = entropy_vector(state, [(0,), (1,)])
    got = vec.bipartite()
    expected = (1 + 0.5 * math.log2(N), 1.0, 1.0)
    err = max(abs(g - e) for g, e in zip(got, expected))
    strategy, value = optimal_strategy(state)
    ok = err <= args.tolerance
    _emit(args, {
        "command": "main-family", "N": N,
        "entropy_vector": list(got), "expected": list(expected),
        "max_abs_error": err, "exact": vec.value({0, 1}).exact,
        "optimal_strategy": strategy_to_json_obj(strategy),
        "optimal_bits": value.bits, "pass": ok,
    }, [
        f"main family, N={N}",
        f"  entropy vector: ({got[0]:.12g}, {got[1]:.12g}, {got[2]:.12g})",
        f"  expected:       ({expected[0]:.12g}, {expected[1]:.12g}, {expected[2]:.12g})",
        f"  max abs error:  {err:.3g} (tolerance {args.tolerance:g})",
        "  optimal strategy:",
        *(f"    {line}" for line in _strategy_lines(strategy)),
        "PASS" if ok else "FAIL",
    ])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_damped_family(args) -> int:
    N, k = args.N, args.k
    try:
        target_lam, lam = damping_weight(N, k)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    state = example_damped(N, k)
    got = entropy_vector(state, [(0,), (1,)]).bipartite()
    expected = closed_form_damped_vector(N, k)
    err = max(abs(g - e) for g, e in zip(got, expected))
    ok = err <= args.tolerance
    _emit(args, {
        "command": "damped-family", "N": N, "k": k,
        "damping_target": target_lam,
        "damping_rounded": f"{lam.numerator}/{lam.denominator}",
        "entropy_vector": list(got), "closed_form": list(expected),
        "max_abs_error": err, "pass": ok,
    }, [
        f"damped family, N={N}, k={k}",
        f"  damping weight: target {target_lam:.12g}, "
        f"rounded {lam.numerator}/{lam.denominator} = {float(lam):.12g}",
        f"  entropy vector: ({got[0]:.12g}, {got[1]:.12g}, {got[2]:.12g})",
        f"  closed form:    ({expected[0]:.12g}, {expected[1]:.12g}, {expected[2]:.12g})",
        f"  max abs error:  {err:.3g} (tolerance {args.tolerance:g})",
        "PASS" if ok else "FAIL",
    ])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_synthesize(args) -> int:
    target = args.target
    if not cone_contains(target):
        print(f"error: target {tuple(float(c) for c in target)} is outside "
              "the cone (needs x,y,z >= 0 and z <= x+y)", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = separability_report(target, args.N,
                                     cell_budget=args.budget or DEFAULT_CELL_BUDGET)
    except (ValueError, BoxworldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    synth = report.synthesis
    ok = report.local
    coeffs = [float(c) for c in synth.decomposition.coefficients()]
    _emit(args, {"command": "synthesize", **report.to_json_obj(), "pass": ok}, [
        f"target ({float(target[0]):.12g}, {float(target[1]):.12g}, "
        f"{float(target[2]):.12g}) at scale N={args.N}",
        "  ray coefficients: " + ", ".join(f"{c:.12g}" for c in coeffs),
        f"  achieved: ({synth.achieved[0]:.12g}, {synth.achieved[1]:.12g}, "
        f"{synth.achieved[2]:.12g})",
        f"  error (sup norm): {synth.error:.12g}",
        f"  separability: {report.status} via {report.method}",
        "PASS" if ok else "FAIL",
    ])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_locality(args) -> int:
    try:
        state = load_state(args.state_file)
    except (OSError, json.JSONDecodeError, TableStructureError) as exc:
        print(f"error: cannot load state: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoxworldError as exc:
        print(f"error: state file invalid: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = is_local(state, args.partition,
                          side_budget=args.budget or DEFAULT_SIDE_BUDGET,
                          cell_budget=args.budget * args.budget
                          if args.budget else DEFAULT_CELL_BUDGET)
    except (ValueError, BoxworldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cert_path = None
    if result.local:
        cert_path = args.certificate_out or (args.state_file + ".certificate.json")
        with open(cert_path, "w") as fh:
            json.dump({"schema": SCHEMA, **result.to_json_obj()}, fh, indent=1)
    _emit(args, {"command": "locality", "status": result.status,
                 "certificate_path": cert_path},
          [result.status] + ([f"certificate: {cert_path}"] if cert_path else []))
    return EXIT_OK


def cmd_classical_comparison(args) -> int:
    N = args.N
    classical = entropy_vector(classical_realization(N), [(0, 1), (2,)]).bipartite()
    gnst = entropy_vector(example_main(N), [(0,), (1,)]).bipartite()
    expected_classical = (1 + math.log2(N), 1.0, 1 + math.log2(N))
    expected_gnst = (1 + 0.5 * math.log2(N), 1.0, 1.0)
    err = max(max(abs(a - b) for a, b in zip(classical, expected_classical)),
              max(abs(a - b) for a, b in zip(gnst, expected_gnst)))
    monotone = classical[2] >= classical[0] - args.tolerance
    violation = gnst[0] - gnst[2]
    ok = err <= args.tolerance and monotone
    _emit(args, {
        "command": "classical-comparison", "N": N,
        "classical_vector": list(classical),
        "classical_expected": list(expected_classical),
        "gnst_vector": list(gnst), "gnst_expected": list(expected_gnst),
        "max_abs_error": err, "classical_monotone": monotone,
        "gnst_monotonicity_violation": violation, "pass": ok,
    }, [
        f"N={N}",
        f"  classical realization: ({classical[0]:.12g}, {classical[1]:.12g}, "
        f"{classical[2]:.12g})  expected ({expected_classical[0]:.12g}, 1, "
        f"{expected_classical[2]:.12g})",
        f"  box-world example:     ({gnst[0]:.12g}, {gnst[1]:.12g}, "
        f"{gnst[2]:.12g})  expected ({expected_gnst[0]:.12g}, 1, 1)",
        f"  classical H(AB) >= H(A): {monotone}",
        f"  box-world violation H(A) - H(AB): {violation:.12g}"
        f" (= log2(N)/2 = {0.5 * math.log2(N):.12g})",
        "PASS" if ok else "FAIL",
    ])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_property_suite(args) -> int:
    counts = dict(DEFAULT_COUNTS)
    if args.quick:
        counts = {k: max(5, v // 10) for k, v in counts.items()}
    results = run_property_suite(seed=args.seed, counts=counts)
    all_ok = all(r.passed for r in results)
    _emit(args, {
        "command": "property-suite", "seed": args.seed,
        "results": [{"name": r.name, "passed": r.passed, "checked": r.checked,
                     "detail": r.detail} for r in results],
        "pass": all_ok,
    }, [r.line() for r in results] + ["PASS" if all_ok else "FAIL"])
    return EXIT_OK if all_ok else EXIT_FAIL


def cmd_export(args) -> int:
    try:
        if args.family == "pr":
            state = pr_box()
        elif args.family == "noisy-pr":
            state = noisy_pr_box(Fraction(args.win))
        elif args.family == "main":
            state = example_main(args.N)
        elif args.family == "damped":
            state = example_damped(args.N, args.k)
        else:
            state = classical_realization(args.N)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    obj = state_to_json_obj(state)
    if args.out == "-":
        json.dump(obj, sys.stdout, indent=1)
        print()
    else:
        with open(args.out, "w") as fh:
            json.dump(obj, fh, indent=1)
        print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxworld",
        description="Exact toolkit for non-signalling box states: "
                    "measurement entropy, locality, entropy-cone synthesis.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tolerance=1e-9):
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--tolerance", type=float, default=tolerance)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=None,
                       help="resource budget override")

    p = sub.add_parser("validate", help="check a state file")
    p.add_argument("state_file")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("main-family",
                       help="entropy vector (1 + log2(N)/2, 1, 1) of the "
                            "skewed pair")
    p.add_argument("--N", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_main_family)

    p = sub.add_parser("damped-family",
                       help="damped family vs its closed-form entropy vector")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=float, default=1.0)
    common(p, tolerance=1e-6)
    p.set_defaults(func=cmd_damped_family)

    p = sub.add_parser("synthesize",
                       help="separable state approximating a cone vector")
    p.add_argument("--target", type=_parse_target, required=True,
                   metavar="x,y,z")
    p.add_argument("--N", type=int, default=2 ** 16)
    common(p, tolerance=1e-6)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("locality", help="LOCAL/NONLOCAL verdict for a state file")
    p.add_argument("state_file")
    p.add_argument("--partition", type=_parse_partition, required=True,
                   metavar="i,j|k,...")
    p.add_argument("--certificate-out", default=None)
    common(p)
    p.set_defaults(func=cmd_locality)

    p = sub.add_parser("classical-comparison",
                       help="classical realization vs box-world entropies")
    p.add_argument("--N", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_classical_comparison)

    p = sub.add_parser("property-suite", help="run the randomized invariants")
    p.add_argument("--quick", action="store_true",
                   help="reduced counts for smoke testing")
    common(p)
    p.set_defaults(func=cmd_property_suite)

    p = sub.add_parser("export", help="write a built-in state to JSON")
    p.add_argument("--family", choices=("pr", "noisy-pr", "main", "damped",
                                        "classical"), required=True)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--win", default="3/4",
                   help="CHSH win fraction for noisy-pr (exact fraction)")
    p.add_argument("--out", default="-")
    common(p)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code in (0, 2) else EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, BoxworldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
