"""Command-line front end: check / evaluate / factorize / fit / gen.

Exit codes: 0 success (all checks pass), 2 axiom failure, 3 belief not
independent, 4 input error, 5 fit did not converge.  All file I/O is UTF-8
JSON; input files are never modified.  The EUFACTOR_TOL environment variable
overrides the default factorization and fit tolerances.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .axioms import check_three_factor_axioms, check_two_factor_axioms
from .conditionals import PreferenceDataset
from .core import (
    EURepresentation,
    JointBelief,
    Plan,
    Prospect,
    default_space,
)
from .fitting import FitConfig, fit
from .generators import GENERATOR_MODELS, gen_agent
from .representation import FACTORIZATION_TOL, evaluate_representation, factorize

EXIT_OK = 0
EXIT_AXIOM_FAILURE = 2
EXIT_NOT_INDEPENDENT = 3
EXIT_INPUT_ERROR = 4
EXIT_NO_CONVERGENCE = 5


class _InputError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise _InputError(f"{path}: no such file")
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")


def _env_tol(fallback: float) -> float:
    raw = os.environ.get("EUFACTOR_TOL")
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError:
        raise _InputError(f"EUFACTOR_TOL must be a number, got {raw!r}")


def _print_report_table(reports) -> None:
    width = max(len(r.axiom) for r in reports) + 2
    print(f"{'axiom'.ljust(width)}{'verdict':<9}{'coverage':<10}{'witnesses':<11}note")
    for r in reports:
        print(
            f"{r.axiom.ljust(width)}{r.verdict:<9}{r.coverage:<10}{len(r.witnesses):<11}{r.note}"
        )
    for r in reports:
        if r.failed:
            shown = min(3, len(r.witnesses))
            print(f"\n{r.axiom}: first {shown} witness(es):")
            for w in r.witnesses[:shown]:
                print(f"  {json.dumps(w)}")


def _cmd_check(args) -> int:
    data = PreferenceDataset.from_dict(_load_json(args.data))
    if data.is_3d:
        reports = check_three_factor_axioms(data, stage=args.stage)
    else:
        reports = check_two_factor_axioms(data)
    if args.json:
        print(json.dumps([r.to_dict() for r in reports], indent=2))
    else:
        _print_report_table(reports)
    return EXIT_AXIOM_FAILURE if any(r.failed for r in reports) else EXIT_OK


def _cmd_factorize(args) -> int:
    raw = _load_json(args.belief)
    if "pi" not in raw:
        raise _InputError(f"{args.belief}: expected a joint belief with a 'pi' matrix")
    belief = JointBelief.from_dict(raw)
    tol = args.tol if args.tol is not None else _env_tol(FACTORIZATION_TOL)
    result = factorize(belief, tol=tol, s0=args.s0)
    if args.json:
        print(json.dumps(result.to_dict(), indent=2))
    else:
        print(f"outcome: {result.outcome}")
        print(f"max |minor|: {result.max_minor:.6g} (tol {result.tol:g})")
        s, s2, t, t2 = result.witness
        labels = belief.space
        print(
            "witness cells: "
            f"({labels.s_labels[s]},{labels.t_labels[t]}) "
            f"({labels.s_labels[s2]},{labels.t_labels[t2]}) "
            f"({labels.s_labels[s]},{labels.t_labels[t2]}) "
            f"({labels.s_labels[s2]},{labels.t_labels[t]})"
        )
        print(f"p: {result.p.tolist()}")
        print(f"q: {result.q.tolist()}")
    return EXIT_OK if result.independent else EXIT_NOT_INDEPENDENT


def _load_items(raw: dict):
    if "universe" in raw:
        return [
            Plan.from_dict(d) if "cube" in d else Prospect.from_dict(d)
            for d in raw["universe"]
        ]
    if "cube" in raw:
        return [Plan.from_dict(raw)]
    if "rows" in raw:
        return [Prospect.from_dict(raw)]
    raise _InputError("expected 'rows', 'cube', or 'universe' in the input file")


def _cmd_evaluate(args) -> int:
    rep = EURepresentation.from_dict(_load_json(args.rep))
    items = _load_items(_load_json(args.data))
    values = [evaluate_representation(rep, item) for item in items]
    if args.json:
        print(json.dumps({"values": values}))
    else:
        for v in values:
            print(v)
    return EXIT_OK


def _cmd_fit(args) -> int:
    data = PreferenceDataset.from_dict(_load_json(args.data))
    cfg = FitConfig(
        model=args.model,
        max_outer_iterations=args.max_iter,
        convergence_tol=args.tol if args.tol is not None else _env_tol(1e-9),
        margin=args.margin,
        seed=args.seed,
    )
    result = fit(data, cfg)
    rep_json = json.dumps(result.representation.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rep_json + "\n")
    summary = result.to_dict()
    if not args.out:
        print(rep_json)
    del summary["representation"]
    print(json.dumps(summary, indent=2))
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _cmd_gen(args) -> int:
    dims = [int(x) for x in args.space.lower().split("x")]
    if len(dims) == 2:
        space = default_space(dims[0], dims[1])
    elif len(dims) == 3:
        space = default_space(dims[0], dims[1], dims[2])
    else:
        raise _InputError(f"--space must look like 3x3 or 2x2x2, got {args.space!r}")
    grid = tuple(float(x) for x in args.grid.split(","))
    rep, data = gen_agent(
        args.model,
        seed=args.seed,
        space=space,
        consequence_grid=grid,
        universe_size=args.size,
        comparisons=args.comparisons,
        min_minor=args.min_minor,
    )
    payload = json.dumps(data.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
        print(f"wrote {len(data.universe)} items, {len(data.comparisons)} comparisons to {args.out}")
    else:
        print(payload)
    if args.rep_out:
        with open(args.rep_out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(rep.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eufactor",
        description="Expected-utility representations under twofold uncertainty.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run the axiom bundle on a dataset")
    p.add_argument("data", help="dataset JSON file")
    p.add_argument(
        "--stage",
        choices=("joint", "product"),
        default="product",
        help="bundle stage for three-axis data (ignored for two-axis data)",
    )
    p.add_argument("--json", action="store_true", help="emit reports as JSON")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("factorize", help="test a joint belief for independence")
    p.add_argument("belief", help="belief JSON file with a 'pi' matrix")
    p.add_argument("--tol", type=float, default=None, help="minor-magnitude tolerance")
    p.add_argument("--s0", type=int, default=0, help="reference row for the q marginal")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_factorize)

    p = sub.add_parser("evaluate", help="value prospects or plans under a representation")
    p.add_argument("data", help="prospect/plan/universe JSON file")
    p.add_argument("--rep", required=True, help="representation JSON file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("fit", help="fit a representation to a dataset")
    p.add_argument("data", help="dataset JSON file")
    p.add_argument("--model", choices=("product2d", "joint3d", "product3d"), required=True)
    p.add_argument("--margin", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=150)
    p.add_argument("--tol", type=float, default=None, help="convergence tolerance")
    p.add_argument("--out", help="write the fitted representation JSON here")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("gen", help="generate a synthetic agent dataset")
    p.add_argument("--model", choices=GENERATOR_MODELS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--space", default=None, help="like 3x3 or 2x2x2")
    p.add_argument("--grid", default="0,1,2,3", help="comma-separated consequence grid")
    p.add_argument("--size", type=int, default=40, help="universe size")
    p.add_argument("--comparisons", type=int, default=None, help="sample this many comparisons")
    p.add_argument("--min-minor", type=float, default=0.05)
    p.add_argument("--out", help="dataset output path (default: stdout)")
    p.add_argument("--rep-out", help="also write the generating representation here")
    p.set_defaults(func=_cmd_gen)
    return parser


def run(argv) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code not in (0, None) else 0
    if getattr(args, "command", None) == "gen" and args.space is None:
        args.space = "2x2x2" if args.model in ("joint3d", "product3d") else "3x3"
    try:
        return args.func(args)
    except (_InputError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
