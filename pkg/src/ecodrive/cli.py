"""Command-line front end: matrix runs and the solver-vs-oracle check."""

from __future__ import annotations

import argparse
import sys

from .experiment import INTERNAL_LEVELS, ExperimentMatrix, emit_report, run_matrix
from .oracle import oracle_check
from .scenario import default_config, load_scenario


def _parse_floats(text: str):
    return tuple(float(p) for p in text.split(",") if p != "")


def _parse_names(text: str):
    return tuple(p.strip() for p in text.split(",") if p.strip())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ecodrive", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the controller x disturbance matrix")
    run_p.add_argument("--scenario", help="scenario file (TOML); defaults to the built-in scenario")
    run_p.add_argument("--controllers", default="analytical,optimal", help="comma list: stopgo,analytical,optimal")
    run_p.add_argument("--extensions", default="0,2,4,6", help="comma list of extension seconds")
    run_p.add_argument(
        "--internal-levels",
        default="none,mild,heavy",
        help=f"comma list of {','.join(INTERNAL_LEVELS)}",
    )
    run_p.add_argument("--reps", type=int, default=5, help="repetitions per cell (distinct seeds)")
    run_p.add_argument("--seed", type=int, default=0, help="base seed; rep r uses seed+r")
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.add_argument("--workers", type=int, default=1, help="parallel episode workers")

    oracle_p = sub.add_parser("oracle-check", help="run the solver-vs-oracle comparison suite")
    oracle_p.add_argument("--steps", type=int, default=20, help="max steps per toy instance")

    args = parser.parse_args(argv)

    if args.command == "oracle-check":
        return 0 if oracle_check(max_steps=args.steps) else 1

    base = load_scenario(args.scenario) if args.scenario else default_config()
    if args.seed is not None:
        import dataclasses

        base = dataclasses.replace(base, seed=args.seed)
    matrix = ExperimentMatrix(
        controllers=_parse_names(args.controllers),
        extensions_s=_parse_floats(args.extensions),
        internal_levels=_parse_names(args.internal_levels),
        repetitions=args.reps,
        base_config=base,
        output_dir=args.out,
    )
    result = run_matrix(matrix, workers=args.workers)
    paths = emit_report(result, args.out)
    n_ok = sum(1 for o in result.outcomes if o.error is None)
    print(f"{n_ok}/{len(result.outcomes)} episodes completed; reports in {paths['results'].parent}")
    if not result.ok:
        for o in result.failures:
            print(f"FAILED {o.scenario} {o.method}: {o.error}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
