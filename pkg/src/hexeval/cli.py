"""Batch command line front end.

Exit codes follow the usual ASP solver convention: 10 when at least one
answer set was found, 20 when there is none, 1 for usage/parse/plugin
errors and 2 when the value invention budget is exceeded.
"""

from __future__ import annotations

import argparse
import sys

from .builtins import builtin_registry
from .errors import HexError, InventionBudgetError
from .grounding import DEFAULT_INVENTION_BUDGET, ground_program
from .solver import Solver, SolverConfig, optimize
from .syntax import parse_program

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_ERROR = 1
EXIT_BUDGET = 2

_MINIMIZE_MODES = {"off": "off", "deletion": "deletion", "qxp": "quickxplain"}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_ERROR, "%s: error: %s\n" % (self.prog, message))


def build_arg_parser():
    parser = _ArgumentParser(
        prog="hexeval",
        description="Evaluate HEX programs: ASP with external oracle atoms.",
    )
    parser.add_argument("paths", nargs="*", help="program files (stdin when omitted)")
    parser.add_argument(
        "--models", "-n", type=int, default=0, metavar="N",
        help="number of answer sets to compute; 0 for all (default)",
    )
    parser.add_argument(
        "--partial-eval", choices=("on", "off"), default="on",
        help="evaluate oracles under partial assignments (default on)",
    )
    parser.add_argument(
        "--eval-frequency", type=int, default=1, metavar="N",
        help="evaluate externals at every N-th decision (default 1)",
    )
    parser.add_argument(
        "--minimize", choices=tuple(_MINIMIZE_MODES), default="deletion",
        help="learned nogood minimization (default deletion)",
    )
    parser.add_argument(
        "--flp", choices=("explicit", "skip-auto", "off"), default="skip-auto",
        help="reduct minimality checking mode (default skip-auto)",
    )
    parser.add_argument(
        "--max-invention", type=int, default=DEFAULT_INVENTION_BUDGET, metavar="N",
        help="bound on invented constants during grounding (default %d)"
        % DEFAULT_INVENTION_BUDGET,
    )
    parser.add_argument("--opt", action="store_true", help="optimize weak constraints")
    parser.add_argument("--stats", action="store_true", help="print solver statistics")
    parser.add_argument(
        "--dump-ground", action="store_true", help="print the ground program"
    )
    return parser


def format_answer(index, texts):
    return "Answer %d: {%s}" % (index, ", ".join(sorted(texts)))


def format_cost(cost, gp):
    levels = sorted({weak.level for weak in gp.weak}, reverse=True)
    if not levels:
        return "Cost: 0"
    return "Cost: " + " ".join("%d@%d" % (cost.get(l, 0), l) for l in levels)


def run(args, out=sys.stdout, err=sys.stderr):
    if args.eval_frequency < 1:
        print("hexeval: error: --eval-frequency must be at least 1", file=err)
        return EXIT_ERROR
    if args.models < 0:
        print("hexeval: error: --models must be nonnegative", file=err)
        return EXIT_ERROR
    try:
        if args.paths:
            chunks = []
            for path in args.paths:
                with open(path, "r", encoding="utf-8") as handle:
                    chunks.append(handle.read())
            text = "\n".join(chunks)
        else:
            text = sys.stdin.read()
    except OSError as exc:
        print("hexeval: error: %s" % exc, file=err)
        return EXIT_ERROR

    registry = builtin_registry()
    config = SolverConfig(
        partial_eval=args.partial_eval == "on",
        eval_frequency=args.eval_frequency,
        minimization=_MINIMIZE_MODES[args.minimize],
        flp_mode=args.flp,
        max_models=args.models,
        optimization=args.opt,
    )
    try:
        program = parse_program(text)
        gp = ground_program(program, registry, max_invention=args.max_invention)
        if args.dump_ground:
            print(gp.dump(), file=out)
        if args.opt:
            result = optimize(gp, registry, config)
            count = 0
            for model in result.answer_sets[:1]:
                count += 1
                texts = [gp.table.text(a) for a in model]
                print(format_answer(count, texts), file=out)
                print(format_cost(result.cost, gp), file=out)
                print("OPTIMUM FOUND", file=out)
            stats = result.stats
        else:
            solver = Solver(gp, registry, config)
            count = 0
            for model in solver.models():
                count += 1
                texts = [gp.table.text(a) for a in model]
                print(format_answer(count, texts), file=out)
            stats = solver.stats
    except InventionBudgetError as exc:
        print("hexeval: error: %s" % exc, file=err)
        return EXIT_BUDGET
    except HexError as exc:
        print("hexeval: error: %s" % exc, file=err)
        return EXIT_ERROR

    if args.stats:
        for line in stats.lines():
            print(line, file=out)
    return EXIT_SAT if count else EXIT_UNSAT


def main(argv=None):
    args = build_arg_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
