"""Command-line driver.

Subcommands: ``solve``, ``verify``, ``generate`` and ``prefix``.  Every
command writes one JSON document to stdout (or ``--out``) and diagnostics
to stderr.

Exit codes: 0 success (feasible), 1 infeasible query set (``verify``),
2 unreadable input or invalid parameters, 3 a guarantee or oracle check
failed, 4 a solver refused work above a configured cap.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from fractions import Fraction
from typing import Optional

from .errors import KnapExpError, ParameterError, RefusalError, StructuralError
from .model import (Instance, dumps_instance, format_rational, loads_instance, parse_integer,
                    parse_rational, random_instance)
from .pipeline import PipelineParams, run_pipeline
from .prefix import PrefixProblem, prefix_upper, solve_prefix_lp, solve_prefix_optimal
from .reductions import (SubsetSumInstance, SuccinctSetCoverInstance, reduce_knapsack_decision,
                         reduce_sscover, reduce_subset_sum)
from .verify import (brute_force_optimal_query_set, brute_force_prefix_opt,
                     check_alpha_beta_feasible, check_by_enumeration)

log = logging.getLogger("knapexp")

ORACLE_LIMIT = 10
EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_VIOLATION, EXIT_REFUSED = 0, 1, 2, 3, 4

SAMPLE_SSCOVER = '{"n": 3, "k": 1, "formulas": [[[1, 2, 3]]]}'


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _ids(values) -> list:
    return sorted(values)


def _rat(x: Optional[Fraction]):
    return None if x is None else format_rational(x)


def _read_instance(path: str) -> tuple:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise _Exit(EXIT_INPUT, f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise _Exit(EXIT_INPUT, f"{path}: not UTF-8 text") from None
    instance, threshold, meta = loads_instance(text)
    return instance, threshold, hashlib.sha256(raw).hexdigest()


def _instance_summary(instance: Instance, digest: str) -> dict:
    return {"sha256": digest, "n": instance.n, "capacity": str(instance.capacity),
            "nontrivial": len(instance.nontrivial_ids)}


def _query_list(text: str, instance: Instance) -> frozenset:
    text = text.strip()
    if not text:
        return frozenset()
    try:
        ids = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise StructuralError(f"query set {text!r} must be comma-separated ids") from None
    return instance.ids_of(ids)


def _feasibility(report) -> dict:
    return {
        "feasible": report.feasible,
        "p_star": _rat(report.p_star),
        "max_upper_after": _rat(report.max_upper_after),
        "certified_profit": _rat(report.certified_profit),
        "witness_packing": None if report.witness_packing is None else _ids(report.witness_packing),
        "violating_packing": None if report.violating_packing is None else _ids(report.violating_packing),
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> tuple:
    instance, _, digest = _read_instance(args.instance)
    params = PipelineParams(parse_rational(args.epsilon), args.mode, args.workers)
    result = run_pipeline(instance, params)
    check = check_alpha_beta_feasible(instance, result.query_set, params.alpha, params.beta)
    report = {
        "instance": _instance_summary(instance, digest),
        "params": {"mode": params.mode, "epsilon": _rat(params.epsilon),
                   "alpha": _rat(params.alpha), "beta": _rat(params.beta)},
        "result": {
            "query_set": _ids(result.query_set),
            "size": len(result.query_set),
            "packing": _ids(result.packing),
            "D": _rat(result.D),
            "alpha_achieved": _rat(result.alpha_achieved),
            "beta_achieved": _rat(result.beta_achieved),
            "components": {k: _ids(v) for k, v in sorted(result.components.items())},
        },
        "verification": _feasibility(check),
        "oracle": None,
    }
    code = EXIT_OK
    if not check.feasible:
        log.error("guarantee violated: query set is not (%s, %s)-feasible",
                  params.alpha, params.beta)
        code = EXIT_VIOLATION
    if not args.no_oracle and instance.n <= ORACLE_LIMIT:
        best = brute_force_optimal_query_set(instance)
        ok = len(result.query_set) <= 2 * len(best)
        report["oracle"] = {"optimal_query_set": _ids(best), "optimal_size": len(best),
                            "size_bound_holds": ok}
        if not ok:
            log.error("size bound violated: |Q| = %d > 2 * %d", len(result.query_set), len(best))
            code = EXIT_VIOLATION
    return report, code


def cmd_verify(args) -> tuple:
    instance, _, digest = _read_instance(args.instance)
    q = _query_list(args.query, instance)
    alpha, beta = parse_rational(args.alpha), parse_rational(args.beta)
    check = check_alpha_beta_feasible(instance, q, alpha, beta)
    report = {
        "instance": _instance_summary(instance, digest),
        "params": {"query_set": _ids(q), "alpha": _rat(alpha), "beta": _rat(beta)},
        "verification": _feasibility(check),
        "oracle": None,
    }
    code = EXIT_OK if check.feasible else EXIT_INFEASIBLE
    if not args.no_oracle and instance.n <= ORACLE_LIMIT:
        verdict = check_by_enumeration(instance, q, alpha, beta)
        report["oracle"] = {"enumeration_feasible": verdict, "agrees": verdict == check.feasible}
        if verdict != check.feasible:
            log.error("enumeration oracle disagrees with the DP verdict")
            code = EXIT_VIOLATION
    return report, code


def cmd_prefix(args) -> tuple:
    instance, file_threshold, digest = _read_instance(args.instance)
    if args.threshold is not None:
        D = parse_rational(args.threshold)
    elif file_threshold is not None:
        D = file_threshold
    else:
        raise ParameterError("no threshold: pass --threshold or use a file with one")
    problem = PrefixProblem(instance, D)
    mode = PipelineParams(Fraction(1, 2), args.mode).mode
    if mode == "pseudopolynomial":
        q = solve_prefix_optimal(problem, workers=args.workers)
        bound = D
    else:
        q = solve_prefix_lp(problem, workers=args.workers)
        bound = D + 2 * max((it.upper for it in instance.items), default=Fraction(0))
    value = prefix_upper(instance, q)
    report = {
        "instance": _instance_summary(instance, digest),
        "params": {"mode": mode, "threshold": _rat(D)},
        "result": {"query_set": _ids(q), "size": len(q), "prefix_upper": _rat(value),
                   "bound": _rat(bound), "within_bound": value <= bound},
        "oracle": None,
    }
    code = EXIT_OK if value <= bound else EXIT_VIOLATION
    if not args.no_oracle and instance.n <= ORACLE_LIMIT:
        best = brute_force_prefix_opt(instance, D)
        ok = len(q) == len(best) if mode == "pseudopolynomial" else len(q) <= len(best)
        report["oracle"] = {"optimal_query_set": _ids(best), "optimal_size": len(best), "agrees": ok}
        if not ok:
            log.error("prefix solver disagrees with the brute-force oracle")
            code = EXIT_VIOLATION
    return report, code


def _generate_sscover(args) -> str:
    if args.source:
        with open(args.source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = SAMPLE_SSCOVER
    ssc = SuccinctSetCoverInstance.from_json(text)
    red = reduce_sscover(ssc)
    roles = {str(i): "_".join(str(part) for part in role) for i, role in sorted(red.roles.items())}
    meta = {"kind": "sscover", "k": ssc.k, "epsilon": format_rational(red.epsilon), "roles": roles}
    return dumps_instance(red.instance, meta=meta)


def _generate_subsetsum(args) -> str:
    if args.source:
        with open(args.source, encoding="utf-8") as fh:
            ss = SubsetSumInstance.from_json(fh.read())
    else:
        if args.values is None or args.target is None:
            raise ParameterError("subsetsum needs --values and --target (or --source)")
        ss = SubsetSumInstance(tuple(parse_integer(v) for v in args.values.split(",")),
                               parse_integer(args.target))
    red = reduce_subset_sum(ss, parse_rational(args.c))
    meta = {"kind": "subsetsum", "values": [str(v) for v in red.source.values],
            "target": str(red.source.target), "c": format_rational(red.c),
            "epsilon": format_rational(red.epsilon)}
    return dumps_instance(red.instance, threshold=red.threshold, meta=meta)


def _generate_knapdec(args) -> str:
    if not args.instance:
        raise ParameterError("knapdec needs --instance with a trivial-interval knapsack")
    if args.threshold is None:
        raise ParameterError("knapdec needs --threshold D")
    base, _, _ = _read_instance(args.instance)
    out = reduce_knapsack_decision(base, args.threshold, args.alpha, args.beta)
    meta = {"kind": "knapdec", "D": format_rational(parse_rational(args.threshold)),
            "alpha": format_rational(parse_rational(args.alpha)),
            "beta": format_rational(parse_rational(args.beta))}
    return dumps_instance(out, meta=meta)


def _generate_random(args) -> str:
    inst = random_instance(args.n, args.weight_cap, args.seed, upper_cap=args.upper_cap)
    meta = {"kind": "random", "n": args.n, "weight_cap": args.weight_cap,
            "upper_cap": args.upper_cap, "seed": args.seed}
    return dumps_instance(inst, meta=meta)


_GENERATORS = {"sscover": _generate_sscover, "subsetsum": _generate_subsetsum,
               "knapdec": _generate_knapdec, "random": _generate_random}


def cmd_generate(args) -> str:
    return _GENERATORS[args.kind](args)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--no-oracle", action="store_true")
    common.add_argument("--out")
    common.add_argument("--timings", action="store_true",
                        help="add wall-clock timings (makes reports non-reproducible)")

    parser = argparse.ArgumentParser(prog="knapexp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="run the approximation pipeline")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", default="pseudo", choices=["pseudo", "poly"])
    p.add_argument("--epsilon", default="1/4")

    p = sub.add_parser("verify", parents=[common], help="check a query set")
    p.add_argument("--instance", required=True)
    p.add_argument("--query", default="", help="comma-separated item ids")
    p.add_argument("--alpha", default="1")
    p.add_argument("--beta", default="1")

    p = sub.add_parser("prefix", parents=[common], help="solve a prefix problem")
    p.add_argument("--instance", required=True)
    p.add_argument("--threshold")
    p.add_argument("--mode", default="pseudo", choices=["pseudo", "poly"])

    p = sub.add_parser("generate", parents=[common], help="write a generated instance")
    p.add_argument("kind", choices=sorted(_GENERATORS))
    p.add_argument("--source", help="JSON input for sscover / subsetsum")
    p.add_argument("--values", help="subsetsum values, comma separated")
    p.add_argument("--target")
    p.add_argument("--c", default="1")
    p.add_argument("--instance", help="knapdec base knapsack")
    p.add_argument("--threshold")
    p.add_argument("--alpha", default="1")
    p.add_argument("--beta", default="1")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--weight-cap", type=int, default=15)
    p.add_argument("--upper-cap", type=int, default=50)
    return parser


_COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "prefix": cmd_prefix}


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s",
                        stream=sys.stderr)
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        if args.command == "generate":
            _emit(cmd_generate(args), args.out)
            return EXIT_OK
        report, code = _COMMANDS[args.command](args)
    except _Exit as exc:
        log.error("%s", exc)
        return exc.code
    except (StructuralError, ParameterError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except RefusalError as exc:
        log.error("%s", exc)
        return EXIT_REFUSED
    except KnapExpError as exc:  # pragma: no cover - every subclass is handled above
        log.error("%s", exc)
        return EXIT_INPUT
    report = {"command": args.command, "argv": argv, "seed": args.seed, **report}
    if args.timings:
        report["timings"] = {"total_seconds": round(time.perf_counter() - start, 6)}
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
