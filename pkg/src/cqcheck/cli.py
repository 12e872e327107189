"""Command-line entry point: route workspace files to the reasoning
operations and emit JSON verdicts.

Exit codes: 0 the checked property holds, 1 it does not, 2 error (including
usage errors and refusals)."""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import adversarial
from .aggregates import AGGREGATE_FUNCTIONS, AggregateQuery, tc_qc_count, tc_qc_max, tc_qc_sum
from .completeness import qc_qc_bag, tc_qc_bag, tc_qc_set, tc_tc, weakest_precondition
from .containment import DEFAULT_PARTITION_LIMIT, contained
from .errors import CqcheckError, Refusal
from .instances import dimension_analysis, qc_qc_instance, tc_qc_instance
from .model import Var, Verdict
from .nulls import tc_qc_nulls
from .parser import (
    emit_statement,
    emit_workspace,
    parse_workspace,
    verdict_to_dict,
    _jsonify,
)
from .process import design_time_verify, runtime_verify


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", dest="human", action="store_false", default=False,
                        help="JSON output (default)")
    common.add_argument("--human", dest="human", action="store_true",
                        help="one-line human-readable output")
    common.add_argument("--limit", type=int, default=DEFAULT_PARTITION_LIMIT,
                        help="enumeration cap for representative valuations")
    top = argparse.ArgumentParser(
        prog="cqcheck",
        description="completeness reasoning for conjunctive queries",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def cmd(name, **kwargs):
        p = sub.add_parser(name, parents=[common], **kwargs)
        return p

    p = cmd("check-containment", help="query contained in a union of queries")
    p.add_argument("workspace")
    p.add_argument("--query", required=True)
    p.add_argument("--union", required=True, help="comma-separated query names")

    p = cmd("check-tctc", help="statements entail another statement")
    p.add_argument("workspace")
    p.add_argument("--statements", help="premise names (default: all but the goal)")
    p.add_argument("--goal", required=True)

    p = cmd("check-tcqc", help="statements entail query completeness")
    p.add_argument("workspace")
    p.add_argument("--semantics", choices=("set", "bag"), default="set")
    p.add_argument("--statements", help="premise names (default: all)")
    p.add_argument("--query", required=True)

    p = cmd("check-qcqc-bag", help="query completeness entails query completeness (bag)")
    p.add_argument("workspace")
    p.add_argument("--premises", required=True, help="comma-separated query names")
    p.add_argument("--query", required=True)

    p = cmd("check-aggregate", help="statements entail aggregate-query completeness")
    p.add_argument("workspace")
    p.add_argument("--fn", choices=AGGREGATE_FUNCTIONS, required=True)
    p.add_argument("--statements", help="premise names (default: all)")
    p.add_argument("--query", required=True,
                   help="core query; for sum/max/min the last head term is aggregated")

    p = cmd("check-tcqc-instance", help="statements entail completeness given the instance")
    p.add_argument("workspace")
    p.add_argument("--instance", required=True)
    p.add_argument("--statements", help="premise names (default: all)")
    p.add_argument("--query", required=True)

    p = cmd("check-qcqc-instance", help="query completeness entailment given the instance")
    p.add_argument("workspace")
    p.add_argument("--instance", required=True)
    p.add_argument("--premises", required=True)
    p.add_argument("--query", required=True)

    p = cmd("dimension-analysis", help="per-value completeness of a query dimension")
    p.add_argument("workspace")
    p.add_argument("--instance", required=True)
    p.add_argument("--statements", help="premise names (default: all)")
    p.add_argument("--query", required=True)
    p.add_argument("--dims", required=True, help="comma-separated head variables")

    p = cmd("check-tcqc-nulls", help="completeness entailment over databases with nulls")
    p.add_argument("workspace")
    p.add_argument("--regime", choices=("inc", "res", "3null"), required=True)
    p.add_argument("--semantics", choices=("set", "bag"), default="set")
    p.add_argument("--statements", help="premise names (default: all)")
    p.add_argument("--query", required=True)

    p = cmd("verify-design", help="query completeness in a process state")
    p.add_argument("workspace")
    p.add_argument("--state", required=True)
    p.add_argument("--query", required=True)

    p = cmd("verify-runtime", help="query completeness after an executed path")
    p.add_argument("workspace")
    p.add_argument("--path", required=True, help="comma-separated action names")
    p.add_argument("--query", required=True)

    p = cmd("weakest-precondition", help="characterizing statements of a query")
    p.add_argument("workspace")
    p.add_argument("--query", required=True)

    p = cmd("gen-adversarial", help="generate a hard containment instance")
    p.add_argument("--kind", choices=adversarial.KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clauses", type=int, default=3)
    p.add_argument("--props", type=int, default=4)
    p.add_argument("--universals", type=int, default=1,
                   help="universally quantified propositions (forall-exists only)")

    return top


def _load(args):
    with open(args.workspace, encoding="utf-8") as f:
        return parse_workspace(f.read())


def _names(raw):
    return [n.strip() for n in raw.split(",") if n.strip()]


def _pick_statements(ws, raw, exclude=()):
    if raw is None:
        return [s for n, s in ws.statements.items() if n not in exclude]
    return [ws.statement(n) for n in _names(raw)]


def _emit(verdict: Verdict, human: bool) -> int:
    if human:
        print("holds" if verdict.holds else "does not hold")
    else:
        print(json.dumps(verdict_to_dict(verdict), sort_keys=True, indent=2))
    return 0 if verdict.holds else 1


def _run(args) -> int:
    if args.command == "gen-adversarial":
        rng = random.Random(args.seed)
        universals = args.universals if args.kind == "forall-exists" else 0
        formula = adversarial.random_formula(
            rng, clauses=args.clauses, propositions=args.props, universals=universals
        )
        containee, union, expected = adversarial.adversarial_instance(args.kind, formula)
        from .parser import Workspace

        ws = Workspace()
        for q in [containee] + union:
            for a in q.body.atoms:
                ws.schema.setdefault(a.relation, a.arity)
        ws.queries["Q0"] = containee
        for i, u in enumerate(union, start=1):
            ws.queries[f"U{i}"] = u
        inner = "&" if args.kind == "3unsat" else "|"
        outer = "|" if args.kind == "3unsat" else "&"
        print(json.dumps({
            "kind": args.kind,
            "formula": formula.render(inner, outer),
            "universals": list(formula.universals),
            "query": "Q0",
            "union": [f"U{i}" for i in range(1, len(union) + 1)],
            "expected_containment": expected,
            "workspace": emit_workspace(ws),
        }, sort_keys=True, indent=2))
        return 0

    ws = _load(args)

    if args.command == "check-containment":
        verdict = contained(
            ws.query(args.query),
            [ws.query(n) for n in _names(args.union)],
            limit=args.limit,
        )
        return _emit(verdict, args.human)

    if args.command == "check-tctc":
        goal = ws.statement(args.goal)
        premises = _pick_statements(ws, args.statements, exclude={args.goal})
        return _emit(tc_tc(premises, goal, limit=args.limit), args.human)

    if args.command == "check-tcqc":
        premises = _pick_statements(ws, args.statements)
        q = ws.query(args.query)
        check = tc_qc_set if args.semantics == "set" else tc_qc_bag
        return _emit(check(premises, q, limit=args.limit), args.human)

    if args.command == "check-qcqc-bag":
        verdict = qc_qc_bag(
            [ws.query(n) for n in _names(args.premises)],
            ws.query(args.query),
            limit=args.limit,
        )
        return _emit(verdict, args.human)

    if args.command == "check-aggregate":
        premises = _pick_statements(ws, args.statements)
        qa = AggregateQuery(ws.query(args.query), args.fn)
        if args.fn == "count":
            verdict = tc_qc_count(premises, qa, limit=args.limit)
        elif args.fn == "sum":
            verdict = tc_qc_sum(premises, qa, limit=args.limit)
        else:
            verdict = tc_qc_max(premises, qa, limit=args.limit)
        return _emit(verdict, args.human)

    if args.command == "check-tcqc-instance":
        verdict = tc_qc_instance(
            ws.instance(args.instance),
            _pick_statements(ws, args.statements),
            ws.query(args.query),
            limit=args.limit,
        )
        return _emit(verdict, args.human)

    if args.command == "check-qcqc-instance":
        verdict = qc_qc_instance(
            ws.instance(args.instance),
            [ws.query(n) for n in _names(args.premises)],
            ws.query(args.query),
            limit=args.limit,
        )
        return _emit(verdict, args.human)

    if args.command == "dimension-analysis":
        report = dimension_analysis(
            ws.instance(args.instance),
            _pick_statements(ws, args.statements),
            ws.query(args.query),
            [Var(n) for n in _names(args.dims)],
            limit=args.limit,
        )
        payload = {
            "per_value": {
                ", ".join(_jsonify(t) for t in value): status
                for value, status in sorted(report.per_value.items(), key=str)
            },
            "new_values_possible": report.new_values_possible,
        }
        print(json.dumps(payload, sort_keys=True, indent=2))
        return 0

    if args.command == "check-tcqc-nulls":
        verdict = tc_qc_nulls(
            _pick_statements(ws, args.statements),
            ws.query(args.query),
            args.regime,
            args.semantics,
            keys=ws.keys,
        )
        return _emit(verdict, args.human)

    if args.command == "verify-design":
        if ws.qats is None:
            raise CqcheckError("workspace declares no transition system")
        verdict = design_time_verify(ws.qats, args.state, ws.query(args.query), limit=args.limit)
        return _emit(verdict, args.human)

    if args.command == "verify-runtime":
        if ws.qats is None:
            raise CqcheckError("workspace declares no transition system")
        verdict = runtime_verify(ws.qats, _names(args.path), ws.query(args.query), limit=args.limit)
        return _emit(verdict, args.human)

    if args.command == "weakest-precondition":
        statements = weakest_precondition(ws.query(args.query), limit=args.limit)
        print(json.dumps({
            "weakest_precondition": True,
            "statements": [
                emit_statement(f"W{i}", s)
                for i, s in enumerate(statements, start=1)
            ],
        }, sort_keys=True, indent=2))
        return 0

    raise CqcheckError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return _run(args)
    except Refusal as e:
        print(json.dumps({"refused": str(e)}, sort_keys=True, indent=2))
        return 2
    except CqcheckError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
