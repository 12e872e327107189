"""Completeness reasoning relative to a concrete available database.

With the available instance fixed, entailment quantifies only over ideal
extensions of it.  It suffices to check the minimal extensions d + v(body):
the valuation v ranges over the constants of the inputs plus a bounded pool
of fresh values (one per query variable; order representatives fill the gaps
when comparisons are present).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence

from .containment import DEFAULT_PARTITION_LIMIT, _realize_blocks, reduce_query
from .errors import InputError, LimitExceeded, ReasoningError
from .model import (
    Atom,
    ConjunctiveQuery,
    Const,
    DatabaseInstance,
    IncompleteDatabase,
    TCStatement,
    Term,
    Var,
    Verdict,
    const_order_key,
    evaluate,
    satisfies_tc,
    tuple_sort_key,
)


def _constant_pool(known: Iterable[Const], fresh: int, with_gaps: bool) -> list:
    """The constants of the inputs plus fresh values.  Without comparisons
    any distinct fresh values do; with comparisons every order position
    relative to the known constants must be represented, so each gap gets
    `fresh` values."""
    consts = sorted(set(known), key=const_order_key)
    if not with_gaps:
        base = max(
            (c.value for c in consts if not c.is_string), default=Fraction(0)
        )
        return consts + [Const(base + i + 1) for i in range(fresh)]
    anchors: list = []
    for c in consts:
        anchors.extend([None] * fresh)
        anchors.append(c)
    anchors.extend([None] * fresh)
    values = _realize_blocks([()] * len(anchors), anchors)
    return values


def _extension_valuations(
    variables: Sequence[Var], pool: Sequence[Const], limit: int
) -> Iterator[dict]:
    total = len(pool) ** len(variables) if variables else 1
    if total > limit:
        raise LimitExceeded(
            f"instance-reasoning enumeration of {total} extensions exceeds {limit}"
        )
    for values in product(pool, repeat=len(variables)):
        yield dict(zip(variables, values))


def _gather_constants(
    d: DatabaseInstance,
    q: ConjunctiveQuery,
    statements: Sequence[TCStatement] = (),
    queries: Sequence[ConjunctiveQuery] = (),
) -> set:
    out = set(d.constants()) | q.constants()
    for c in statements:
        out |= c.associated_query().constants()
    for pq in queries:
        out |= pq.constants()
    return out


def _needs_gaps(q, statements=(), queries=()):
    if any(c.op != "=" for c in q.body.comparisons):
        return True
    if any(cmp.op != "=" for c in statements for cmp in c.condition.comparisons):
        return True
    return any(cmp.op != "=" for pq in queries for cmp in pq.body.comparisons)


def tc_qc_instance(
    d: DatabaseInstance,
    statements: Sequence[TCStatement],
    q: ConjunctiveQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Given the available instance d, do the statements guarantee that q is
    complete?  Holds iff no statement-satisfying minimal ideal extension of d
    changes q's answer."""
    if d.has_nulls():
        raise ReasoningError("instance reasoning expects a null-free instance")
    reduced = reduce_query(q)
    if not reduced.satisfiable:
        return Verdict(True, {"kind": "certificate", "note": "query unsatisfiable"})
    qr = reduced.query
    statements = list(statements)
    base = evaluate(qr, d)
    variables = sorted(qr.body.variables(), key=lambda v: v.name)
    pool = _constant_pool(
        _gather_constants(d, qr, statements),
        len(variables),
        _needs_gaps(qr, statements),
    )
    for v in _extension_valuations(variables, pool, limit):
        added = {a.substitute(v) for a in qr.body.atoms} - d.facts
        if not added:
            continue
        ideal = d.union(DatabaseInstance(added))
        idb = IncompleteDatabase(ideal, d)
        if not all(satisfies_tc(idb, c) for c in statements):
            continue
        if evaluate(qr, ideal) != base:
            return Verdict(
                False,
                {"kind": "counterexample", "ideal": ideal, "available": d},
                counterexample=idb,
            )
    return Verdict(True, {"kind": "certificate", "pool": len(pool)})


def qc_qc_instance(
    d: DatabaseInstance,
    premise_queries: Sequence[ConjunctiveQuery],
    q: ConjunctiveQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Given the available instance d, does completeness of the premise
    queries entail completeness of q?  Holds iff every minimal ideal
    extension keeping all premise answers unchanged also keeps q's answer
    unchanged."""
    if d.has_nulls():
        raise ReasoningError("instance reasoning expects a null-free instance")
    reduced = reduce_query(q)
    if not reduced.satisfiable:
        return Verdict(True, {"kind": "certificate", "note": "query unsatisfiable"})
    qr = reduced.query
    premises = list(premise_queries)
    base = evaluate(qr, d)
    premise_base = [evaluate(p, d) for p in premises]
    variables = sorted(qr.body.variables(), key=lambda v: v.name)
    pool = _constant_pool(
        _gather_constants(d, qr, queries=premises),
        len(variables),
        _needs_gaps(qr, queries=premises),
    )
    for v in _extension_valuations(variables, pool, limit):
        added = {a.substitute(v) for a in qr.body.atoms} - d.facts
        if not added:
            continue
        ideal = d.union(DatabaseInstance(added))
        if any(
            evaluate(p, ideal) != answers
            for p, answers in zip(premises, premise_base)
        ):
            continue
        if evaluate(qr, ideal) != base:
            return Verdict(
                False,
                {"kind": "counterexample", "ideal": ideal, "available": d},
                counterexample=IncompleteDatabase(ideal, d),
            )
    return Verdict(True, {"kind": "certificate", "pool": len(pool)})


COMPLETE = "complete"
POSSIBLY_INCOMPLETE = "possibly-incomplete"


@dataclass(frozen=True)
class DimensionReport:
    """Per-dimension-value completeness verdicts plus whether values absent
    from the current answer could still appear."""

    per_value: dict
    new_values_possible: bool

    def values(self, status: str) -> list:
        return sorted(
            (t for t, s in self.per_value.items() if s == status),
            key=tuple_sort_key,
        )


def dimension_analysis(
    d: DatabaseInstance,
    statements: Sequence[TCStatement],
    q: ConjunctiveQuery,
    dims: Sequence[Var],
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> DimensionReport:
    """Which values of the chosen head variables already have complete
    answers, and can new values still show up?

    Step 1 projects the dimension over the available instance; step 2 decides
    instance completeness of the query with the dimension fixed to each
    value; step 3 probes constants of the instance plus fresh ones for
    possible additional values.
    """
    dims = list(dims)
    head_vars = q.head_variables()
    for v in dims:
        if v not in head_vars:
            raise InputError(f"dimension variable {v.name} is not a head variable")
    projection = ConjunctiveQuery(tuple(dims), q.body)
    current = evaluate(projection, d)
    per_value = {}
    for value in sorted(current, key=tuple_sort_key):
        fixed = q.substitute(dict(zip(dims, value)))
        verdict = tc_qc_instance(d, statements, fixed, limit=limit)
        per_value[value] = COMPLETE if verdict.holds else POSSIBLY_INCOMPLETE

    candidate_pool = _constant_pool(
        _gather_constants(d, q, statements),
        len(dims),
        _needs_gaps(q, statements),
    )
    new_possible = False
    for candidate in product(candidate_pool, repeat=len(dims)):
        if candidate in current:
            continue
        fixed = q.substitute(dict(zip(dims, candidate)))
        if not tc_qc_instance(d, statements, fixed, limit=limit).holds:
            new_possible = True
            break
    return DimensionReport(per_value, new_possible)
