"""Entailment between completeness statements: TC-TC, TC-QC under bag and
set semantics, weakest preconditions, and QC-QC under bag semantics.

TC-TC entailment is union containment of the associated queries.  Bag
completeness of a query is characterized by its canonical statements, so
TC-QC under bag semantics reduces to TC-TC.  Under set semantics the check
runs over test databases: the restriction of a query to the asserted-complete
parts is never materialized as a formula; instead the T_C transformation is
applied to each test database and the query evaluated over the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .containment import (
    DEFAULT_PARTITION_LIMIT,
    contained,
    minimize,
    reduce_query,
    representative_valuations,
)
from .errors import ReasoningError, Refusal
from .model import (
    Atom,
    Condition,
    ConjunctiveQuery,
    DatabaseInstance,
    IncompleteDatabase,
    NullPolicy,
    TCStatement,
    Verdict,
    evaluate,
    freeze,
    instantiate,
    satisfying_valuations,
)


@dataclass(frozen=True)
class CanonicalStatementSet:
    """One completeness statement per relational atom of a query, each
    conditioned on the remaining atoms plus the query's comparisons."""

    statements: tuple
    is_weakest_precondition: bool = False

    def __iter__(self):
        return iter(self.statements)

    def __len__(self):
        return len(self.statements)


def canonical_statements(q: ConjunctiveQuery) -> CanonicalStatementSet:
    atoms = q.body.atoms
    stmts = []
    for i, atom in enumerate(atoms):
        rest = atoms[:i] + atoms[i + 1:]
        stmts.append(TCStatement(atom, Condition(rest, q.body.comparisons)))
    return CanonicalStatementSet(tuple(stmts))


def t_c(statements: Iterable[TCStatement], d: DatabaseInstance) -> DatabaseInstance:
    """Apply the completeness transformation: the facts any available
    instance must contain so that (d, result) satisfies the statements.
    Only projection-free statements; the projection variant lives in the
    nulls module."""
    out = set()
    for c in statements:
        if c.projection is not None:
            raise ReasoningError("t_c is defined for projection-free statements")
        qc = c.associated_query()
        for v in satisfying_valuations(qc.body, d, NullPolicy.FORBID):
            out.add(Atom(c.relation, instantiate(c.head.args, v)))
    return DatabaseInstance(out)


def _order_free(statements: Iterable[TCStatement]) -> bool:
    """No order comparisons in any statement condition (equalities are fine:
    they evaluate over frozen constants)."""
    return all(
        cmp.op == "="
        for c in statements
        for cmp in c.condition.comparisons
    )


def _statement_constants(statements: Iterable[TCStatement]) -> set:
    out = set()
    for c in statements:
        out |= c.associated_query().constants()
    return out


def tc_tc(
    premises: Sequence[TCStatement],
    goal: TCStatement,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Do the premises entail the goal statement?  Equivalent to containment
    of the goal's associated query in the union of the associated queries of
    the same-relation premises."""
    relevant = [c for c in premises if c.relation == goal.relation]
    goal_query = goal.associated_query()
    if not relevant:
        verdict = None
    else:
        verdict = contained(goal_query, [c.associated_query() for c in relevant], limit=limit)
        if verdict.holds:
            return verdict
    # counterexample: the failing test database loses exactly the goal's
    # constrained fact in its available version
    if verdict is None:
        reduced = reduce_query(goal_query)
        if not reduced.satisfiable:
            return Verdict(True, {"kind": "certificate", "note": "goal constrains nothing"})
        qg = reduced.query
        if qg.is_relational:
            db, assignment = freeze(qg.body)
        else:
            assignment = _generic_assignment(qg, limit)
            db = DatabaseInstance(a.substitute(assignment) for a in qg.body.atoms)
        target = instantiate(qg.head, assignment)
    else:
        db = verdict.witness["database"]
        target = verdict.witness["tuple"]
    missing = Atom(goal.relation, target)
    counter = IncompleteDatabase(db, db.minus([missing]))
    return Verdict(
        False,
        {"kind": "counterexample", "ideal": counter.ideal, "available": counter.available},
        counterexample=counter,
    )


def tc_qc_bag(
    premises: Sequence[TCStatement],
    q: ConjunctiveQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Bag-semantics completeness entailment: the premises must entail every
    canonical statement of the query."""
    for stmt in canonical_statements(q):
        verdict = tc_tc(premises, stmt, limit=limit)
        if not verdict.holds:
            return verdict
    return Verdict(True, {"kind": "certificate", "note": "all canonical statements entailed"})


def _generic_assignment(q: ConjunctiveQuery, limit: int) -> dict:
    """An order-consistent valuation keeping all variables (and constants)
    pairwise distinct; exists whenever the reduced comparisons are
    satisfiable."""
    variables = sorted(q.variables(), key=lambda v: v.name)
    constants = q.constants()
    total = len(variables) + len(constants)
    for rv in representative_valuations(
        variables, constants, q.body.comparisons, limit=limit
    ):
        if len(rv.blocks) == total:
            return rv.assignment
    raise ReasoningError("no generic valuation: comparisons force equalities")


def tc_qc_set(
    premises: Sequence[TCStatement],
    q: ConjunctiveQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Set-semantics completeness entailment, decided over test databases:
    the query's answer tuple must be recovered after restricting each test
    database to its premise-complete part.

    A single frozen body suffices when the statements are order-free and the
    query is order-free or linear; otherwise one test database per
    representative valuation of the query's variables is checked.
    """
    reduced = reduce_query(q)
    if not reduced.satisfiable:
        raise ReasoningError("completeness of an unsatisfiable query is vacuous")
    qr = reduced.query
    premises = list(premises)

    def check_db(db: DatabaseInstance, target: tuple, probe: ConjunctiveQuery) -> Optional[Verdict]:
        restricted = t_c(premises, db)
        if target in evaluate(probe, restricted):
            return None
        counter = IncompleteDatabase(db, restricted)
        return Verdict(
            False,
            {"kind": "counterexample", "ideal": db, "available": restricted},
            counterexample=counter,
        )

    if _order_free(premises) and (qr.is_relational or qr.is_linear):
        # single test database: frozen body, or an order-consistent
        # all-distinct instantiation when the linear query has comparisons
        # (the identity valuation is then the only candidate match)
        if qr.is_relational:
            db, assignment = freeze(qr.body)
        else:
            assignment = _generic_assignment(qr, limit)
            db = DatabaseInstance(a.substitute(assignment) for a in qr.body.atoms)
        failure = check_db(db, instantiate(qr.head, assignment), qr)
        if failure is not None:
            return failure
        return Verdict(True, {"kind": "certificate", "tests": 1})

    variables = sorted(qr.variables(), key=lambda v: v.name)
    constants = qr.constants() | _statement_constants(premises)
    tests = 0
    for rv in representative_valuations(
        variables, constants, qr.body.comparisons, limit=limit
    ):
        tests += 1
        db = DatabaseInstance(a.substitute(rv.assignment) for a in qr.body.atoms)
        failure = check_db(db, instantiate(qr.head, rv.assignment), qr)
        if failure is not None:
            return failure
    return Verdict(True, {"kind": "certificate", "tests": tests})


def weakest_precondition(
    q: ConjunctiveQuery, limit: int = DEFAULT_PARTITION_LIMIT
) -> CanonicalStatementSet:
    """For a minimal relational query, its canonical statements are not just
    sufficient but necessary for set-semantics completeness.  Outside that
    fragment the characterization is unproven, so the call refuses."""
    if q.body.comparisons:
        raise Refusal(
            "weakest preconditions are only characterized for relational queries"
        )
    if len(minimize(q, limit=limit).body.atoms) != len(q.body.atoms):
        raise Refusal("weakest preconditions require a minimal query")
    base = canonical_statements(q)
    return CanonicalStatementSet(base.statements, is_weakest_precondition=True)


def qc_qc_bag(
    premise_queries: Sequence[ConjunctiveQuery],
    q: ConjunctiveQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Bag-semantics query-completeness entailment between queries: the union
    of the premises' canonical statements must entail each canonical
    statement of the goal query."""
    premises = []
    for pq in premise_queries:
        premises.extend(canonical_statements(pq).statements)
    for stmt in canonical_statements(q):
        verdict = tc_tc(premises, stmt, limit=limit)
        if not verdict.holds:
            return verdict
    return Verdict(True, {"kind": "certificate", "note": "all canonical statements entailed"})
