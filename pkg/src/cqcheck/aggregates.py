"""Completeness entailment for COUNT, SUM, MIN and MAX aggregate queries.

A count is complete exactly when the core query is complete under bag
semantics.  The same holds for reduced nonnegative sum queries against
order-free statement sets.  Max queries are characterized by dominance of
the core by its restriction to the asserted-complete parts; min is max under
the reversed order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .containment import (
    DEFAULT_PARTITION_LIMIT,
    contained,
    entails_comparison,
    reduce_query,
    representative_valuations,
)
from .completeness import _order_free, _statement_constants, t_c, tc_qc_bag
from .errors import InputError, ReasoningError, Refusal
from .model import (
    Const,
    DatabaseInstance,
    ConjunctiveQuery,
    NullPolicy,
    TCStatement,
    Var,
    Verdict,
    freeze,
    instantiate,
    order_holds,
    satisfying_valuations,
)

AGGREGATE_FUNCTIONS = ("count", "sum", "max", "min")


@dataclass(frozen=True)
class AggregateQuery:
    """An aggregate query: grouping head terms plus an aggregate over the
    core's last head term (none for count)."""

    core: ConjunctiveQuery
    function: str

    def __post_init__(self):
        if self.function not in AGGREGATE_FUNCTIONS:
            raise InputError(f"unknown aggregate function {self.function!r}")
        if self.function != "count" and not self.core.head:
            raise InputError(f"{self.function} queries aggregate the last head term")

    @property
    def grouping(self) -> tuple:
        if self.function == "count":
            return self.core.head
        return self.core.head[:-1]

    @property
    def aggregated(self):
        if self.function == "count":
            return None
        return self.core.head[-1]


def tc_qc_count(
    statements: Sequence[TCStatement],
    qa: AggregateQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """A count is correct iff the core retrieves all tuples, i.e. iff the
    core is complete under bag semantics."""
    if qa.function != "count":
        raise ReasoningError("tc_qc_count expects a count query")
    return tc_qc_bag(statements, qa.core, limit=limit)


def tc_qc_sum(
    statements: Sequence[TCStatement],
    qa: AggregateQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Sum-query completeness for reduced nonnegative sums over order-free
    statements; anything else is refused (missing zero contributions could
    go unnoticed)."""
    if qa.function != "sum":
        raise ReasoningError("tc_qc_sum expects a sum query")
    if not _order_free(statements):
        raise Refusal("sum-query entailment needs statements without order comparisons")
    reduced = reduce_query(qa.core)
    if not reduced.satisfiable:
        raise ReasoningError("completeness of an unsatisfiable query is vacuous")
    core = reduced.query
    y = core.head[-1]
    if isinstance(y, Var):
        if not entails_comparison(core.body.comparisons, Const(0), "<=", y):
            raise Refusal("sum-query entailment needs a provably nonnegative summand")
    elif not order_holds(Const(0), "<=", y):
        raise Refusal("sum-query entailment needs a provably nonnegative summand")
    return tc_qc_bag(statements, core, limit=limit)


def _dominance_hit(db, target, container, reverse, exact=False):
    """A valuation of the container over db matching the grouping part of the
    target and beating its aggregated component.  With `exact` the aggregated
    component must match instead (the relational case, where dominance and
    containment coincide and test databases hold unordered frozen constants).
    """
    grouping, bound = target[:-1], target[-1]
    prebound = {}
    for t, value in zip(container.head[:-1], grouping):
        if isinstance(t, Var):
            if prebound.get(t, value) != value:
                return None
            prebound[t] = value
        elif t != value:
            return None
    y2 = container.head[-1]
    for v in satisfying_valuations(container.body, db, NullPolicy.FORBID, prebound):
        candidate = v.get(y2, y2)
        if exact:
            ok = candidate == bound
        elif reverse:
            ok = order_holds(candidate, "<=", bound)
        else:
            ok = order_holds(bound, "<=", candidate)
        if ok:
            return {"valuation": {var.name: v[var] for var in sorted(v, key=lambda x: x.name)}}
    return None


def dominated(
    q1: ConjunctiveQuery,
    q2: ConjunctiveQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
    reverse: bool = False,
) -> Verdict:
    """Is q1 dominated by q2: over every instance, does each q1-answer
    (group, y) have a q2-answer (group, y') with y <= y'  (>= when
    reversed)?  Coincides with containment on relational queries; with
    comparisons it is decided per representative valuation."""
    if len(q1.head) != len(q2.head):
        raise InputError("dominance needs queries of equal head arity")
    if not q1.head:
        raise InputError("dominance compares queries with an aggregated head term")
    r1 = reduce_query(q1)
    if not r1.satisfiable:
        return Verdict(True, {"kind": "certificate", "note": "dominee unsatisfiable"})
    r2 = reduce_query(q2)
    if not r2.satisfiable:
        db, fmap = freeze(r1.query.body)
        return Verdict(False, {"kind": "counterexample", "database": db,
                               "tuple": instantiate(r1.query.head, fmap)})
    if r1.query.is_relational and r2.query.is_relational:
        return contained(r1.query, [r2.query], limit=limit)

    containee, container = r1.query, r2.query
    variables = sorted(containee.variables(), key=lambda v: v.name)
    constants = containee.constants() | container.constants()
    tests = 0
    for rv in representative_valuations(
        variables, constants, containee.body.comparisons, limit=limit
    ):
        tests += 1
        db = DatabaseInstance(a.substitute(rv.assignment) for a in containee.body.atoms)
        target = instantiate(containee.head, rv.assignment)
        if _dominance_hit(db, target, container, reverse) is None:
            return Verdict(False, {"kind": "counterexample", "database": db, "tuple": target})
    return Verdict(True, {"kind": "certificate", "tests": tests})


def tc_qc_max(
    statements: Sequence[TCStatement],
    qa: AggregateQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Max (min) query completeness: the core must be dominated by its
    restriction to the statement-complete parts.  Decided operationally:
    instantiate the core body, apply the completeness transformation, and
    look for a dominating valuation of the core over the result."""
    if qa.function not in ("max", "min"):
        raise ReasoningError("tc_qc_max expects a max or min query")
    reverse = qa.function == "min"
    reduced = reduce_query(qa.core)
    if not reduced.satisfiable:
        raise ReasoningError("completeness of an unsatisfiable query is vacuous")
    core = reduced.query
    statements = list(statements)

    def check_db(db: DatabaseInstance, target: tuple, exact: bool = False):
        restricted = t_c(statements, db)
        return _dominance_hit(restricted, target, core, reverse, exact)

    if _order_free(statements) and core.is_relational:
        db, fmap = freeze(core.body)
        target = instantiate(core.head, fmap)
        if check_db(db, target, exact=True) is None:
            return Verdict(False, {"kind": "counterexample", "database": db, "tuple": target})
        return Verdict(True, {"kind": "certificate", "tests": 1})

    variables = sorted(core.variables(), key=lambda v: v.name)
    constants = core.constants() | _statement_constants(statements)
    tests = 0
    for rv in representative_valuations(
        variables, constants, core.body.comparisons, limit=limit
    ):
        tests += 1
        db = DatabaseInstance(a.substitute(rv.assignment) for a in core.body.atoms)
        target = instantiate(core.head, rv.assignment)
        if check_db(db, target) is None:
            return Verdict(False, {"kind": "counterexample", "database": db, "tuple": target})
    return Verdict(True, {"kind": "certificate", "tests": tests})
