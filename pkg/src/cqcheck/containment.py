"""Containment of a conjunctive query in a union of conjunctive queries,
query minimization, and representative-valuation enumeration.

A relational containee against relational containers is decided on a single
frozen test database.  As soon as comparisons are involved anywhere, one test
database per representative valuation is used: a representative valuation
fixes one consistent linear ordering of the containee's variables and the
mentioned constants, realizing it with concrete domain values (density lets
variables interleave the constants).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .errors import InputError, LimitExceeded, ReasoningError
from .model import (
    Atom,
    Comparison,
    Condition,
    ConjunctiveQuery,
    Const,
    DatabaseInstance,
    NullPolicy,
    Term,
    Var,
    Verdict,
    const_order_key,
    freeze,
    instantiate,
    satisfying_valuations,
)

DEFAULT_PARTITION_LIMIT = 10**6


# ---------------------------------------------------------------------------
# Order-constraint analysis (satisfiability, forced equalities)
# ---------------------------------------------------------------------------

class OrderAnalysis:
    """Reachability closure of the order constraints in a comparison set.

    Nodes are the variables and constants mentioned in the comparisons;
    constants are additionally related according to the domain order.
    """

    def __init__(self, comparisons: Sequence[Comparison]):
        nodes = set()
        for c in comparisons:
            nodes.add(c.left)
            nodes.add(c.right)
        self.nodes = sorted(nodes, key=repr)
        idx = {t: i for i, t in enumerate(self.nodes)}
        n = len(self.nodes)
        reach = [[False] * n for _ in range(n)]
        strict = [[False] * n for _ in range(n)]
        for i in range(n):
            reach[i][i] = True

        def edge(a, b, is_strict):
            reach[idx[a]][idx[b]] = True
            if is_strict:
                strict[idx[a]][idx[b]] = True

        for c in comparisons:
            if c.op == "=":
                edge(c.left, c.right, False)
                edge(c.right, c.left, False)
            elif c.op == "<":
                edge(c.left, c.right, True)
            else:
                edge(c.left, c.right, False)
        consts = [t for t in self.nodes if isinstance(t, Const)]
        for a, b in itertools.combinations(consts, 2):
            lo, hi = (a, b) if const_order_key(a) < const_order_key(b) else (b, a)
            edge(lo, hi, True)

        # transitive closure; strict propagates through any reachable path
        changed = True
        while changed:
            changed = False
            for k in range(n):
                for i in range(n):
                    if not reach[i][k]:
                        continue
                    rik, sik = reach[i][k], strict[i][k]
                    row_k_reach, row_k_strict = reach[k], strict[k]
                    row_i_reach, row_i_strict = reach[i], strict[i]
                    for j in range(n):
                        if row_k_reach[j]:
                            if not row_i_reach[j]:
                                row_i_reach[j] = True
                                changed = True
                            if (sik or row_k_strict[j]) and not row_i_strict[j]:
                                row_i_strict[j] = True
                                changed = True
        self._idx = idx
        self._reach = reach
        self._strict = strict
        self.satisfiable = all(not strict[i][i] for i in range(n))
        if self.satisfiable:
            for a, b in itertools.combinations(consts, 2):
                if self._forced_equal(a, b):
                    self.satisfiable = False
                    break

    def _forced_equal(self, a, b) -> bool:
        i, j = self._idx[a], self._idx[b]
        return self._reach[i][j] and self._reach[j][i]

    def equality_classes(self) -> list:
        classes, assigned = [], {}
        for t in self.nodes:
            rep = None
            for u in assigned:
                if self._forced_equal(t, u):
                    rep = assigned[u]
                    break
            if rep is None:
                rep = len(classes)
                classes.append([])
            classes[rep].append(t)
            assigned[t] = rep
        return classes


def comparisons_satisfiable(comparisons: Sequence[Comparison]) -> bool:
    return OrderAnalysis(comparisons).satisfiable


def entails_comparison(comparisons: Sequence[Comparison], left: Term, op: str, right: Term) -> bool:
    """Does the comparison set entail `left op right`?  Checked by refuting
    the negation: M |= s<t iff M & t<=s is unsatisfiable, and so on."""
    if op == "<":
        negated = Comparison(right, "<=", left)
    elif op == "<=":
        negated = Comparison(right, "<", left)
    elif op == "=":
        return not (
            comparisons_satisfiable(tuple(comparisons) + (Comparison(left, "<", right),))
            or comparisons_satisfiable(tuple(comparisons) + (Comparison(right, "<", left),))
        )
    else:
        raise InputError(f"unsupported comparison operator {op!r}")
    return not comparisons_satisfiable(tuple(comparisons) + (negated,))


@dataclass(frozen=True)
class ReducedQuery:
    query: ConjunctiveQuery
    satisfiable: bool
    merged: dict  # original variable -> representative term


def reduce_query(q: ConjunctiveQuery) -> ReducedQuery:
    """Merge terms the comparisons force equal and drop comparisons that the
    merging made trivial.  The result mentions s=t only when syntactically
    equal, i.e. it is reduced; order comparisons are kept."""
    analysis = OrderAnalysis(q.body.comparisons)
    if not analysis.satisfiable:
        return ReducedQuery(q, False, {})
    mapping = {}
    for cls in analysis.equality_classes():
        consts = [t for t in cls if isinstance(t, Const)]
        rep = consts[0] if consts else sorted(
            (t for t in cls if isinstance(t, Var)), key=lambda v: v.name
        )[0]
        for t in cls:
            if isinstance(t, Var) and t != rep:
                mapping[t] = rep
    kept = []
    for c in q.body.comparisons:
        left = mapping.get(c.left, c.left)
        right = mapping.get(c.right, c.right)
        if c.op == "=":
            continue  # both sides merged into one representative
        if left == right:
            if c.op == "<":
                return ReducedQuery(q, False, mapping)
            continue
        if isinstance(left, Const) and isinstance(right, Const):
            continue  # analysis already established these as true
        kept.append(Comparison(left, c.op, right))
    reduced = ConjunctiveQuery(
        tuple(mapping.get(t, t) for t in q.head),
        Condition(
            tuple(a.substitute(mapping) for a in q.body.atoms),
            tuple(kept),
        ),
    )
    return ReducedQuery(reduced, True, mapping)


# ---------------------------------------------------------------------------
# Representative valuations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RepresentativeValuation:
    """One consistent linear ordering of variables and constants (as an
    ordered partition into equality blocks) plus a concrete realization."""

    blocks: tuple  # tuple of tuples of terms, in ascending order
    assignment: dict  # Var -> Const realizing the ordering

    def substitute_condition(self, cond: Condition) -> Condition:
        return cond.substitute(self.assignment)


_GAP_CHAR = "\x00"  # reserved: rejected in input string literals


def _realize_blocks(blocks: Sequence[tuple], anchors: Sequence[Optional[Const]]) -> list:
    """Concrete ascending domain values, one per block.  Blocks holding a
    constant keep it; gap blocks get values squeezed in via density.  All
    rationals sort below all strings, so gaps adjacent to string constants
    are realized with reserved-character strings."""
    n = len(blocks)
    values: list = [None] * n
    anchored = [(i, c) for i, c in enumerate(anchors) if c is not None]
    if not anchored:
        return [Const(Fraction(i)) for i in range(n)]
    first_i, first_c = anchored[0]
    for k in range(first_i):
        if first_c.is_string:
            values[k] = Const(Fraction(k))  # rationals sort below all strings
        else:
            values[k] = Const(first_c.value - (first_i - k))
    for (i1, c1), (i2, c2) in zip(anchored, anchored[1:]):
        gap = i2 - i1 - 1
        if not gap:
            continue
        if not c1.is_string and not c2.is_string:
            step = (c2.value - c1.value) / (gap + 1)
            for j in range(1, gap + 1):
                values[i1 + j] = Const(c1.value + step * j)
        elif not c1.is_string and c2.is_string:
            for j in range(1, gap + 1):
                values[i1 + j] = Const(c1.value + j)
        else:
            for j in range(1, gap + 1):
                values[i1 + j] = Const(c1.value + _GAP_CHAR * j)
    last_i, last_c = anchored[-1]
    for j in range(1, n - last_i):
        if last_c.is_string:
            values[last_i + j] = Const(last_c.value + _GAP_CHAR * j)
        else:
            values[last_i + j] = Const(last_c.value + j)
    for i, c in anchored:
        values[i] = c
    return values


def representative_valuations(
    variables: Iterable[Var],
    constants: Iterable[Const],
    comparisons: Sequence[Comparison] = (),
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Iterator[RepresentativeValuation]:
    """Enumerate, duplicate-free, every ordering of the variables relative to
    each other and to the constants that is consistent with the comparisons.

    An unsatisfiable comparison set yields an empty stream.  Enumeration past
    `limit` ordered partitions raises LimitExceeded.
    """
    vars_ = sorted(set(variables), key=lambda v: v.name)
    consts = sorted(set(constants), key=const_order_key)
    if not comparisons_satisfiable(comparisons):
        return
    # every comparison constant must participate in the ordering
    extra = {
        t
        for c in comparisons
        for t in (c.left, c.right)
        if isinstance(t, Const) and t not in consts
    }
    consts = sorted(set(consts) | extra, key=const_order_key)

    blocks: list = [[c] for c in consts]
    anchors: list = list(consts)
    produced = 0

    def consistent() -> bool:
        pos = {}
        for i, block in enumerate(blocks):
            for t in block:
                pos[t] = i
        for c in comparisons:
            li, ri = pos[c.left], pos[c.right]
            if c.op == "=" and li != ri:
                return False
            if c.op == "<" and not li < ri:
                return False
            if c.op == "<=" and not li <= ri:
                return False
        return True

    def snapshots() -> RepresentativeValuation:
        values = _realize_blocks(blocks, anchors)
        assignment = {}
        for block, value in zip(blocks, values):
            for t in block:
                if isinstance(t, Var):
                    assignment[t] = value
        return RepresentativeValuation(
            tuple(tuple(b) for b in blocks), assignment
        )

    def insert(i: int) -> Iterator[RepresentativeValuation]:
        nonlocal produced
        if i == len(vars_):
            produced += 1
            if produced > limit:
                raise LimitExceeded(
                    f"representative-valuation enumeration exceeded {limit} partitions"
                )
            if consistent():
                yield snapshots()
            return
        v = vars_[i]
        for block in blocks:
            block.append(v)
            yield from insert(i + 1)
            block.pop()
        for pos in range(len(blocks) + 1):
            blocks.insert(pos, [v])
            anchors.insert(pos, None)
            yield from insert(i + 1)
            del blocks[pos]
            del anchors[pos]

    yield from insert(0)


# ---------------------------------------------------------------------------
# Containment
# ---------------------------------------------------------------------------

def _head_prebinding(container: ConjunctiveQuery, target: tuple) -> Optional[dict]:
    """Bindings forcing the container's head onto the target tuple, or None
    if the heads cannot match."""
    binding: dict = {}
    for t, value in zip(container.head, target):
        if isinstance(t, Var):
            if binding.get(t, value) != value:
                return None
            binding[t] = value
        elif t != value:
            return None
    return binding


def _container_hit(
    db: DatabaseInstance, target: tuple, containers: Sequence[tuple]
) -> Optional[dict]:
    for index, container in containers:
        prebound = _head_prebinding(container, target)
        if prebound is None:
            continue
        for v in satisfying_valuations(container.body, db, NullPolicy.FORBID, prebound):
            return {
                "container": index,
                "valuation": {var.name: v[var] for var in sorted(v, key=lambda x: x.name)},
            }
    return None


def contained(
    q1: ConjunctiveQuery,
    union: Sequence[ConjunctiveQuery],
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Is q1 contained, under set semantics, in the union of the given
    queries over every database instance?"""
    union = list(union)
    if not union:
        raise ReasoningError("containment needs a non-empty union of containers")
    for q2 in union:
        if len(q2.head) != len(q1.head):
            raise InputError(
                f"arity mismatch: containee has {len(q1.head)} head terms, "
                f"container has {len(q2.head)}"
            )
    r1 = reduce_query(q1)
    if not r1.satisfiable:
        return Verdict(True, {"kind": "certificate", "note": "containee unsatisfiable"})
    containee = r1.query
    containers = []
    for i, u in enumerate(union):
        ru = reduce_query(u)
        if ru.satisfiable:
            containers.append((i, ru.query))
    if not containers:
        db, fmap = freeze(containee.body)
        return Verdict(
            False,
            {"kind": "counterexample", "database": db,
             "tuple": instantiate(containee.head, fmap)},
        )

    relational = containee.is_relational and all(c.is_relational for _, c in containers)
    if relational:
        db, fmap = freeze(containee.body)
        target = instantiate(containee.head, fmap)
        hit = _container_hit(db, target, containers)
        if hit is None:
            return Verdict(
                False, {"kind": "counterexample", "database": db, "tuple": target}
            )
        return Verdict(True, {"kind": "certificate", "tests": 1, "example": hit})

    variables = sorted(containee.variables(), key=lambda v: v.name)
    constants = set(containee.constants())
    for _, c in containers:
        constants |= c.constants()
    tests = 0
    example = None
    for rv in representative_valuations(
        variables, constants, containee.body.comparisons, limit=limit
    ):
        tests += 1
        db = DatabaseInstance(
            a.substitute(rv.assignment) for a in containee.body.atoms
        )
        target = instantiate(containee.head, rv.assignment)
        hit = _container_hit(db, target, containers)
        if hit is None:
            return Verdict(
                False, {"kind": "counterexample", "database": db, "tuple": target}
            )
        if example is None:
            example = hit
    return Verdict(True, {"kind": "certificate", "tests": tests, "example": example})


def minimize(q: ConjunctiveQuery, limit: int = DEFAULT_PARTITION_LIMIT) -> ConjunctiveQuery:
    """Remove redundant relational atoms until none can be dropped without
    changing the query under set semantics.  Deterministic: atoms are tried
    in input order and the first removable one is removed each round."""
    if not reduce_query(q).satisfiable:
        raise ReasoningError("cannot minimize an unsatisfiable query")
    atoms = list(q.body.atoms)
    changed = True
    while changed:
        changed = False
        for i in range(len(atoms)):
            candidate_atoms = tuple(atoms[:i] + atoms[i + 1:])
            try:
                candidate = ConjunctiveQuery(
                    q.head, Condition(candidate_atoms, q.body.comparisons)
                )
            except InputError:
                continue  # removal breaks safety
            # dropping an atom only relaxes the query, so q is always
            # contained in the candidate; equivalence needs the converse
            if contained(candidate, [q], limit=limit).holds:
                atoms = list(candidate_atoms)
                changed = True
                break
    return ConjunctiveQuery(q.head, Condition(tuple(atoms), q.body.comparisons))
