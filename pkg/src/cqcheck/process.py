"""Quality-aware transition systems: processes whose actions create facts in
the real world (real-world effects) and copy facts into the information
system (copy effects).

A state is complete for a query when every realizable action sequence
leading to it repairs all its risky effects: whatever a risky effect may
have created that could influence the query is guaranteed to be copied by a
later action.  Cycles are handled through normal action sequences, which
keep only the last occurrence of each repeated action.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .containment import (
    DEFAULT_PARTITION_LIMIT,
    comparisons_satisfiable,
    contained,
    reduce_query,
    representative_valuations,
)
from .errors import InputError, LimitExceeded, ReasoningError
from .model import (
    Atom,
    Comparison,
    Condition,
    ConjunctiveQuery,
    DatabaseInstance,
    IncompleteDatabase,
    NullPolicy,
    Var,
    Verdict,
    check_condition_safety,
    evaluate,
    freeze,
    instantiate,
    satisfying_valuations,
)

DEFAULT_ACTION_CAP = 9


@dataclass(frozen=True)
class RealWorldEffect:
    """head <~ guard: new head facts may appear in the real world whenever
    the guard held before.  Head variables absent from the guard are
    unrestricted and may introduce new values."""

    head: Atom
    guard: Condition = Condition()

    def __post_init__(self):
        check_condition_safety(self.guard, extra_atoms=(self.head,))
        if not comparisons_satisfiable(self.guard.comparisons):
            raise InputError(
                f"useless effect on {self.head.relation}: guard unsatisfiable"
            )

    def query(self) -> ConjunctiveQuery:
        """P_r: the head tuples the effect can create, with their guard."""
        return ConjunctiveQuery(
            self.head.args,
            Condition((self.head,) + self.guard.atoms, self.guard.comparisons),
        )


@dataclass(frozen=True)
class CopyEffect:
    """head, guard -> head: matching real-world facts are copied into the
    information system."""

    head: Atom
    guard: Condition = Condition()

    def __post_init__(self):
        check_condition_safety(self.guard, extra_atoms=(self.head,))
        if not comparisons_satisfiable(self.guard.comparisons):
            raise InputError(
                f"useless copy effect on {self.head.relation}: guard unsatisfiable"
            )

    def query(self) -> ConjunctiveQuery:
        return ConjunctiveQuery(
            self.head.args,
            Condition((self.head,) + self.guard.atoms, self.guard.comparisons),
        )


def copy_facts(effects: Iterable[CopyEffect], ideal: DatabaseInstance) -> DatabaseInstance:
    """All facts the copy effects transfer from the given real-world state."""
    out = set()
    for c in effects:
        qc = c.query()
        for v in satisfying_valuations(qc.body, ideal, NullPolicy.FORBID):
            out.add(Atom(c.head.relation, instantiate(c.head.args, v)))
    return DatabaseInstance(out)


@dataclass(frozen=True)
class QATS:
    """A labeled transition system whose actions carry real-world effects
    and copy effects.  Cycles are allowed."""

    states: frozenset
    initial: str
    actions: frozenset
    edges: frozenset  # (state, action, state)
    real_world: Mapping[str, tuple] = field(default_factory=dict)
    copies: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "actions", frozenset(self.actions))
        object.__setattr__(self, "edges", frozenset(self.edges))
        object.__setattr__(self, "real_world", dict(self.real_world))
        object.__setattr__(self, "copies", dict(self.copies))
        if self.initial not in self.states:
            raise InputError(f"initial state {self.initial} not declared")
        for (s, a, t) in self.edges:
            if s not in self.states or t not in self.states:
                raise InputError(f"edge ({s},{a},{t}) references an undeclared state")
            if a not in self.actions:
                raise InputError(f"edge ({s},{a},{t}) references an undeclared action")
        for a in itertools.chain(self.real_world, self.copies):
            if a not in self.actions:
                raise InputError(f"effects declared for unknown action {a}")

    def re(self, action: str) -> tuple:
        return tuple(self.real_world.get(action, ()))

    def ce(self, action: str) -> tuple:
        return tuple(self.copies.get(action, ()))

    def step(self, states: Iterable[str], action: str) -> set:
        states = set(states)
        return {t for (s, a, t) in self.edges if a == action and s in states}

    def closure(self, states: Iterable[str], alphabet: Iterable[str]) -> set:
        alphabet = set(alphabet)
        reached = set(states)
        frontier = set(states)
        while frontier:
            nxt = {
                t
                for (s, a, t) in self.edges
                if a in alphabet and s in frontier
            } - reached
            reached |= nxt
            frontier = nxt
        return reached

    def reachable_states(self) -> set:
        return self.closure({self.initial}, self.actions)


# ---------------------------------------------------------------------------
# Risky and repaired effects
# ---------------------------------------------------------------------------

def _renamed_effect_parts(r: RealWorldEffect, q: ConjunctiveQuery):
    taken = q.variables()
    eq = r.query().rename_apart(taken)
    head_args = eq.head
    guard = Condition(eq.body.atoms[1:], eq.body.comparisons)
    head_atom = eq.body.atoms[0]
    return head_atom, head_args, guard


def _unification_comparisons(head_args, atom: Atom) -> Optional[list]:
    """Equalities forcing the effect's head onto a query atom; None when two
    distinct constants clash immediately."""
    eqs = []
    for a, b in zip(head_args, atom.args):
        if a == b:
            continue
        from .model import Const

        if isinstance(a, Const) and isinstance(b, Const):
            return None
        eqs.append(Comparison(a, "=", b))
    return eqs


def risky(
    r: RealWorldEffect, q: ConjunctiveQuery, limit: int = DEFAULT_PARTITION_LIMIT
) -> Verdict:
    """Can facts introduced by the effect change the query's answer?
    Satisfiability of guard + query body + comparisons + head-to-atom
    unification, checked per query atom over the effect's relation."""
    head_atom, head_args, guard = _renamed_effect_parts(r, q)
    for atom in q.body.atoms:
        if atom.relation != r.head.relation or atom.arity != len(head_args):
            continue
        eqs = _unification_comparisons(head_args, atom)
        if eqs is None:
            continue
        combined = Condition(
            (head_atom,) + guard.atoms + q.body.atoms,
            tuple(guard.comparisons) + tuple(q.body.comparisons) + tuple(eqs),
        )
        if not comparisons_satisfiable(combined.comparisons):
            continue
        return Verdict(True, _risky_witness(combined, limit))
    return Verdict(False, {"kind": "certificate", "note": "no unifiable atom"})


def _risky_witness(combined: Condition, limit: int) -> dict:
    """A conforming pair of real-world states on which the query answer
    changes: everything but the effect's instantiated head, then everything.
    The unification equalities make the instantiated head coincide with the
    unified query atom."""
    variables = sorted(combined.variables(), key=lambda v: v.name)
    assignment = None
    for rv in representative_valuations(
        variables, combined.constants(), combined.comparisons, limit=limit
    ):
        assignment = rv.assignment
        break
    if assignment is None:  # relational: freeze instead
        _, assignment = freeze(combined)
    facts = [a.substitute(assignment) for a in combined.atoms]
    return {
        "kind": "risky-witness",
        "before": DatabaseInstance(set(facts) - {facts[0]}),
        "after": DatabaseInstance(facts),
        "new_fact": facts[0],
    }


def repaired(
    r: RealWorldEffect,
    copies: Iterable[CopyEffect],
    q: ConjunctiveQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Is every query-relevant fact the effect can create guaranteed to be
    copied?  Containment of the effect's query joined with each atom
    projection of q in the union of the copy queries."""
    head_atom, head_args, guard = _renamed_effect_parts(r, q)
    containers = [c.query() for c in copies if c.head.relation == r.head.relation
                  and c.head.arity == len(head_args)]
    for atom in q.body.atoms:
        if atom.relation != r.head.relation or atom.arity != len(head_args):
            continue
        eqs = _unification_comparisons(head_args, atom)
        if eqs is None:
            continue
        intersection = ConjunctiveQuery(
            head_args,
            Condition(
                (head_atom,) + guard.atoms + q.body.atoms,
                tuple(guard.comparisons) + tuple(q.body.comparisons) + tuple(eqs),
            ),
        )
        if not containers:
            if reduce_query(intersection).satisfiable:
                db, fmap = freeze(intersection.body)
                return Verdict(
                    False,
                    {"kind": "counterexample", "database": db,
                     "tuple": instantiate(intersection.head, fmap)},
                )
            continue
        verdict = contained(intersection, containers, limit=limit)
        if not verdict.holds:
            return verdict
    return Verdict(True, {"kind": "certificate"})


# ---------------------------------------------------------------------------
# Action sequences
# ---------------------------------------------------------------------------

def normalize(alpha: Sequence[str]) -> tuple:
    """Drop all but the last occurrence of each repeated action."""
    seen = set()
    out = []
    for a in reversed(alpha):
        if a not in seen:
            seen.add(a)
            out.append(a)
    return tuple(reversed(out))


def sequence_complete(
    alpha: Sequence[str],
    q: ConjunctiveQuery,
    qats: QATS,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Does the action sequence guarantee query completeness?  Every risky
    real-world effect must be repaired by the copy effects of the actions
    after it."""
    alpha = list(alpha)
    for a in alpha:
        if a not in qats.actions:
            raise InputError(f"unknown action {a}")
    for i, action in enumerate(alpha):
        later = [c for a in alpha[i + 1:] for c in qats.ce(a)]
        for r in qats.re(action):
            if not risky(r, q, limit=limit).holds:
                continue
            verdict = repaired(r, later, q, limit=limit)
            if not verdict.holds:
                db = verdict.witness["database"]
                fact = Atom(r.head.relation, verdict.witness["tuple"])
                witness = _build_development(qats, alpha, i, db, fact)
                ideal = witness["development"][-1]
                available = witness["trace"][-1]
                return Verdict(
                    False,
                    witness,
                    counterexample=IncompleteDatabase(ideal, available),
                )
    return Verdict(True, {"kind": "certificate"})


def _build_development(
    qats: QATS, alpha: Sequence[str], index: int, db: DatabaseInstance, fact: Atom
) -> dict:
    before = db.minus([fact])
    # ideal databases: unchanged until the risky action adds the fact
    development = [before] * (index + 1) + [db] * (len(alpha) - index)
    trace = [development[0]]
    for j, action in enumerate(alpha, start=1):
        trace.append(trace[-1].union(copy_facts(qats.ce(action), development[j])))
    return {
        "kind": "development",
        "action_index": index,
        "action": alpha[index],
        "new_fact": fact,
        "development": development,
        "trace": trace,
    }


# ---------------------------------------------------------------------------
# Realizability and verification
# ---------------------------------------------------------------------------

def realizable(qats: QATS, alpha: Sequence[str], goal: str) -> bool:
    """Is there a path from the initial state to the goal whose normal action
    sequence is exactly alpha?  Such paths decompose into segments over the
    suffix alphabets, each ending with the segment's mandatory action."""
    alpha = list(alpha)
    if len(set(alpha)) != len(alpha):
        raise ReasoningError("realizability is defined on duplicate-free sequences")
    current = {qats.initial}
    for j, action in enumerate(alpha):
        current = qats.closure(current, set(alpha[j:]))
        current = qats.step(current, action)
        if not current:
            return False
    return goal in current


def normal_sequences(
    qats: QATS, goal: str, cap: int = DEFAULT_ACTION_CAP
) -> Iterable[tuple]:
    """All duplicate-free action sequences realizable as the normal sequence
    of some path from the initial state to the goal."""
    actions = sorted(qats.actions)
    if len(actions) > cap:
        raise LimitExceeded(
            f"{len(actions)} actions exceed the design-time enumeration cap {cap}"
        )
    for k in range(len(actions) + 1):
        for alpha in itertools.permutations(actions, k):
            if realizable(qats, alpha, goal):
                yield alpha


def design_time_verify(
    qats: QATS,
    state: str,
    q: ConjunctiveQuery,
    cap: int = DEFAULT_ACTION_CAP,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Is the query complete in the given state no matter how it is reached?
    Checks sequence completeness of every realizable normal action sequence."""
    if state not in qats.states:
        raise InputError(f"unknown state {state}")
    if state not in qats.reachable_states():
        return Verdict(
            True,
            {"kind": "certificate",
             "warning": f"state {state} is unreachable; completeness holds vacuously"},
        )
    checked = 0
    for alpha in normal_sequences(qats, state, cap=cap):
        checked += 1
        verdict = sequence_complete(alpha, q, qats, limit=limit)
        if not verdict.holds:
            witness = dict(verdict.witness)
            witness["sequence"] = list(alpha)
            return Verdict(False, witness, counterexample=verdict.counterexample)
    return Verdict(True, {"kind": "certificate", "sequences": checked})


def runtime_verify(
    qats: QATS,
    actions: Sequence[str],
    q: ConjunctiveQuery,
    limit: int = DEFAULT_PARTITION_LIMIT,
) -> Verdict:
    """Completeness after a concrete execution: the action sequence of the
    observed path decides it.  (Verification against a concrete database
    state is not offered: repairing would be sufficient but not necessary.)"""
    current = {qats.initial}
    for a in actions:
        if a not in qats.actions:
            raise InputError(f"unknown action {a}")
        current = qats.step(current, a)
        if not current:
            raise InputError(
                f"{','.join(actions)} is not the action sequence of any path"
            )
    return sequence_complete(actions, q, qats, limit=limit)


# ---------------------------------------------------------------------------
# Containment as a two-action process (reduction fixture)
# ---------------------------------------------------------------------------

def containment_as_qats(
    q0: ConjunctiveQuery, union: Sequence[ConjunctiveQuery], relation: str = "goal_rel"
):
    """Encode a union-containment instance as a two-action process: action
    one creates goal-relation facts from the containee's body, action two
    copies those matching some container.  The sequence (a1, a2) is complete
    for the goal query exactly when the containment holds."""
    arity = len(q0.head)
    head_vars = tuple(Var(f"h{i}") for i in range(arity))

    def as_effect(query: ConjunctiveQuery, cls):
        renamed = query.rename_apart(set(head_vars))
        eqs = tuple(
            Comparison(h, "=", t) for h, t in zip(head_vars, renamed.head)
        )
        return cls(
            Atom(relation, head_vars),
            Condition(renamed.body.atoms, renamed.body.comparisons + eqs),
        )

    qats = QATS(
        states=frozenset({"p0", "p1", "p2"}),
        initial="p0",
        actions=frozenset({"create", "publish"}),
        edges=frozenset({("p0", "create", "p1"), ("p1", "publish", "p2")}),
        real_world={"create": (as_effect(q0, RealWorldEffect),)},
        copies={"publish": tuple(as_effect(u, CopyEffect) for u in union)},
    )
    goal_query = ConjunctiveQuery(head_vars, Condition((Atom(relation, head_vars),), ()))
    return qats, goal_query
