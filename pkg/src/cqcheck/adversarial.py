"""Hard containment instances generated from propositional formulas.

Three constructions, used as adversarial test generators: a negated-3-SAT
formula in DNF becomes containment of a linear relational query in a union
of linear comparison queries; a 3-SAT formula in CNF becomes containment of
a relational query (ground satisfying triples in the body) in a linear
relational query; a universally quantified 3-SAT formula adds order gadgets
that force the container to read off a truth value chosen by the containee.

Expected verdicts come from an independent truth-table check.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InputError
from .model import Atom, Comparison, Condition, ConjunctiveQuery, Const, TCStatement, Var

KINDS = ("3unsat", "3sat", "forall-exists")

_MAX_PROPS = 16


@dataclass(frozen=True)
class Literal:
    prop: str
    positive: bool = True

    def __str__(self):
        return self.prop if self.positive else f"~{self.prop}"


@dataclass(frozen=True)
class Formula:
    """Clauses of exactly three literals; for the quantified variant the
    universally quantified propositions are listed, the rest existential."""

    clauses: tuple
    universals: tuple = ()

    def __post_init__(self):
        for clause in self.clauses:
            if len(clause) != 3:
                raise InputError("clauses must have exactly three literals")
        props = self.propositions()
        if len(props) > _MAX_PROPS:
            raise InputError(f"more than {_MAX_PROPS} propositions")
        for u in self.universals:
            if u not in props:
                raise InputError(f"universal {u} does not occur in the formula")

    def propositions(self) -> list:
        seen: dict = {}
        for clause in self.clauses:
            for lit in clause:
                seen.setdefault(lit.prop, None)
        return list(seen)

    def render(self, inner: str, outer: str) -> str:
        parts = [
            "(" + f" {inner} ".join(str(l) for l in clause) + ")"
            for clause in self.clauses
        ]
        return f" {outer} ".join(parts) if parts else "true"


def _clause_true(clause, assignment) -> bool:
    return any(assignment[l.prop] == l.positive for l in clause)


def dnf_valid(f: Formula) -> bool:
    """Truth-table validity of the DNF reading: some clause of conjoined
    literals holds under every assignment."""
    props = f.propositions()
    for values in itertools.product((False, True), repeat=len(props)):
        assignment = dict(zip(props, values))
        if not any(
            all(assignment[l.prop] == l.positive for l in clause)
            for clause in f.clauses
        ):
            return False
    return True


def cnf_satisfiable(f: Formula) -> bool:
    props = f.propositions()
    for values in itertools.product((False, True), repeat=len(props)):
        assignment = dict(zip(props, values))
        if all(_clause_true(clause, assignment) for clause in f.clauses):
            return True
    return False


def forall_exists_valid(f: Formula) -> bool:
    """For every assignment of the universals there is an assignment of the
    remaining propositions satisfying the CNF."""
    props = f.propositions()
    universals = list(f.universals)
    existentials = [p for p in props if p not in universals]
    for uvals in itertools.product((False, True), repeat=len(universals)):
        base = dict(zip(universals, uvals))
        if not any(
            all(
                _clause_true(clause, {**base, **dict(zip(existentials, evals))})
                for clause in f.clauses
            )
            for evals in itertools.product((False, True), repeat=len(existentials))
        ):
            return False
    return True


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

ZERO, ONE = Const(0), Const(1)


def _dnf_instance(f: Formula):
    """Q from the clause atoms over the proposition variables; one container
    per clause reading the truth values off the order against zero."""
    body = tuple(
        Atom(f"C{i}", tuple(Var(l.prop) for l in clause))
        for i, clause in enumerate(f.clauses, start=1)
    )
    containee = ConjunctiveQuery((), Condition(body, ()))
    union = []
    for i, clause in enumerate(f.clauses, start=1):
        xs = tuple(Var(f"x{j}") for j in range(1, 4))
        comparisons = tuple(
            Comparison(ZERO, "<=", x) if lit.positive else Comparison(x, "<", ZERO)
            for x, lit in zip(xs, clause)
        )
        union.append(
            ConjunctiveQuery((), Condition((Atom(f"C{i}", xs),), comparisons))
        )
    return containee, union, dnf_valid(f)


def _satisfying_triples(clause):
    """The seven 0/1 triples under which the clause holds."""
    out = []
    for values in itertools.product((False, True), repeat=3):
        if any(v == l.positive for v, l in zip(values, clause)):
            out.append(tuple(ONE if v else ZERO for v in values))
    return out


def _cnf_instance(f: Formula):
    """Ground satisfying triples in the containee; the container maps each
    clause atom onto one of them, i.e. picks a satisfying assignment."""
    containee_atoms = []
    container_atoms = []
    for i, clause in enumerate(f.clauses, start=1):
        rel = f"F{i}"
        containee_atoms.extend(Atom(rel, triple) for triple in _satisfying_triples(clause))
        container_atoms.append(Atom(rel, tuple(Var(l.prop) for l in clause)))
    containee = ConjunctiveQuery((), Condition(tuple(containee_atoms), ()))
    container = ConjunctiveQuery((), Condition(tuple(container_atoms), ()))
    return containee, [container], cnf_satisfiable(f)


def _forall_exists_instance(f: Formula):
    """The CNF construction plus, per universal, an order gadget whose
    instantiation in the containee decides the truth value the container
    must read."""
    containee_atoms = []
    container_atoms = []
    comparisons = []
    for j, u in enumerate(sorted(f.universals), start=1):
        w = Var(f"w{j}")
        r, s = f"R{j}", f"S{j}"
        containee_atoms.extend(
            [
                Atom(r, (ZERO, w)),
                Atom(r, (w, ONE)),
                Atom(s, (w, ZERO)),
                Atom(s, (ONE, ONE)),
            ]
        )
        y, z = Var(f"y{j}"), Var(f"z{j}")
        container_atoms.extend([Atom(r, (y, z)), Atom(s, (z, Var(u)))])
        comparisons.extend([Comparison(y, "<=", ZERO), Comparison(ZERO, "<", z)])
    for i, clause in enumerate(f.clauses, start=1):
        rel = f"F{i}"
        containee_atoms.extend(Atom(rel, triple) for triple in _satisfying_triples(clause))
        container_atoms.append(Atom(rel, tuple(Var(l.prop) for l in clause)))
    containee = ConjunctiveQuery((), Condition(tuple(containee_atoms), ()))
    container = ConjunctiveQuery(
        (), Condition(tuple(container_atoms), tuple(comparisons))
    )
    return containee, [container], forall_exists_valid(f)


def adversarial_instance(kind: str, formula: Formula):
    """The (containee, union, expected-containment) triple of the chosen
    construction; the expected verdict is computed by truth table."""
    if kind == "3unsat":
        return _dnf_instance(formula)
    if kind == "3sat":
        return _cnf_instance(formula)
    if kind == "forall-exists":
        return _forall_exists_instance(formula)
    raise InputError(f"unknown adversarial kind {kind!r}; choose from {KINDS}")


def containment_as_tc(containee: ConjunctiveQuery, union: Sequence[ConjunctiveQuery],
                      relation: str = "adv_rel"):
    """Wrap a union-containment instance as a TC-TC entailment instance over
    a fresh relation: the goal statement covers the containee's tuples, the
    premises the containers'."""
    goal = TCStatement(Atom(relation, containee.head), containee.body)
    premises = [TCStatement(Atom(relation, u.head), u.body) for u in union]
    return premises, goal


def random_formula(
    rng: random.Random,
    clauses: int = 3,
    propositions: int = 4,
    universals: int = 0,
) -> Formula:
    props = [f"p{i}" for i in range(1, propositions + 1)]
    built = tuple(
        tuple(
            Literal(rng.choice(props), rng.random() < 0.5) for _ in range(3)
        )
        for _ in range(clauses)
    )
    formula = Formula(built)
    if universals:
        occurring = formula.propositions()
        chosen = tuple(occurring[:universals])
        formula = Formula(built, chosen)
    return formula
