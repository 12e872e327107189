"""Random generators for the oracle-scale corpora.

Bounds follow the oracle scale used throughout the suite: at most three
atoms over at most two relations of arity at most two, at most three
variables, constants from {0, 1}.
"""

from __future__ import annotations

import random

from cqcheck.model import (
    Atom,
    Comparison,
    Condition,
    ConjunctiveQuery,
    Const,
    DatabaseInstance,
    TCStatement,
    Var,
)

ZERO, ONE = Const(0), Const(1)
DEFAULT_RELATIONS = (("r", 2), ("s", 1))
VARS = tuple(Var(n) for n in ("x", "y", "z"))


def rand_term(rng: random.Random, variables, const_p=0.25):
    if variables and rng.random() >= const_p:
        return rng.choice(variables)
    return rng.choice((ZERO, ONE))


def rand_atoms(rng: random.Random, relations, max_atoms, variables):
    n = rng.randint(1, max_atoms)
    atoms = []
    for _ in range(n):
        rel, arity = rng.choice(relations)
        atoms.append(Atom(rel, tuple(rand_term(rng, variables) for _ in range(arity))))
    return atoms


def rand_comparisons(rng: random.Random, variables, max_comparisons=1):
    out = []
    for _ in range(rng.randint(0, max_comparisons)):
        if not variables:
            break
        left = rng.choice(variables)
        op = rng.choice(("=", "<", "<="))
        right = rng.choice((ZERO, ONE, *variables))
        if left == right and op == "<":
            continue
        out.append(Comparison(left, op, right))
    return out


def rand_query(
    rng: random.Random,
    relations=DEFAULT_RELATIONS,
    max_atoms=3,
    max_vars=3,
    with_comparisons=False,
    head_arity=None,
):
    variables = list(VARS[: rng.randint(1, max_vars)])
    atoms = rand_atoms(rng, relations, max_atoms, variables)
    body_vars = sorted(
        {t for a in atoms for t in a.args if isinstance(t, Var)},
        key=lambda v: v.name,
    )
    comparisons = []
    if with_comparisons and body_vars:
        comparisons = rand_comparisons(rng, body_vars)
    if head_arity is None:
        head_arity = rng.randint(0, len(body_vars))
    head_pool = body_vars + [ZERO, ONE]
    head = tuple(rng.choice(head_pool) for _ in range(head_arity))
    return ConjunctiveQuery(head, Condition(tuple(atoms), tuple(comparisons)))


def rand_statement(
    rng: random.Random,
    relations=DEFAULT_RELATIONS,
    max_condition_atoms=2,
    with_comparisons=False,
    with_projection=False,
):
    rel, arity = rng.choice(relations)
    head_vars = tuple(Var(f"h{i}") for i in range(arity))
    head = Atom(rel, head_vars)
    pool = list(head_vars)
    atoms = []
    for _ in range(rng.randint(0, max_condition_atoms)):
        crel, carity = rng.choice(relations)
        atoms.append(Atom(crel, tuple(rand_term(rng, pool) for _ in range(carity))))
    comparisons = []
    if with_comparisons:
        comparisons = rand_comparisons(rng, pool)
    projection = None
    if with_projection:
        positions = [p for p in range(1, arity + 1) if rng.random() < 0.7]
        projection = frozenset(positions or [1])
    return TCStatement(head, Condition(tuple(atoms), tuple(comparisons)), projection)


def rand_statements(rng: random.Random, max_statements=2, **kwargs):
    return [rand_statement(rng, **kwargs) for _ in range(rng.randint(0, max_statements))]


def rand_instance(rng: random.Random, relations=DEFAULT_RELATIONS, max_facts=4,
                  values=(ZERO, ONE)):
    facts = []
    for _ in range(rng.randint(0, max_facts)):
        rel, arity = rng.choice(relations)
        facts.append(Atom(rel, tuple(rng.choice(values) for _ in range(arity))))
    return DatabaseInstance(facts)
