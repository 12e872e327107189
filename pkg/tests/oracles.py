"""Independent brute-force oracles.

Everything here avoids the package's decision procedures: matching is a
plain recursive candidate search, containment is decided by enumerating
canonical databases over a value grid, and entailment by enumerating
incomplete databases outright.  Minimal available instances are justified by
answer monotonicity: growing the available side can only move its answer
toward the ideal one, so if the least statement-satisfying available
instance is complete, all of them are.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from cqcheck.model import (
    Atom,
    Const,
    DatabaseInstance,
    IncompleteDatabase,
    Null,
    NullKind,
    Regime,
    Var,
    fresh_null,
)

# ---------------------------------------------------------------------------
# Matching, evaluation
# ---------------------------------------------------------------------------


def brute_homs(atoms, facts, binding=None):
    if binding is None:
        binding = {}
    if not atoms:
        yield dict(binding)
        return
    atom, rest = atoms[0], atoms[1:]
    for f in facts:
        if f.relation != atom.relation or f.arity != atom.arity:
            continue
        new = dict(binding)
        ok = True
        for a, b in zip(atom.args, f.args):
            if isinstance(a, Var):
                if a in new and new[a] != b:
                    ok = False
                    break
                new[a] = b
            elif a != b:
                ok = False
                break
        if ok:
            yield from brute_homs(rest, facts, new)


def _value_key(c: Const):
    return (1, c.value) if isinstance(c.value, str) else (0, c.value)


def _cmp_holds(c, binding):
    left = binding.get(c.left, c.left)
    right = binding.get(c.right, c.right)
    if c.op == "=":
        return left == right
    if isinstance(left, Null) or isinstance(right, Null):
        return False
    if left == right:
        return c.op == "<="
    if not isinstance(left, Const) or not isinstance(right, Const):
        return False
    if c.op == "<":
        return _value_key(left) < _value_key(right)
    return _value_key(left) <= _value_key(right)


def _head_tuple(head, binding):
    return tuple(binding.get(t, t) if isinstance(t, Var) else t for t in head)


def brute_eval(q, db, semantics="set"):
    facts = list(db.facts)
    out = []
    for binding in brute_homs(list(q.body.atoms), facts):
        if all(_cmp_holds(c, binding) for c in q.body.comparisons):
            out.append(_head_tuple(q.head, binding))
    if semantics == "set":
        return set(out)
    return sorted(map(repr, out))


def _join_vars(atoms):
    counts = {}
    for a in atoms:
        for t in a.args:
            if isinstance(t, Var):
                counts[t] = counts.get(t, 0) + 1
    return {v for v, n in counts.items() if n >= 2}


def _null_binding_ok(binding, joins, mode):
    for var, value in binding.items():
        if isinstance(value, Null) and var in joins:
            if mode == "sql":
                return False
            if value.kind in (NullKind.NOT_APPLICABLE, NullKind.AMBIGUOUS):
                return False
    return True


def brute_eval_cert(q, db, semantics="set"):
    facts = list(db.facts)
    joins = _join_vars(q.body.atoms)
    out = []
    for binding in brute_homs(list(q.body.atoms), facts):
        if not _null_binding_ok(binding, joins, "cert"):
            continue
        t = _head_tuple(q.head, binding)
        if any(isinstance(x, Null) and x.kind is not NullKind.NOT_APPLICABLE for x in t):
            continue
        out.append(t)
    return set(out) if semantics == "set" else sorted(map(repr, out))


def brute_eval_sql(q, db, semantics="set"):
    facts = list(db.facts)
    joins = _join_vars(q.body.atoms)
    out = []
    for binding in brute_homs(list(q.body.atoms), facts):
        if _null_binding_ok(binding, joins, "sql"):
            out.append(_head_tuple(q.head, binding))
    return set(out) if semantics == "set" else sorted(map(repr, out))


# ---------------------------------------------------------------------------
# Containment by canonical databases over a value grid
# ---------------------------------------------------------------------------


def _value_grid(queries, slots):
    """Constants of the queries plus enough values below, between, and above
    them to realize every order type of `slots` variables."""
    consts = set()
    for q in queries:
        consts |= q.constants()
    rationals = sorted((c.value for c in consts if not isinstance(c.value, str)))
    strings = sorted(c.value for c in consts if isinstance(c.value, str))
    values = [Const(v) for v in rationals] + [Const(s) for s in strings]
    low = rationals[0] if rationals else Fraction(0)
    values += [Const(low - j - 1) for j in range(slots)]
    for r1, r2 in zip(rationals, rationals[1:]):
        values += [Const(r1 + (r2 - r1) * Fraction(j + 1, slots + 1)) for j in range(slots)]
    high = rationals[-1] if rationals else Fraction(0)
    values += [Const(high + j + 1) for j in range(slots)]
    for s1, s2 in zip(strings, strings[1:]):
        values += [Const(s1 + "\x01" * (j + 1)) for j in range(slots)]
    if strings:
        values += [Const(strings[-1] + "z" * (j + 1)) for j in range(slots)]
    return values


def brute_contained(q, union):
    """Containment via canonical databases: every instantiation of the
    containee's body over the grid must have its head tuple answered by some
    container."""
    variables = sorted(q.variables(), key=lambda v: v.name)
    grid = _value_grid([q] + list(union), max(1, len(variables)))
    for values in itertools.product(grid, repeat=len(variables)):
        binding = dict(zip(variables, values))
        if not all(_cmp_holds(c, binding) for c in q.body.comparisons):
            continue
        db = DatabaseInstance(a.substitute(binding) for a in q.body.atoms)
        target = _head_tuple(q.head, binding)
        if not any(target in brute_eval(u, db, "set") for u in union):
            return False
    return True


# ---------------------------------------------------------------------------
# Statement satisfaction and entailment by instance enumeration
# ---------------------------------------------------------------------------


def brute_tc_satisfied(idb, stmt):
    """Indicator semantics, with SQL-style matching over null-bearing ideal
    instances.  Projection-free statements are the all-positions case."""
    ideal = list(idb.ideal.facts)
    atoms = [stmt.head] + list(stmt.condition.atoms)
    joins = _join_vars(atoms)
    positions = sorted(stmt.positions())
    available = [f for f in idb.available.facts if f.relation == stmt.head.relation]
    for binding in brute_homs(atoms, ideal):
        if not _null_binding_ok(binding, joins, "sql"):
            continue
        if not all(_cmp_holds(c, binding) for c in stmt.condition.comparisons):
            continue
        constrained = _head_tuple(stmt.head.args, binding)
        if not any(
            all(f.args[p - 1] == constrained[p - 1] for p in positions)
            for f in available
        ):
            return False
    return True


def _input_constants(statements, q):
    consts = set(q.constants())
    for stmt in statements:
        consts |= {t for t in stmt.head.args if isinstance(t, Const)}
        consts |= stmt.condition.constants()
    return consts


def _fact_pool(relations, values):
    pool = []
    for rel, arity in relations:
        pool.extend(Atom(rel, args) for args in itertools.product(values, repeat=arity))
    return pool


def _ideal_candidates(relations, values, max_facts, required_relations):
    pool = _fact_pool(relations, values)
    for k in range(max_facts + 1):
        for combo in itertools.combinations(pool, k):
            present = {f.relation for f in combo}
            if required_relations <= present:
                yield DatabaseInstance(combo)


def _minimal_available(statements, ideal):
    """The least available instance satisfying projection-free statements."""
    required = set()
    facts = list(ideal.facts)
    for stmt in statements:
        atoms = [stmt.head] + list(stmt.condition.atoms)
        for binding in brute_homs(atoms, facts):
            if all(_cmp_holds(c, binding) for c in stmt.condition.comparisons):
                required.add(Atom(stmt.head.relation, _head_tuple(stmt.head.args, binding)))
    return DatabaseInstance(required)


def brute_tcqc(statements, q, semantics, relations, values, max_facts=4):
    """Entailment without nulls: search the bounded space of ideal instances
    for one whose least satisfying available instance breaks completeness.
    Returns (holds, counterexample)."""
    needed = {a.relation for a in q.body.atoms}
    values = tuple(set(values) | _input_constants(statements, q))
    for ideal in _ideal_candidates(relations, values, max_facts, needed):
        available = _minimal_available(statements, ideal)
        if brute_eval(q, ideal, semantics) != brute_eval(q, available, semantics):
            return False, IncompleteDatabase(ideal, available)
    return True, None


def validate_nonulls_counterexample(idb, statements, q, semantics):
    """Machine-check a no-nulls counterexample: it satisfies every premise
    and the query answers differ."""
    return all(brute_tc_satisfied(idb, c) for c in statements) and (
        brute_eval(q, idb.ideal, semantics) != brute_eval(q, idb.available, semantics)
    )


# ---------------------------------------------------------------------------
# Null-regime oracles
# ---------------------------------------------------------------------------


def _minimal_indicators(statements, ideal):
    """Least available instance for projection statements: constrained facts
    restricted to their projection positions, padded with fresh plain nulls."""
    out = []
    facts = list(ideal.facts)
    for stmt in statements:
        atoms = [stmt.head] + list(stmt.condition.atoms)
        joins = _join_vars(atoms)
        positions = stmt.positions()
        seen = set()
        for binding in brute_homs(atoms, facts):
            if not _null_binding_ok(binding, joins, "sql"):
                continue
            full = _head_tuple(stmt.head.args, binding)
            key = tuple(full[p - 1] for p in sorted(positions))
            if key in seen:
                continue
            seen.add(key)
            out.append(
                Atom(
                    stmt.head.relation,
                    tuple(
                        full[i] if (i + 1) in positions else fresh_null(NullKind.PLAIN)
                        for i in range(len(full))
                    ),
                )
            )
    return DatabaseInstance(out)


def oracle_tcqc_inc(statements, q, relations, values, max_facts=4):
    """Unknown-null regime: ideal instances are null-free; the minimal
    satisfying available instance is the padded indicator set (anything else
    dominates it and, by monotonicity of certain answers under domination,
    stays complete whenever it is)."""
    needed = {a.relation for a in q.body.atoms}
    values = tuple(set(values) | _input_constants(statements, q))
    for ideal in _ideal_candidates(relations, values, max_facts, needed):
        available = _minimal_indicators(statements, ideal)
        if brute_eval(q, ideal, "set") != brute_eval_cert(q, available, "set"):
            return False, IncompleteDatabase(ideal, available, Regime.INCOMPLETE_FACTS)
    return True, None


def oracle_tcqc_res(statements, q, relations, values, max_facts=3):
    """SQL-null regime: ideal instances may contain not-applicable tokens;
    the available instance ranges over all subsets of the ideal one."""
    values = tuple(set(values) | _input_constants(statements, q))
    for ideal in _ideal_candidates(relations, values, max_facts, set()):
        ideal_answers = brute_eval_sql(q, ideal, "set")
        facts = ideal.sorted_facts()
        for k in range(len(facts) + 1):
            for combo in itertools.combinations(facts, k):
                idb = IncompleteDatabase(ideal, DatabaseInstance(combo),
                                         Regime.RESTRICTED_FACTS)
                if not all(brute_tc_satisfied(idb, c) for c in statements):
                    continue
                if brute_eval_sql(q, idb.available, "set") != ideal_answers:
                    return False, idb
    return True, None


def _dominated_variants(fact, key_len):
    """A fact's possible appearances in a partial-facts available instance:
    absent, exact, or with non-key positions degraded to unknown/ambiguous."""
    yield None
    options = []
    for i, t in enumerate(fact.args):
        if i < key_len:
            options.append((t,))
        else:
            options.append((t, NullKind.UNKNOWN, NullKind.AMBIGUOUS))
    for combo in itertools.product(*options):
        args = tuple(
            fresh_null(c) if isinstance(c, NullKind) else c for c in combo
        )
        yield Atom(fact.relation, args)


def oracle_tcqc_bag_keys(statements, q, keys, relations, values, max_facts=3):
    """Bag semantics with keys: enumerate key-satisfying null-free ideal
    instances and every per-fact degradation of the available side."""
    needed = {a.relation for a in q.body.atoms}
    values = tuple(set(values) | _input_constants(statements, q))
    for ideal in _ideal_candidates(relations, values, max_facts, needed):
        seen_keys = set()
        ok = True
        for f in ideal.facts:
            prefix = (f.relation, f.args[: keys[f.relation]])
            if prefix in seen_keys:
                ok = False
                break
            seen_keys.add(prefix)
        if not ok:
            continue
        ideal_answers = brute_eval(q, ideal, "bag")
        facts = ideal.sorted_facts()
        variant_lists = [list(_dominated_variants(f, keys[f.relation])) for f in facts]
        for choice in itertools.product(*variant_lists):
            chosen = [f for f in choice if f is not None]
            idb = IncompleteDatabase(ideal, DatabaseInstance(chosen),
                                     Regime.PARTIAL_FACTS)
            if not all(brute_tc_satisfied(idb, c) for c in statements):
                continue
            if brute_eval_cert(q, idb.available, "bag") != ideal_answers:
                return False, idb
    return True, None


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


def brute_normal_sequences(qats, max_len):
    """All (normal action sequence, end state) pairs of paths up to the
    given length, by path enumeration."""
    found = set()
    frontier = [(qats.initial, ())]
    for _ in range(max_len):
        nxt = []
        for state, actions in frontier:
            for (s, a, t) in qats.edges:
                if s != state:
                    continue
                seq = actions + (a,)
                nxt.append((t, seq))
                normal = []
                seen = set()
                for x in reversed(seq):
                    if x not in seen:
                        seen.add(x)
                        normal.append(x)
                found.add((tuple(reversed(normal)), t))
        frontier = nxt
    found.add(((), qats.initial))
    return found
