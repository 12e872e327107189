"""Completeness reasoning over databases with null values.

Null tokens carry one of four meanings: plain (unannotated), unknown-but-
existing, not-applicable, and ambiguous.  Certain-answer evaluation treats
each plain/unknown token as a private constant and drops tuples still
holding one; not-applicable and ambiguous tokens never satisfy a join.  SQL
evaluation lets singleton variables bind any token, blocks joins on all of
them, and drops nothing.

Entailment checks run over prototypical databases built from the query body:
frozen for unknown-null reasoning, null versions (singleton variables turned
not-applicable) for the SQL-null and three-null regimes, and a chased
all-nulled version for bag semantics under keys.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .containment import DEFAULT_PARTITION_LIMIT
from .errors import InputError, LimitExceeded, ReasoningError, Refusal
from .model import (
    Atom,
    Bag,
    Condition,
    ConjunctiveQuery,
    DatabaseInstance,
    IncompleteDatabase,
    Null,
    NullKind,
    NullPolicy,
    Regime,
    TCStatement,
    Var,
    Verdict,
    fresh_frozen,
    fresh_null,
    instantiate,
    satisfying_valuations,
)

_DROPPED_KINDS = (NullKind.PLAIN, NullKind.UNKNOWN, NullKind.AMBIGUOUS)


def _require_relational(q: ConjunctiveQuery, statements: Iterable[TCStatement]):
    if q.body.comparisons:
        raise ReasoningError("null-value reasoning is defined for relational queries")
    for c in statements:
        if c.condition.comparisons:
            raise ReasoningError(
                "null-value reasoning is defined for relational statements"
            )


def eval_cert(q: ConjunctiveQuery, d: DatabaseInstance, semantics: str = "set"):
    """Certain answers: valuations may bind plain/unknown tokens (each one a
    private constant), never bind not-applicable or ambiguous tokens to join
    variables, and answer tuples still containing a plain, unknown, or
    ambiguous token are dropped (not-applicable survives)."""
    tuples = (
        instantiate(q.head, v)
        for v in satisfying_valuations(q.body, d, NullPolicy.CERT)
    )
    kept = (
        t for t in tuples
        if not any(isinstance(x, Null) and x.kind in _DROPPED_KINDS for x in t)
    )
    return set(kept) if semantics == "set" else Bag(kept)


def eval_sql(q: ConjunctiveQuery, d: DatabaseInstance, semantics: str = "set"):
    """SQL-style answers: singleton variables may bind any null token, join
    variables never bind one, and nothing is dropped from the result."""
    tuples = (
        instantiate(q.head, v)
        for v in satisfying_valuations(q.body, d, NullPolicy.SQL)
    )
    return set(tuples) if semantics == "set" else Bag(tuples)


# ---------------------------------------------------------------------------
# The completeness transformation with projection statements
# ---------------------------------------------------------------------------

def t_c_proj(
    statements: Iterable[TCStatement], d: DatabaseInstance
) -> DatabaseInstance:
    """Minimal indicators any available instance must contain: per statement,
    the constrained facts' projection positions, padded with fresh plain
    nulls for the positions projected out.  Distinct statements produce
    distinct indicators even when they agree on the projection."""
    out = []
    for c in statements:
        qc = c.associated_query()
        positions = c.positions()
        seen = set()
        for v in satisfying_valuations(qc.body, d, NullPolicy.SQL):
            full = instantiate(c.head.args, v)
            key = tuple(full[p - 1] for p in sorted(positions))
            if key in seen:
                continue
            seen.add(key)
            padded = tuple(
                full[i] if (i + 1) in positions else fresh_null(NullKind.PLAIN)
                for i in range(len(full))
            )
            out.append(Atom(c.relation, padded))
    return DatabaseInstance(out)


# ---------------------------------------------------------------------------
# Entailment per regime
# ---------------------------------------------------------------------------

def tc_qc_inc(
    statements: Sequence[TCStatement], q: ConjunctiveQuery
) -> Verdict:
    """Unknown-null regime (ideal instances null-free): the query is
    entailed complete iff its head is certain over the transformation of its
    own frozen body."""
    statements = list(statements)
    _require_relational(q, statements)
    frozen_map = {
        v: fresh_frozen() for v in sorted(q.body.variables(), key=lambda x: x.name)
    }
    ideal = DatabaseInstance(a.substitute(frozen_map) for a in q.body.atoms)
    target = instantiate(q.head, frozen_map)
    available = t_c_proj(statements, ideal)
    if target in eval_cert(q, available):
        return Verdict(True, {"kind": "certificate", "tests": 1})
    counter = IncompleteDatabase(ideal, available, Regime.INCOMPLETE_FACTS)
    return Verdict(
        False,
        {"kind": "counterexample", "ideal": ideal, "available": available},
        counterexample=counter,
    )


def _null_versions(q: ConjunctiveQuery, all_nulled_only: bool, keep=frozenset()):
    """Substitutions freezing the query body, with singleton variables turned
    into fresh not-applicable tokens: either every subset of them or just the
    all-nulled version.  Variables in `keep` are never nulled."""
    singles = sorted(q.singleton_variables() - set(keep), key=lambda v: v.name)
    others = sorted(q.body.variables() - set(singles), key=lambda v: v.name)
    base = {v: fresh_frozen() for v in others}
    if all_nulled_only:
        subsets = [tuple(singles)]
    else:
        subsets = [
            combo
            for r in range(len(singles) + 1)
            for combo in combinations(singles, r)
        ]
    for nulled in subsets:
        mapping = dict(base)
        for v in singles:
            if v in nulled:
                mapping[v] = fresh_null(NullKind.NOT_APPLICABLE)
            else:
                mapping[v] = fresh_frozen()
        yield mapping


def tc_qc_res(
    statements: Sequence[TCStatement], q: ConjunctiveQuery
) -> Verdict:
    """SQL-null regime (available a subset of a null-bearing ideal): checked
    on every null version of the query body.  Boolean and linear queries
    need only the all-nulled version."""
    statements = list(statements)
    _require_relational(q, statements)
    shortcut = q.is_boolean or q.is_linear
    versions = 0
    for mapping in _null_versions(q, all_nulled_only=shortcut):
        versions += 1
        version = DatabaseInstance(a.substitute(mapping) for a in q.body.atoms)
        target = instantiate(q.head, mapping)
        available = t_c_proj(statements, version)
        if target not in eval_sql(q, available):
            ideal = version.union(available)
            counter = IncompleteDatabase(ideal, available, Regime.RESTRICTED_FACTS)
            return Verdict(
                False,
                {"kind": "counterexample", "ideal": ideal, "available": available},
                counterexample=counter,
            )
    return Verdict(True, {"kind": "certificate", "tests": versions})


def tc_qc_3null(
    statements: Sequence[TCStatement], q: ConjunctiveQuery
) -> Verdict:
    """Three-null regime: entailment coincides with the SQL-null regime."""
    return tc_qc_res(statements, q)


# ---------------------------------------------------------------------------
# Keys, chase, bag semantics
# ---------------------------------------------------------------------------

def check_keys(d: DatabaseInstance, keys: Mapping[str, int]):
    """Key satisfaction: no nulls in key positions, no two facts sharing
    their key values."""
    for rel, k in keys.items():
        seen = {}
        for f in d.facts_of(rel):
            prefix = f.args[:k]
            if any(isinstance(t, Null) for t in prefix):
                raise InputError(f"null in key position of {rel}")
            if prefix in seen and seen[prefix] != f:
                raise InputError(f"two {rel} facts share the key {prefix}")
            seen[prefix] = f


def chase(d: DatabaseInstance, keys: Mapping[str, int]) -> DatabaseInstance:
    """Merge key-equal facts position-wise, preferring non-null values.  Two
    distinct non-null values at the same position cannot be reconciled."""
    out = []
    for rel in sorted(d.relations()):
        facts = d.facts_of(rel)
        k = keys.get(rel)
        if k is None:
            out.extend(facts)
            continue
        groups: dict = {}
        for f in facts:
            groups.setdefault(f.args[:k], []).append(f)
        for prefix, group in groups.items():
            merged = list(group[0].args)
            for f in group[1:]:
                for i, t in enumerate(f.args):
                    if isinstance(t, Null):
                        continue
                    if isinstance(merged[i], Null):
                        merged[i] = t
                    elif merged[i] != t:
                        raise ReasoningError(
                            f"chase cannot reconcile {rel} facts with key {prefix}: "
                            f"distinct values at position {i + 1}"
                        )
            out.append(Atom(rel, tuple(merged)))
    return DatabaseInstance(out)


def crucial_query(q: ConjunctiveQuery, keys: Mapping[str, int]) -> ConjunctiveQuery:
    """Same body as q, head extended to the crucial variables: the head
    variables plus every variable in a key position of a body atom."""
    crucial = []
    seen = set()
    for t in q.head:
        if isinstance(t, Var) and t not in seen:
            seen.add(t)
            crucial.append(t)
    for a in q.body.atoms:
        k = keys.get(a.relation)
        if k is None:
            raise InputError(f"no key declared for relation {a.relation}")
        for t in a.args[:k]:
            if isinstance(t, Var) and t not in seen:
                seen.add(t)
                crucial.append(t)
    return ConjunctiveQuery(tuple(crucial), q.body)


def tc_qc_bag_keys(
    statements: Sequence[TCStatement],
    q: ConjunctiveQuery,
    keys: Mapping[str, int],
) -> Verdict:
    """Bag-semantics completeness entailment over databases with keys: the
    crucial tuple of the all-nulled query body must be recovered over the
    chased transformation result.  Only key-preserving statements can assure
    multiplicities; others are refused."""
    statements = list(statements)
    _require_relational(q, statements)
    for c in statements:
        k = keys.get(c.relation)
        if k is None:
            raise InputError(f"no key declared for relation {c.relation}")
        if not c.is_key_preserving(k):
            raise Refusal(
                f"statement on {c.relation} does not cover the key positions "
                f"1..{k}; it cannot assure multiplicities under bag semantics"
            )
    qbar = crucial_query(q, keys)
    # key positions never hold nulls in key-satisfying instances, so the
    # prototypical all-nulled body keeps key-position variables concrete
    key_vars = {
        t
        for a in q.body.atoms
        for t in a.args[: keys[a.relation]]
        if isinstance(t, Var)
    }
    mapping = next(_null_versions(q, all_nulled_only=True, keep=key_vars))
    version = DatabaseInstance(a.substitute(mapping) for a in q.body.atoms)
    target = instantiate(qbar.head, mapping)
    chased = chase(t_c_proj(statements, version), keys)
    if target in eval_sql(qbar, chased):
        return Verdict(True, {"kind": "certificate", "tests": 1})
    return Verdict(
        False,
        {"kind": "counterexample", "ideal": version, "available": chased,
         "crucial": target},
    )


# ---------------------------------------------------------------------------
# Regime dispatch and satisfaction (for the CLI and for oracles)
# ---------------------------------------------------------------------------

REGIMES = ("inc", "res", "3null")


def tc_qc_nulls(
    statements: Sequence[TCStatement],
    q: ConjunctiveQuery,
    regime: str,
    semantics: str = "set",
    keys: Optional[Mapping[str, int]] = None,
) -> Verdict:
    if regime not in REGIMES:
        raise InputError(f"unknown null regime {regime!r}")
    if semantics == "bag":
        if not keys:
            raise Refusal(
                "bag-semantics reasoning over databases with nulls needs keys: "
                "without them redundant tuples break every multiplicity guarantee"
            )
        return tc_qc_bag_keys(statements, q, keys)
    if regime == "inc":
        return tc_qc_inc(statements, q)
    return tc_qc_res(statements, q)


def satisfies_qc_null(
    idb: IncompleteDatabase,
    q: ConjunctiveQuery,
    semantics: str = "set",
    keys: Optional[Mapping[str, int]] = None,
) -> bool:
    """Regime-aware query-completeness satisfaction over a single incomplete
    database.  Set-semantics satisfaction over ambiguous nulls without keys
    is refused: no statement set can characterize it."""
    if idb.regime is Regime.NO_NULLS:
        from .model import satisfies_qc

        return satisfies_qc(idb, q, semantics)
    has_amb = any(
        isinstance(t, Null) and t.kind is NullKind.AMBIGUOUS
        for f in idb.available.facts
        for t in f.args
    )
    if has_amb and not keys:
        raise Refusal(
            "ambiguous nulls without keys admit no completeness characterization"
        )
    if idb.regime is Regime.INCOMPLETE_FACTS:
        from .model import evaluate

        return evaluate(q, idb.ideal, semantics) == eval_cert(q, idb.available, semantics)
    if idb.regime is Regime.RESTRICTED_FACTS:
        return eval_sql(q, idb.ideal, semantics) == eval_sql(q, idb.available, semantics)
    return eval_sql(q, idb.ideal, semantics) == eval_cert(q, idb.available, semantics)
