"""Core relational vocabulary: terms, atoms, conditions, queries, instances,
completeness statements, and query evaluation.

Constants live in a single dense totally ordered domain realized as the
disjoint union of arbitrary-precision rationals and strings; every rational
sorts before every string, strings compare lexicographically.  Null tokens
carry a unique identity, so two occurrences never unify unless they are the
same token.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import InputError, ReasoningError


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class NullKind(Enum):
    PLAIN = "_"          # unannotated null
    UNKNOWN = "_uk"      # value exists but is unknown (Codd-style)
    NOT_APPLICABLE = "_na"  # no value exists (SQL-style)
    AMBIGUOUS = "_amb"   # unknown which of the two applies


@dataclass(frozen=True)
class Const:
    """A domain constant: a Fraction or a str."""

    value: Union[Fraction, str]

    def __post_init__(self):
        if isinstance(self.value, int):
            object.__setattr__(self, "value", Fraction(self.value))
        elif not isinstance(self.value, (Fraction, str)):
            raise InputError(f"unsupported constant type {type(self.value).__name__}")

    @property
    def is_string(self) -> bool:
        return isinstance(self.value, str)

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return f"Var({self.name})"


_null_ids = itertools.count()
_frozen_ids = itertools.count()


@dataclass(frozen=True)
class Null:
    """A null token.  Identity is the (kind, nid) pair; use fresh_null()."""

    kind: NullKind
    nid: int

    def __repr__(self):
        return f"Null({self.kind.value}#{self.nid})"


def fresh_null(kind: NullKind = NullKind.PLAIN) -> Null:
    return Null(kind, next(_null_ids))


@dataclass(frozen=True)
class FrozenConst:
    """A fresh constant from the reserved freezing namespace #f0, #f1, ...

    Frozen constants support equality but have no position in the domain
    order; order-comparing one is a bug in the calling reasoning path and
    fails loudly.
    """

    fid: int

    def __repr__(self):
        return f"#f{self.fid}"


def fresh_frozen() -> FrozenConst:
    return FrozenConst(next(_frozen_ids))


Term = Union[Const, Var, Null, FrozenConst]


def term_sort_key(t: Term):
    """Deterministic total order on terms, used only for stable output."""
    if isinstance(t, Const):
        if t.is_string:
            return (0, 1, t.value)
        return (0, 0, t.value)
    if isinstance(t, Null):
        return (1, t.kind.value, t.nid)
    if isinstance(t, FrozenConst):
        return (2, "", t.fid)
    return (3, t.name, 0)


def tuple_sort_key(tup: Sequence[Term]):
    return tuple(term_sort_key(t) for t in tup)


def const_order_key(c: Const):
    """Key realizing the combined dense order: rationals below strings."""
    return (1, c.value) if c.is_string else (0, c.value)


def order_holds(left: Term, op: str, right: Term) -> bool:
    """Evaluate a ground comparison.  Null tokens never satisfy an order
    comparison (SQL-style); identical terms satisfy <= and fail < whatever
    value they denote; distinct frozen constants in an order comparison
    indicate a broken code path and fail loudly."""
    if op == "=":
        return left == right
    if isinstance(left, Null) or isinstance(right, Null):
        return False
    if left == right:
        return op == "<="
    if isinstance(left, FrozenConst) or isinstance(right, FrozenConst):
        raise ReasoningError("order comparison over distinct frozen constants")
    kl, kr = const_order_key(left), const_order_key(right)
    return kl < kr if op == "<" else kl <= kr


# ---------------------------------------------------------------------------
# Atoms, comparisons, conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set:
        return {a for a in self.args if isinstance(a, Var)}

    def is_ground(self) -> bool:
        return not self.variables()

    def substitute(self, mapping: Mapping[Var, Term]) -> "Atom":
        return Atom(self.relation, tuple(mapping.get(a, a) for a in self.args))


COMPARISON_OPS = ("=", "<", "<=")


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def __post_init__(self):
        if self.op not in COMPARISON_OPS:
            raise InputError(f"unsupported comparison operator {self.op!r}")

    def variables(self) -> set:
        return {t for t in (self.left, self.right) if isinstance(t, Var)}

    def substitute(self, mapping: Mapping[Var, Term]) -> "Comparison":
        return Comparison(
            mapping.get(self.left, self.left),
            self.op,
            mapping.get(self.right, self.right),
        )

    def holds(self, mapping: Mapping[Var, Term]) -> bool:
        left = mapping.get(self.left, self.left)
        right = mapping.get(self.right, self.right)
        return order_holds(left, self.op, right)


@dataclass(frozen=True)
class Condition:
    """A conjunction of relational atoms and comparison atoms."""

    atoms: tuple = ()
    comparisons: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "comparisons", tuple(self.comparisons))

    def variables(self) -> set:
        out = set()
        for a in self.atoms:
            out |= a.variables()
        for c in self.comparisons:
            out |= c.variables()
        return out

    def relational_variables(self) -> set:
        out = set()
        for a in self.atoms:
            out |= a.variables()
        return out

    def constants(self) -> set:
        out = set()
        for a in self.atoms:
            out |= {t for t in a.args if isinstance(t, Const)}
        for c in self.comparisons:
            out |= {t for t in (c.left, c.right) if isinstance(t, Const)}
        return out

    def join_variables(self) -> set:
        """Variables with two or more occurrences among relational atom
        argument positions."""
        seen, joins = set(), set()
        for a in self.atoms:
            for t in a.args:
                if isinstance(t, Var):
                    if t in seen:
                        joins.add(t)
                    seen.add(t)
        return joins

    def substitute(self, mapping: Mapping[Var, Term]) -> "Condition":
        return Condition(
            tuple(a.substitute(mapping) for a in self.atoms),
            tuple(c.substitute(mapping) for c in self.comparisons),
        )

    def merge(self, other: "Condition") -> "Condition":
        return Condition(self.atoms + other.atoms, self.comparisons + other.comparisons)


def _constant_equated_vars(comparisons: Iterable[Comparison]) -> set:
    out = set()
    for c in comparisons:
        if c.op == "=":
            if isinstance(c.left, Var) and isinstance(c.right, Const):
                out.add(c.left)
            if isinstance(c.right, Var) and isinstance(c.left, Const):
                out.add(c.right)
    return out


def check_condition_safety(cond: Condition, extra_atoms: Sequence[Atom] = ()):
    """Every comparison variable must occur in a relational atom (of the
    condition or the extra atoms) or be equated to a constant."""
    relational = set()
    for a in tuple(extra_atoms) + cond.atoms:
        relational |= a.variables()
    allowed = relational | _constant_equated_vars(cond.comparisons)
    for c in cond.comparisons:
        for v in c.variables():
            if v not in allowed:
                raise InputError(
                    f"unsafe condition: variable {v.name} occurs only in comparisons"
                )


# ---------------------------------------------------------------------------
# Conjunctive queries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjunctiveQuery:
    """A safe conjunctive query Q(head) :- body."""

    head: tuple
    body: Condition

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(self.head))
        check_condition_safety(self.body)
        relational = self.body.relational_variables()
        allowed = relational | _constant_equated_vars(self.body.comparisons)
        for t in self.head:
            if isinstance(t, Var) and t not in allowed:
                raise InputError(f"unsafe query: head variable {t.name} unbound")
            if isinstance(t, Null):
                raise InputError("null tokens are not allowed in queries")
        for a in self.body.atoms:
            for t in a.args:
                if isinstance(t, Null):
                    raise InputError("null tokens are not allowed in queries")

    # -- classification -----------------------------------------------------

    @property
    def is_relational(self) -> bool:
        """No comparison atoms at all (equalities included)."""
        return not self.body.comparisons

    @property
    def is_linear(self) -> bool:
        rels = [a.relation for a in self.body.atoms]
        return len(rels) == len(set(rels))

    @property
    def is_boolean(self) -> bool:
        return not any(isinstance(t, Var) for t in self.head)

    def variables(self) -> set:
        return self.body.variables() | {t for t in self.head if isinstance(t, Var)}

    def head_variables(self) -> set:
        return {t for t in self.head if isinstance(t, Var)}

    def constants(self) -> set:
        return self.body.constants() | {t for t in self.head if isinstance(t, Const)}

    def singleton_variables(self) -> set:
        """Variables occurring exactly once among relational atom positions."""
        counts = {}
        for a in self.body.atoms:
            for t in a.args:
                if isinstance(t, Var):
                    counts[t] = counts.get(t, 0) + 1
        return {v for v, n in counts.items() if n == 1}

    def substitute(self, mapping: Mapping[Var, Term]) -> "ConjunctiveQuery":
        return ConjunctiveQuery(
            tuple(mapping.get(t, t) for t in self.head),
            self.body.substitute(mapping),
        )

    def rename_apart(self, taken: set) -> "ConjunctiveQuery":
        """Rename this query's variables away from the given set."""
        mapping = {}
        for v in sorted(self.variables(), key=lambda v: v.name):
            if v in taken:
                i = 0
                while Var(f"{v.name}_{i}") in taken or Var(f"{v.name}_{i}") in mapping.values():
                    i += 1
                mapping[v] = Var(f"{v.name}_{i}")
        return self.substitute(mapping) if mapping else self


# ---------------------------------------------------------------------------
# Database instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatabaseInstance:
    facts: frozenset

    def __init__(self, facts: Iterable[Atom] = ()):
        object.__setattr__(self, "facts", frozenset(facts))
        by_rel = {}
        for f in self.facts:
            by_rel.setdefault(f.relation, []).append(f)
        for lst in by_rel.values():
            lst.sort(key=lambda a: tuple_sort_key(a.args))
        object.__setattr__(self, "_by_relation", by_rel)

    def facts_of(self, relation: str) -> list:
        return self._by_relation.get(relation, [])

    def relations(self) -> set:
        return set(self._by_relation)

    def sorted_facts(self) -> list:
        return sorted(self.facts, key=lambda a: (a.relation, tuple_sort_key(a.args)))

    def constants(self) -> set:
        return {t for f in self.facts for t in f.args if isinstance(t, Const)}

    def has_nulls(self) -> bool:
        return any(isinstance(t, Null) for f in self.facts for t in f.args)

    def union(self, other: "DatabaseInstance") -> "DatabaseInstance":
        return DatabaseInstance(self.facts | other.facts)

    def minus(self, facts: Iterable[Atom]) -> "DatabaseInstance":
        return DatabaseInstance(self.facts - set(facts))

    def __len__(self):
        return len(self.facts)

    def __contains__(self, fact: Atom):
        return fact in self.facts


def fact_dominated(sub: Atom, sup: Atom, three_null: bool = False) -> bool:
    """Is fact `sub` dominated by fact `sup`?

    Without `three_null`, any null in `sub` may stand for a non-null value in
    `sup`.  With `three_null`, the per-kind rules apply: _na must stay _na,
    _uk must be covered by a constant, _amb by a constant or _na.
    """
    if sub.relation != sup.relation or sub.arity != sup.arity:
        return False
    for s, d in zip(sub.args, sup.args):
        if isinstance(s, Null):
            if not three_null:
                if isinstance(d, Null) and d != s:
                    return False
                continue
            if s.kind is NullKind.NOT_APPLICABLE:
                if not (isinstance(d, Null) and d.kind is NullKind.NOT_APPLICABLE):
                    return False
            elif s.kind is NullKind.UNKNOWN:
                if not isinstance(d, (Const, FrozenConst)):
                    return False
            elif s.kind is NullKind.AMBIGUOUS:
                if not (isinstance(d, (Const, FrozenConst))
                        or (isinstance(d, Null) and d.kind is NullKind.NOT_APPLICABLE)):
                    return False
            else:  # PLAIN behaves like UNKNOWN (Codd)
                if not isinstance(d, (Const, FrozenConst)):
                    return False
        elif s != d:
            return False
    return True


def instance_dominated(sub: DatabaseInstance, sup: DatabaseInstance,
                       three_null: bool = False) -> bool:
    return all(
        any(fact_dominated(f, g, three_null) for g in sup.facts_of(f.relation))
        for f in sub.facts
    )


def instances_isomorphic(a: DatabaseInstance, b: DatabaseInstance) -> bool:
    """Equality up to a kind-preserving bijection between null tokens."""
    if len(a) != len(b):
        return False

    def shape(inst):
        tokens = {}
        shapes = []
        for f in inst.sorted_facts():
            args = []
            for t in f.args:
                if isinstance(t, Null):
                    args.append(("null", t.kind.value, tokens.setdefault(t, len(tokens))))
                else:
                    args.append(t)
            shapes.append((f.relation, tuple(args)))
        return sorted(shapes, key=repr)

    return shape(a) == shape(b)


# ---------------------------------------------------------------------------
# Incomplete databases
# ---------------------------------------------------------------------------

class Regime(Enum):
    NO_NULLS = "no-nulls"
    INCOMPLETE_FACTS = "incomplete-facts"
    RESTRICTED_FACTS = "restricted-facts"
    PARTIAL_FACTS = "partial-facts"


@dataclass(frozen=True)
class IncompleteDatabase:
    """An (ideal, available) pair with a regime-specific domination invariant."""

    ideal: DatabaseInstance
    available: DatabaseInstance
    regime: Regime = Regime.NO_NULLS

    def __post_init__(self):
        ideal, avail = self.ideal, self.available
        if self.regime is Regime.NO_NULLS:
            if ideal.has_nulls() or avail.has_nulls():
                raise InputError("no-nulls incomplete database contains null tokens")
            if not avail.facts <= ideal.facts:
                raise InputError("available instance is not a subset of the ideal one")
        elif self.regime is Regime.INCOMPLETE_FACTS:
            if ideal.has_nulls():
                raise InputError("ideal instance of an incomplete-facts database has nulls")
            if not instance_dominated(avail, ideal):
                raise InputError("available instance is not dominated by the ideal one")
        elif self.regime is Regime.RESTRICTED_FACTS:
            for f in ideal.facts | avail.facts:
                for t in f.args:
                    if isinstance(t, Null) and t.kind not in (
                            NullKind.PLAIN, NullKind.NOT_APPLICABLE):
                        raise InputError("restricted-facts databases admit only _na nulls")
            if not avail.facts <= ideal.facts:
                raise InputError("available instance is not a subset of the ideal one")
        else:  # PARTIAL_FACTS
            for f in ideal.facts:
                for t in f.args:
                    if isinstance(t, Null) and t.kind not in (
                            NullKind.PLAIN, NullKind.NOT_APPLICABLE):
                        raise InputError("partial-facts ideal instances admit only _na nulls")
            if not instance_dominated(avail, ideal, three_null=True):
                raise InputError("available instance is not dominated by the ideal one")


# ---------------------------------------------------------------------------
# Completeness statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TCStatement:
    """Compl(head; condition), optionally with a projection position set.

    An absent projection means all positions: the statement requires the
    constrained ideal facts themselves in the available instance.
    """

    head: Atom
    condition: Condition = Condition()
    projection: Optional[frozenset] = None

    def __post_init__(self):
        check_condition_safety(self.condition, extra_atoms=(self.head,))
        if self.projection is not None:
            proj = frozenset(self.projection)
            object.__setattr__(self, "projection", proj)
            bad = [p for p in proj if not 1 <= p <= self.head.arity]
            if bad:
                raise InputError(
                    f"projection positions {sorted(bad)} invalid for arity {self.head.arity}"
                )
        for t in self.head.args:
            if isinstance(t, Null):
                raise InputError("null tokens are not allowed in statements")
        for a in self.condition.atoms:
            for t in a.args:
                if isinstance(t, Null):
                    raise InputError("null tokens are not allowed in statements")

    @property
    def relation(self) -> str:
        return self.head.relation

    def positions(self) -> frozenset:
        if self.projection is None:
            return frozenset(range(1, self.head.arity + 1))
        return self.projection

    def is_key_preserving(self, key_len: int) -> bool:
        return frozenset(range(1, key_len + 1)) <= self.positions()

    def associated_query(self) -> ConjunctiveQuery:
        """Q_C(head args) :- head, condition."""
        return ConjunctiveQuery(
            self.head.args,
            Condition((self.head,) + self.condition.atoms, self.condition.comparisons),
        )

    def tgd_view(self) -> str:
        """The statement rendered as a tuple-generating dependency."""
        from .parser import emit_atom, emit_condition  # local import; no cycle at runtime

        body = [f"ideal.{emit_atom(self.head)}"]
        cond = emit_condition(self.condition)
        if cond:
            body.append(f"ideal.{cond}" if self.condition.atoms else cond)
        proj = self.positions()
        head_args = []
        for i, t in enumerate(self.head.args, start=1):
            head_args.append(t if i in proj else Var(f"z{i}"))
        head = emit_atom(Atom(self.head.relation, tuple(head_args)))
        return f"{', '.join(body)} -> available.{head}"


@dataclass(frozen=True)
class QCStatement:
    query: ConjunctiveQuery
    semantics: str = "set"

    def __post_init__(self):
        if self.semantics not in ("set", "bag"):
            raise InputError(f"unknown semantics {self.semantics!r}")


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Optional[dict] = None
    counterexample: Optional[IncompleteDatabase] = None

    def __bool__(self):
        return self.holds


# ---------------------------------------------------------------------------
# Bags
# ---------------------------------------------------------------------------

class Bag:
    """A multiset of tuples with explicit multiplicities."""

    __slots__ = ("_counts",)

    def __init__(self, items: Iterable[tuple] = ()):
        counts = {}
        for t in items:
            counts[t] = counts.get(t, 0) + 1
        self._counts = counts

    @classmethod
    def from_counts(cls, counts: Mapping[tuple, int]) -> "Bag":
        bag = cls()
        bag._counts = {t: n for t, n in counts.items() if n > 0}
        return bag

    def multiplicity(self, tup: tuple) -> int:
        return self._counts.get(tup, 0)

    def items(self):
        return sorted(self._counts.items(), key=lambda kv: tuple_sort_key(kv[0]))

    def support(self) -> set:
        return set(self._counts)

    def total(self) -> int:
        return sum(self._counts.values())

    def __eq__(self, other):
        return isinstance(other, Bag) and self._counts == other._counts

    def __len__(self):
        return self.total()

    def __iter__(self):
        for tup, n in self.items():
            for _ in range(n):
                yield tup

    def __repr__(self):
        return f"Bag({self._counts!r})"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

class NullPolicy(Enum):
    """How variables may bind null tokens during matching."""

    FORBID = "forbid"    # instances must be null-free
    CERT = "cert"        # certain-answer style: joins on _na/_amb blocked
    SQL = "sql"          # SQL style: join variables never bind a null


def _may_bind(policy: NullPolicy, token: Null, is_join: bool) -> bool:
    if policy is NullPolicy.FORBID:
        raise ReasoningError("null token in a null-free evaluation")
    if policy is NullPolicy.SQL:
        return not is_join
    # CERT: plain and _uk tokens act like ordinary (distinct) constants,
    # _na and _amb never satisfy a join position.
    if token.kind in (NullKind.PLAIN, NullKind.UNKNOWN):
        return True
    return not is_join


def _order_atoms(atoms: Sequence[Atom], db: DatabaseInstance) -> list:
    """Greedy join order: most bound variables first, smaller relations next."""
    remaining = list(atoms)
    ordered, bound = [], set()
    while remaining:
        best = min(
            remaining,
            key=lambda a: (
                -len(a.variables() & bound),
                len(db.facts_of(a.relation)),
                remaining.index(a),
            ),
        )
        remaining.remove(best)
        ordered.append(best)
        bound |= best.variables()
    return ordered


def satisfying_valuations(
    condition: Condition,
    db: DatabaseInstance,
    policy: NullPolicy = NullPolicy.FORBID,
    prebound: Optional[Mapping[Var, Term]] = None,
) -> Iterator[dict]:
    """Yield every valuation of the condition's variables satisfied over db."""
    join_vars = condition.join_variables()
    atoms = _order_atoms(condition.atoms, db)
    comparisons = condition.comparisons
    binding: dict = dict(prebound or {})

    # comparisons checked as soon as all their variables are bound
    check_after = []
    seen: set = set(binding)
    for a in atoms:
        seen |= a.variables()
        ready = [c for c in comparisons if c.variables() <= seen]
        check_after.append([c for c in ready if c not in sum(check_after, [])])
    ground_comparisons = [c for c in comparisons if not c.variables() or c.variables() <= set(binding)]

    def check(cs):
        return all(c.holds(binding) for c in cs)

    if not check(ground_comparisons):
        return

    def extend(i: int) -> Iterator[dict]:
        if i == len(atoms):
            yield dict(binding)
            return
        atom = atoms[i]
        for fact in db.facts_of(atom.relation):
            if fact.arity != atom.arity:
                continue
            newly = []
            ok = True
            for a, f in zip(atom.args, fact.args):
                if isinstance(a, Var):
                    cur = binding.get(a)
                    if cur is None and a not in binding:
                        if isinstance(f, Null) and not _may_bind(policy, f, a in join_vars):
                            ok = False
                            break
                        binding[a] = f
                        newly.append(a)
                    elif cur != f:
                        ok = False
                        break
                elif a != f:
                    ok = False
                    break
            if ok and check(check_after[i]):
                yield from extend(i + 1)
            for v in newly:
                del binding[v]

    yield from extend(0)


def instantiate(head: Sequence[Term], valuation: Mapping[Var, Term]) -> tuple:
    return tuple(valuation.get(t, t) if isinstance(t, Var) else t for t in head)


def evaluate(q: ConjunctiveQuery, d: DatabaseInstance, semantics: str = "set"):
    """Evaluate a query over a null-free instance.

    Bag semantics yields one tuple per satisfying valuation; set semantics
    deduplicates.  Null-aware evaluation lives in the nulls module.
    """
    if semantics not in ("set", "bag"):
        raise InputError(f"unknown semantics {semantics!r}")
    if d.has_nulls():
        raise ReasoningError("evaluate() requires a null-free instance")
    tuples = (
        instantiate(q.head, v)
        for v in satisfying_valuations(q.body, d, NullPolicy.FORBID)
    )
    if semantics == "set":
        return set(tuples)
    return Bag(tuples)


# ---------------------------------------------------------------------------
# Freezing
# ---------------------------------------------------------------------------

def freeze(c: Condition):
    """Map each variable of the condition to a distinct fresh constant and
    return (instance of the frozen relational atoms, the freeze mapping)."""
    mapping = {}
    for a in c.atoms:
        for t in a.args:
            if isinstance(t, Var) and t not in mapping:
                mapping[t] = fresh_frozen()
    for cmp_ in c.comparisons:
        for t in cmp_.variables():
            mapping.setdefault(t, fresh_frozen())
    facts = [a.substitute(mapping) for a in c.atoms]
    return DatabaseInstance(facts), mapping


# ---------------------------------------------------------------------------
# Statement / query satisfaction over incomplete databases
# ---------------------------------------------------------------------------

def satisfies_tc(idb: IncompleteDatabase, c: TCStatement) -> bool:
    """Does the incomplete database satisfy the table-completeness statement?

    Without a projection this is the containment Q_C(ideal) <= R(available);
    with one, every constrained ideal fact needs an indicator agreeing on the
    projection positions.  Conditions over null-bearing ideal instances are
    evaluated SQL-style.
    """
    if c.projection is None and idb.regime is not Regime.NO_NULLS:
        raise ReasoningError(
            "projection-free statements are interpreted over no-nulls databases"
        )
    policy = NullPolicy.FORBID if idb.regime is Regime.NO_NULLS else NullPolicy.SQL
    qc = c.associated_query()
    positions = sorted(c.positions())
    available = idb.available.facts_of(c.relation)
    for v in satisfying_valuations(qc.body, idb.ideal, policy):
        constrained = instantiate(c.head.args, v)
        if not any(
            all(f.args[p - 1] == constrained[p - 1] for p in positions)
            for f in available
        ):
            return False
    return True


def satisfies_qc(idb: IncompleteDatabase, q: ConjunctiveQuery, semantics: str = "set") -> bool:
    """Query completeness over a no-nulls incomplete database: both sides of
    the pair return identical answers."""
    if idb.regime is not Regime.NO_NULLS:
        raise ReasoningError("satisfies_qc is defined on no-nulls databases; "
                             "use the nulls module for null regimes")
    return evaluate(q, idb.ideal, semantics) == evaluate(q, idb.available, semantics)
