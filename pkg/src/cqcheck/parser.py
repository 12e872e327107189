"""The textual workspace language (.cmpl) and its serializer.

Declarations end with a dot; `%` starts a comment.  Variables are bare
identifiers, constants are numbers (integers, decimals, or p/q rationals)
and double-quoted strings, and the null literals are `_`, `_uk`, `_na`,
`_amb` (instances only; every occurrence is a fresh token).

    rel person/2.
    query Q1(n) :- student(n, c, s), person(n, "male").
    tc C2 : student(n, c, s) ; person(n, "male").
    tc Cx : student[1,3](n, c, s) ; class(s, c, f, "arts").
    instance DS : person("John", "male"), person("Mary", "female").
    key student/3 = 1.
    goal set Q1.
    state s0 init.  state s1.  state s2.
    action pH rw pupil(n, 1, "HoferSchool") <~ request(n, "HoferSchool").
    action rH copy pupil(n, 1, "HoferSchool") -> pupil(n, 1, "HoferSchool").
    edge s0 pH s1.  edge s1 rH s2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .errors import InputError
from .model import (
    Atom,
    Comparison,
    Condition,
    ConjunctiveQuery,
    Const,
    DatabaseInstance,
    FrozenConst,
    IncompleteDatabase,
    Null,
    NullKind,
    TCStatement,
    Term,
    Var,
    Verdict,
    fresh_null,
    tuple_sort_key,
)
from .process import QATS, CopyEffect, RealWorldEffect

# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_PUNCT = (":-", "<~", "->", "<=", ">=", "<", ">", "=", ".", ",", ":", ";",
          "(", ")", "[", "]", "/")

_NULL_LITERALS = {
    "_": NullKind.PLAIN,
    "_uk": NullKind.UNKNOWN,
    "_na": NullKind.NOT_APPLICABLE,
    "_amb": NullKind.AMBIGUOUS,
}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | null | punct | eof
    value: object
    line: int
    column: int


def _lex(text: str) -> list:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)

    def err(msg):
        raise InputError(msg, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            i += 1
            col += 1
            out = []
            while True:
                if i >= n or text[i] == "\n":
                    raise InputError("unterminated string literal", start_line, start_col)
                c = text[i]
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in ('"', "\\"):
                        raise InputError("bad escape in string literal", line, col)
                    out.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                if ord(c) < 32:
                    raise InputError("control character in string literal", line, col)
                out.append(c)
                i += 1
                col += 1
            tokens.append(Token("string", "".join(out), start_line, start_col))
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                value = Fraction(text[i:j])
            elif j < n and text[j] == "/" and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                value = Fraction(text[i:j])
            else:
                value = Fraction(text[i:j])
            col += j - i
            i = j
            tokens.append(Token("number", value, start_line, start_col))
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            col += j - i
            i = j
            tokens.append(Token("ident", word, start_line, start_col))
            continue
        if ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word not in _NULL_LITERALS:
                raise InputError(
                    f"{word!r} is not a null literal (_, _uk, _na, _amb)",
                    start_line, start_col,
                )
            col += j - i
            i = j
            tokens.append(Token("null", _NULL_LITERALS[word], start_line, start_col))
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, start_line, start_col))
                i += len(p)
                col += len(p)
                break
        else:
            err(f"unexpected character {ch!r}")
    tokens.append(Token("eof", None, line, col))
    return tokens


# ---------------------------------------------------------------------------
# Workspace
# ---------------------------------------------------------------------------

@dataclass
class Workspace:
    schema: dict = field(default_factory=dict)       # relation -> arity
    queries: dict = field(default_factory=dict)      # name -> ConjunctiveQuery
    statements: dict = field(default_factory=dict)   # name -> TCStatement
    instances: dict = field(default_factory=dict)    # name -> DatabaseInstance
    keys: dict = field(default_factory=dict)         # relation -> key prefix length
    goals: list = field(default_factory=list)        # (semantics, query name)
    qats: Optional[QATS] = None

    def query(self, name: str) -> ConjunctiveQuery:
        if name not in self.queries:
            raise InputError(f"unknown query {name}")
        return self.queries[name]

    def statement(self, name: str) -> TCStatement:
        if name not in self.statements:
            raise InputError(f"unknown statement {name}")
        return self.statements[name]

    def instance(self, name: str) -> DatabaseInstance:
        if name not in self.instances:
            raise InputError(f"unknown instance {name}")
        return self.instances[name]


_COMPARE_OPS = {"=": "=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.pos = 0
        self.ws = Workspace()
        self._states: list = []
        self._initial: Optional[str] = None
        self._actions: dict = {}
        self._edges: list = []

    # -- token plumbing ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def err(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise InputError(msg, tok.line, tok.column)

    def expect_punct(self, value: str) -> Token:
        t = self.next()
        if t.kind != "punct" or t.value != value:
            self.err(f"expected {value!r}", t)
        return t

    def expect_ident(self, what: str = "identifier") -> Token:
        t = self.next()
        if t.kind != "ident":
            self.err(f"expected {what}", t)
        return t

    def at_punct(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.value == value

    def expect_nat(self, what: str) -> int:
        t = self.next()
        if t.kind != "number" or t.value.denominator != 1 or t.value < 0:
            self.err(f"expected {what}", t)
        return int(t.value)

    # -- grammar -------------------------------------------------------------

    def parse(self) -> Workspace:
        while self.peek().kind != "eof":
            t = self.expect_ident("declaration keyword")
            handler = {
                "rel": self.rel_decl,
                "query": self.query_decl,
                "tc": self.tc_decl,
                "instance": self.instance_decl,
                "key": self.key_decl,
                "goal": self.goal_decl,
                "state": self.state_decl,
                "action": self.action_decl,
                "edge": self.edge_decl,
            }.get(t.value)
            if handler is None:
                self.err(f"unknown declaration {t.value!r}", t)
            handler(t)
            self.expect_punct(".")
        self._finish_qats()
        self._validate_goals()
        return self.ws

    def rel_decl(self, kw: Token):
        name = self.expect_ident("relation name")
        self.expect_punct("/")
        arity = self.expect_nat("arity")
        if name.value in self.ws.schema:
            self.err(f"relation {name.value} declared twice", name)
        self.ws.schema[name.value] = arity

    def term(self, allow_null: bool) -> Term:
        t = self.next()
        if t.kind == "ident":
            return Var(t.value)
        if t.kind == "number":
            return Const(t.value)
        if t.kind == "string":
            return Const(t.value)
        if t.kind == "null":
            if not allow_null:
                self.err("null literals are only allowed in instance facts", t)
            return fresh_null(t.value)
        self.err("expected a term", t)

    def atom(self, allow_null: bool = False) -> Atom:
        name = self.expect_ident("relation name")
        self.expect_punct("(")
        args = []
        if not self.at_punct(")"):
            args.append(self.term(allow_null))
            while self.at_punct(","):
                self.next()
                args.append(self.term(allow_null))
        self.expect_punct(")")
        self._check_relation(name, len(args))
        return Atom(name.value, tuple(args))

    def _check_relation(self, name: Token, arity: int):
        declared = self.ws.schema.get(name.value)
        if declared is None:
            self.err(f"undeclared relation {name.value}", name)
        if declared != arity:
            self.err(
                f"relation {name.value} has arity {declared}, got {arity} arguments",
                name,
            )

    def body_item(self):
        """An atom, or a comparison written infix."""
        t = self.peek()
        after = self.tokens[self.pos + 1]
        if t.kind == "ident" and after.kind == "punct" and after.value == "(":
            return self.atom()
        left = self.term(allow_null=False)
        op_tok = self.next()
        if op_tok.kind != "punct" or op_tok.value not in _COMPARE_OPS:
            self.err("expected a comparison operator", op_tok)
        right = self.term(allow_null=False)
        op = op_tok.value
        if op == ">":
            left, right, op = right, left, "<"
        elif op == ">=":
            left, right, op = right, left, "<="
        if isinstance(left, Const) and isinstance(right, Const) and op != "=":
            if left.is_string != right.is_string:
                self.err("comparison between a number and a string", op_tok)
        if op == "=" and isinstance(left, Const) and isinstance(right, Const):
            if left.is_string != right.is_string:
                self.err("equality between a number and a string", op_tok)
        return Comparison(left, op, right)

    def condition(self) -> Condition:
        atoms, comparisons = [], []
        while True:
            item = self.body_item()
            if isinstance(item, Atom):
                atoms.append(item)
            else:
                comparisons.append(item)
            if self.at_punct(","):
                self.next()
                continue
            break
        return Condition(tuple(atoms), tuple(comparisons))

    def _guarded(self, build, tok: Token):
        try:
            return build()
        except InputError as e:
            if e.line is None:
                raise InputError(str(e), tok.line, tok.column) from None
            raise

    def query_decl(self, kw: Token):
        name = self.expect_ident("query name")
        if name.value in self.ws.queries:
            self.err(f"query {name.value} declared twice", name)
        self.expect_punct("(")
        head = []
        if not self.at_punct(")"):
            head.append(self.term(allow_null=False))
            while self.at_punct(","):
                self.next()
                head.append(self.term(allow_null=False))
        self.expect_punct(")")
        self.expect_punct(":-")
        body = self.condition()
        query = self._guarded(lambda: ConjunctiveQuery(tuple(head), body), name)
        self.ws.queries[name.value] = query

    def tc_decl(self, kw: Token):
        name = self.expect_ident("statement name")
        if name.value in self.ws.statements:
            self.err(f"statement {name.value} declared twice", name)
        self.expect_punct(":")
        rel = self.expect_ident("relation name")
        projection = None
        if self.at_punct("["):
            self.next()
            positions = [self.expect_nat("attribute position")]
            while self.at_punct(","):
                self.next()
                positions.append(self.expect_nat("attribute position"))
            self.expect_punct("]")
            projection = frozenset(positions)
        self.expect_punct("(")
        args = []
        if not self.at_punct(")"):
            args.append(self.term(allow_null=False))
            while self.at_punct(","):
                self.next()
                args.append(self.term(allow_null=False))
        self.expect_punct(")")
        self._check_relation(rel, len(args))
        head = Atom(rel.value, tuple(args))
        cond = Condition()
        if self.at_punct(";"):
            self.next()
            cond = self.condition()
        stmt = self._guarded(lambda: TCStatement(head, cond, projection), name)
        self.ws.statements[name.value] = stmt

    def instance_decl(self, kw: Token):
        name = self.expect_ident("instance name")
        if name.value in self.ws.instances:
            self.err(f"instance {name.value} declared twice", name)
        facts = []
        if self.at_punct(":"):
            self.next()
            facts.append(self._fact())
            while self.at_punct(","):
                self.next()
                facts.append(self._fact())
        self.ws.instances[name.value] = DatabaseInstance(facts)

    def _fact(self) -> Atom:
        tok = self.peek()
        atom = self.atom(allow_null=True)
        for arg in atom.args:
            if isinstance(arg, Var):
                self.err(f"instance facts must be ground, got variable {arg.name}", tok)
        return atom

    def key_decl(self, kw: Token):
        rel = self.expect_ident("relation name")
        self.expect_punct("/")
        arity = self.expect_nat("arity")
        declared = self.ws.schema.get(rel.value)
        if declared is None:
            self.err(f"undeclared relation {rel.value}", rel)
        if declared != arity:
            self.err(f"relation {rel.value} has arity {declared}", rel)
        self.expect_punct("=")
        k = self.expect_nat("key prefix length")
        if not 1 <= k <= arity:
            self.err(f"key prefix length {k} out of range 1..{arity}", rel)
        if rel.value in self.ws.keys:
            self.err(f"key for {rel.value} declared twice", rel)
        self.ws.keys[rel.value] = k

    def goal_decl(self, kw: Token):
        sem = self.expect_ident("semantics (set or bag)")
        if sem.value not in ("set", "bag"):
            self.err("expected set or bag", sem)
        name = self.expect_ident("query name")
        self.ws.goals.append((sem.value, name.value))

    def state_decl(self, kw: Token):
        name = self.expect_ident("state name")
        if name.value in self._states:
            self.err(f"state {name.value} declared twice", name)
        self._states.append(name.value)
        t = self.peek()
        if t.kind == "ident" and t.value == "init":
            self.next()
            if self._initial is not None:
                self.err("two initial states declared", t)
            self._initial = name.value

    def action_decl(self, kw: Token):
        name = self.expect_ident("action name")
        mode = self.expect_ident("rw or copy")
        if mode.value not in ("rw", "copy"):
            self.err("expected rw or copy", mode)
        head = self.atom()
        guard_atoms: list = []
        guard_cmps: list = []
        if mode.value == "rw":
            if self.at_punct("<~"):
                self.next()
                guard = self.condition()
                guard_atoms, guard_cmps = list(guard.atoms), list(guard.comparisons)
            effect = self._guarded(
                lambda: RealWorldEffect(head, Condition(tuple(guard_atoms), tuple(guard_cmps))),
                name,
            )
        else:
            while self.at_punct(","):
                self.next()
                item = self.body_item()
                if isinstance(item, Atom):
                    guard_atoms.append(item)
                else:
                    guard_cmps.append(item)
            self.expect_punct("->")
            target = self.atom()
            if target != head:
                self.err("copy effect must repeat its head atom after ->", name)
            effect = self._guarded(
                lambda: CopyEffect(head, Condition(tuple(guard_atoms), tuple(guard_cmps))),
                name,
            )
        self._actions.setdefault(name.value, []).append(effect)

    def edge_decl(self, kw: Token):
        source = self.expect_ident("state name")
        action = self.expect_ident("action name")
        target = self.expect_ident("state name")
        self._edges.append(((source.value, action.value, target.value), source))

    def _finish_qats(self):
        if not self._states and not self._actions and not self._edges:
            return
        if self._initial is None:
            raise InputError("no initial state declared (mark one with `init`)")
        real_world: dict = {}
        copies: dict = {}
        for action, effects in self._actions.items():
            rw = tuple(e for e in effects if isinstance(e, RealWorldEffect))
            ce = tuple(e for e in effects if isinstance(e, CopyEffect))
            if rw:
                real_world[action] = rw
            if ce:
                copies[action] = ce
        for (edge, tok) in self._edges:
            s, a, t = edge
            if s not in self._states or t not in self._states:
                raise InputError(f"edge references undeclared state", tok.line, tok.column)
            if a not in self._actions:
                raise InputError(f"edge references undeclared action {a}", tok.line, tok.column)
        self.ws.qats = QATS(
            states=frozenset(self._states),
            initial=self._initial,
            actions=frozenset(self._actions),
            edges=frozenset(e for (e, _) in self._edges),
            real_world=real_world,
            copies=copies,
        )

    def _validate_goals(self):
        for _, name in self.ws.goals:
            if name not in self.ws.queries:
                raise InputError(f"goal references unknown query {name}")


def parse_workspace(text: str) -> Workspace:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _emit_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def emit_term(t: Term, annotate_nulls: bool = False) -> str:
    if isinstance(t, Const):
        if t.is_string:
            escaped = t.value.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return _emit_rational(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Null):
        return f"{t.kind.value}#{t.nid}" if annotate_nulls else t.kind.value
    if isinstance(t, FrozenConst):
        return f"#f{t.fid}"
    raise InputError(f"cannot serialize {t!r}")


def emit_atom(a: Atom, annotate_nulls: bool = False) -> str:
    args = ", ".join(emit_term(t, annotate_nulls) for t in a.args)
    return f"{a.relation}({args})"


def emit_comparison(c: Comparison) -> str:
    return f"{emit_term(c.left)} {c.op} {emit_term(c.right)}"


def emit_condition(c: Condition) -> str:
    parts = [emit_atom(a) for a in c.atoms]
    parts.extend(emit_comparison(x) for x in c.comparisons)
    return ", ".join(parts)


def emit_query(name: str, q: ConjunctiveQuery) -> str:
    head = ", ".join(emit_term(t) for t in q.head)
    return f"query {name}({head}) :- {emit_condition(q.body)}."


def emit_statement(name: str, c: TCStatement) -> str:
    proj = ""
    if c.projection is not None:
        proj = "[" + ",".join(str(p) for p in sorted(c.projection)) + "]"
    args = ", ".join(emit_term(t) for t in c.head.args)
    head = f"{c.head.relation}{proj}({args})"
    cond = emit_condition(c.condition)
    return f"tc {name} : {head} ; {cond}." if cond else f"tc {name} : {head}."


def emit_instance(name: str, d: DatabaseInstance) -> str:
    if not d.facts:
        return f"instance {name}."
    facts = ", ".join(emit_atom(f) for f in d.sorted_facts())
    return f"instance {name} : {facts}."


def _emit_effect(action: str, effect) -> str:
    head = emit_atom(effect.head)
    guard = emit_condition(effect.guard)
    if isinstance(effect, RealWorldEffect):
        tail = f" <~ {guard}" if guard else ""
        return f"action {action} rw {head}{tail}."
    tail = f", {guard}" if guard else ""
    return f"action {action} copy {head}{tail} -> {head}."


def emit_qats(qats: QATS) -> list:
    lines = []
    for s in sorted(qats.states):
        mark = " init" if s == qats.initial else ""
        lines.append(f"state {s}{mark}.")
    for a in sorted(qats.actions):
        for e in qats.real_world.get(a, ()):
            lines.append(_emit_effect(a, e))
        for e in qats.copies.get(a, ()):
            lines.append(_emit_effect(a, e))
    for (s, a, t) in sorted(qats.edges):
        lines.append(f"edge {s} {a} {t}.")
    return lines


def emit_workspace(ws: Workspace) -> str:
    lines = []
    for rel in sorted(ws.schema):
        lines.append(f"rel {rel}/{ws.schema[rel]}.")
    for rel in sorted(ws.keys):
        lines.append(f"key {rel}/{ws.schema[rel]} = {ws.keys[rel]}.")
    for name in ws.queries:
        lines.append(emit_query(name, ws.queries[name]))
    for name in ws.statements:
        lines.append(emit_statement(name, ws.statements[name]))
    for name in ws.instances:
        lines.append(emit_instance(name, ws.instances[name]))
    for sem, name in ws.goals:
        lines.append(f"goal {sem} {name}.")
    if ws.qats is not None:
        lines.extend(emit_qats(ws.qats))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Verdict output
# ---------------------------------------------------------------------------

def _jsonify(x):
    if isinstance(x, (Const, Var, Null, FrozenConst)):
        return emit_term(x, annotate_nulls=True)
    if isinstance(x, Atom):
        return emit_atom(x, annotate_nulls=True)
    if isinstance(x, DatabaseInstance):
        return [emit_atom(f, annotate_nulls=True) for f in x.sorted_facts()]
    if isinstance(x, IncompleteDatabase):
        return {"ideal": _jsonify(x.ideal), "available": _jsonify(x.available)}
    if isinstance(x, dict):
        return {str(k): _jsonify(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonify(v) for v in x]
    if isinstance(x, Fraction):
        return _emit_rational(x)
    return x


def verdict_to_dict(v: Verdict) -> dict:
    out = {"holds": v.holds}
    if v.witness is not None:
        out["witness"] = _jsonify(v.witness)
    if v.counterexample is not None:
        out.setdefault("witness", {})
        if isinstance(out["witness"], dict):
            out["witness"].setdefault("ideal", _jsonify(v.counterexample.ideal))
            out["witness"].setdefault("available", _jsonify(v.counterexample.available))
    return out


def emit_verdict(v: Verdict) -> str:
    return json.dumps(verdict_to_dict(v), sort_keys=True, indent=2)
