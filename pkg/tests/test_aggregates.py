"""Aggregate queries: count, sum, max/min, dominance."""

import random

import pytest

from cqcheck.aggregates import AggregateQuery, dominated, tc_qc_count, tc_qc_max, tc_qc_sum
from cqcheck.completeness import canonical_statements, tc_qc_bag
from cqcheck.containment import contained
from cqcheck.errors import Refusal
from cqcheck.model import (
    Atom,
    Comparison,
    Condition,
    ConjunctiveQuery,
    Const,
    TCStatement,
    Var,
)
from tests.gen import rand_query, rand_statements

V = Var
C = Const


def atom(rel, *args):
    return Atom(rel, args)


class TestCount:
    def test_canonical_statements_suffice(self, school):
        core = school.query("QNr")
        cs = list(canonical_statements(core))
        assert tc_qc_count(cs, AggregateQuery(core, "count")).holds

    def test_level_statement_covers_level_count(self, school):
        qa = AggregateQuery(school.query("QNr"), "count")
        assert tc_qc_count([school.statement("C4A")], qa).holds

    def test_empty_statements_fail(self, school):
        qa = AggregateQuery(school.query("QNr"), "count")
        assert not tc_qc_count([], qa).holds

    def test_exactly_bag_entailment_of_core(self):
        rng = random.Random(31)
        for _ in range(120):
            core = rand_query(rng, with_comparisons=True)
            stmts = rand_statements(rng, max_statements=2)
            qa = AggregateQuery(core, "count")
            assert tc_qc_count(stmts, qa).holds == tc_qc_bag(stmts, core).holds


class TestSum:
    def test_nonnegative_sum(self):
        core = ConjunctiveQuery(
            (V("x"), V("y")),
            Condition((atom("r", V("x"), V("y")),), (Comparison(C(0), "<=", V("y")),)),
        )
        full = TCStatement(atom("r", V("a"), V("b")), Condition())
        assert tc_qc_sum([full], AggregateQuery(core, "sum")).holds

    def test_unbounded_summand_refused(self):
        core = ConjunctiveQuery(
            (V("x"), V("y")), Condition((atom("r", V("x"), V("y")),), ())
        )
        with pytest.raises(Refusal):
            tc_qc_sum([], AggregateQuery(core, "sum"))

    def test_order_comparisons_in_statements_refused(self):
        core = ConjunctiveQuery(
            (V("x"), V("y")),
            Condition((atom("r", V("x"), V("y")),), (Comparison(C(0), "<=", V("y")),)),
        )
        stmt = TCStatement(
            atom("r", V("a"), V("b")),
            Condition((), (Comparison(V("b"), "<", C(3)),)),
        )
        with pytest.raises(Refusal):
            tc_qc_sum([stmt], AggregateQuery(core, "sum"))

    def test_forced_equalities_reduced_before_gating(self):
        # the summand is pinned to a nonnegative constant via an equality
        core = ConjunctiveQuery(
            (V("x"), V("y")),
            Condition((atom("r", V("x"), V("y")),), (Comparison(V("y"), "=", C(2)),)),
        )
        full = TCStatement(atom("r", V("a"), V("b")), Condition())
        assert tc_qc_sum([full], AggregateQuery(core, "sum")).holds


class TestDominance:
    def test_reflexive(self):
        rng = random.Random(32)
        for _ in range(50):
            q = rand_query(rng, head_arity=2)
            assert dominated(q, q).holds

    def test_renaming(self):
        q1 = ConjunctiveQuery(
            (V("x"), V("y")), Condition((atom("r", V("x"), V("y")),), ())
        )
        q2 = ConjunctiveQuery(
            (V("x"), V("y2")), Condition((atom("r", V("x"), V("y2")),), ())
        )
        assert dominated(q1, q2).holds

    def test_wider_bound_does_not_dominate(self):
        lt5 = ConjunctiveQuery(
            (V("x"), V("y")),
            Condition((atom("r", V("x"), V("y")),), (Comparison(V("y"), "<", C(5)),)),
        )
        lt3 = ConjunctiveQuery(
            (V("x"), V("y2")),
            Condition((atom("r", V("x"), V("y2")),), (Comparison(V("y2"), "<", C(3)),)),
        )
        assert not dominated(lt5, lt3).holds
        assert dominated(lt3, lt5).holds

    def test_containment_implies_dominance(self):
        rng = random.Random(33)
        for i in range(80):
            q1 = rand_query(rng, with_comparisons=(i % 2 == 0), head_arity=2)
            q2 = rand_query(rng, with_comparisons=(i % 3 == 0), head_arity=2)
            if contained(q1, [q2]).holds:
                assert dominated(q1, q2).holds

    def test_equals_containment_on_relational_inputs(self):
        rng = random.Random(34)
        for _ in range(100):
            q1 = rand_query(rng, head_arity=2)
            q2 = rand_query(rng, head_arity=2)
            assert dominated(q1, q2).holds == contained(q1, [q2]).holds


class TestMaxMin:
    def test_canonical_statements_suffice(self, school):
        core = school.query("QBestPt")
        cs = list(canonical_statements(core))
        assert tc_qc_max(cs, AggregateQuery(core, "max")).holds

    def test_pupils_complete_but_grades_unconstrained(self, school):
        qa = AggregateQuery(school.query("QBestPt"), "max")
        assert not tc_qc_max([school.statement("C4A")], qa).holds

    def test_single_atom_core_with_unconditional_statement(self):
        core = ConjunctiveQuery(
            (V("g"),), Condition((atom("result", V("n"), C("Pottery"), V("g")),), ())
        )
        full = TCStatement(atom("result", V("a"), V("b"), V("c")), Condition())
        assert tc_qc_max([full], AggregateQuery(core, "max")).holds
        assert tc_qc_max([full], AggregateQuery(core, "min")).holds

    def test_bag_entailment_implies_max_completeness(self):
        rng = random.Random(35)
        for i in range(100):
            core = rand_query(rng, with_comparisons=(i % 3 == 0), head_arity=2)
            stmts = rand_statements(rng, max_statements=2)
            if tc_qc_bag(stmts, core).holds:
                assert tc_qc_max(stmts, AggregateQuery(core, "max")).holds
