"""Instance reasoning: entailment relative to a concrete available database
plus dimension analysis."""

import random

import pytest

from cqcheck.completeness import tc_qc_set
from cqcheck.errors import InputError
from cqcheck.instances import (
    COMPLETE,
    POSSIBLY_INCOMPLETE,
    dimension_analysis,
    qc_qc_instance,
    tc_qc_instance,
)
from cqcheck.model import (
    Atom,
    Condition,
    ConjunctiveQuery,
    Const,
    DatabaseInstance,
    Var,
    evaluate,
    satisfies_tc,
)
from tests.gen import rand_instance, rand_query, rand_statements

V = Var
C = Const


def atom(rel, *args):
    return Atom(rel, args)


class TestTcQcInstance:
    def test_no_greek_rows_makes_the_query_complete(self, school):
        verdict = tc_qc_instance(
            school.instance("DGreekFree"),
            [school.statement("CResult")],
            school.query("QGreek"),
        )
        assert verdict.holds

    def test_unmatched_greek_row_breaks_it(self, school):
        verdict = tc_qc_instance(
            school.instance("DGreekRow"),
            [school.statement("CResult")],
            school.query("QGreek"),
        )
        assert not verdict.holds
        ce = verdict.counterexample
        assert satisfies_tc(ce, school.statement("CResult"))
        assert evaluate(school.query("QGreek"), ce.ideal) != evaluate(
            school.query("QGreek"), ce.available
        )

    def test_empty_statements_over_empty_instance(self):
        q = ConjunctiveQuery((V("x"),), Condition((atom("r", V("x")),), ()))
        assert not tc_qc_instance(DatabaseInstance(), [], q).holds

    def test_conservative_over_instance_free_entailment(self):
        """Whatever holds for all instances holds for each one."""
        rng = random.Random(41)
        checked = 0
        for i in range(200):
            q = rand_query(rng, max_atoms=2, with_comparisons=(i % 4 == 0))
            stmts = rand_statements(rng, max_statements=2)
            try:
                if not tc_qc_set(stmts, q).holds:
                    continue
            except Exception:
                continue
            d = rand_instance(rng, max_facts=3)
            assert tc_qc_instance(d, stmts, q).holds
            checked += 1
        assert checked >= 20

    def test_counterexamples_validate(self):
        rng = random.Random(42)
        for i in range(60):
            q = rand_query(rng, max_atoms=2, with_comparisons=(i % 3 == 0))
            stmts = rand_statements(rng, max_statements=1)
            d = rand_instance(rng, max_facts=3)
            verdict = tc_qc_instance(d, stmts, q)
            if not verdict.holds:
                ce = verdict.counterexample
                assert ce.available == d
                assert all(satisfies_tc(ce, c) for c in stmts)
                assert evaluate(q, ce.ideal) != evaluate(q, ce.available)

    def test_fresh_pool_growth_never_flips_verdicts(self):
        """One fresh value per query variable is enough on the relational
        corpus: doubling the enumeration pool changes nothing."""
        import cqcheck.instances as inst

        rng = random.Random(43)
        original = inst._constant_pool
        for _ in range(40):
            q = rand_query(rng, max_atoms=2)
            stmts = rand_statements(rng, max_statements=1)
            d = rand_instance(rng, max_facts=2)
            base = tc_qc_instance(d, stmts, q).holds
            try:
                inst._constant_pool = lambda known, fresh, gaps: original(
                    known, fresh * 2 + 1, gaps
                )
                widened = tc_qc_instance(d, stmts, q).holds
            finally:
                inst._constant_pool = original
            assert base == widened


class TestQcQcInstance:
    def test_self_premise(self):
        q = ConjunctiveQuery((V("x"),), Condition((atom("r", V("x")),), ()))
        d = DatabaseInstance([atom("r", C(1))])
        assert qc_qc_instance(d, [q], q).holds

    def test_no_premises(self):
        q = ConjunctiveQuery((V("x"),), Condition((atom("r", V("x")),), ()))
        d = DatabaseInstance([atom("r", C(1))])
        assert not qc_qc_instance(d, [], q).holds

    def test_short_paths_pin_longer_paths_here(self):
        edge = lambda a, b: atom("edge", a, b)
        p2 = ConjunctiveQuery(
            (V("x"), V("y")),
            Condition((edge(V("x"), V("z")), edge(V("z"), V("y"))), ()),
        )
        p3 = ConjunctiveQuery(
            (V("x"), V("y")),
            Condition(
                (edge(V("x"), V("z1")), edge(V("z1"), V("z2")), edge(V("z2"), V("y"))),
                (),
            ),
        )
        d = DatabaseInstance([edge(C(1), C(2)), edge(C(2), C(3)), edge(C(3), C(4))])
        assert qc_qc_instance(d, [p2], p3).holds

    def test_counterexamples_validate(self):
        rng = random.Random(44)
        for _ in range(60):
            q = rand_query(rng, max_atoms=2)
            premises = [rand_query(rng, max_atoms=2)]
            d = rand_instance(rng, max_facts=3)
            verdict = qc_qc_instance(d, premises, q)
            if not verdict.holds:
                ce = verdict.counterexample
                for p in premises:
                    assert evaluate(p, ce.ideal) == evaluate(p, ce.available)
                assert evaluate(q, ce.ideal) != evaluate(q, ce.available)


class TestDimensionAnalysis:
    def test_school_enrollment_fixture(self, school):
        report = dimension_analysis(
            school.instance("DEnrollment"),
            [school.statement("CSubmitted")],
            school.query("QPerSchool"),
            [V("s")],
        )
        assert report.per_value[(C("HoferSchool"),)] == COMPLETE
        assert report.per_value[(C("DaVinci"),)] == COMPLETE
        assert report.per_value[(C("MaxValier"),)] == POSSIBLY_INCOMPLETE
        assert report.per_value[(C("Gherdena"),)] == POSSIBLY_INCOMPLETE
        assert report.new_values_possible

    def test_canonical_statements_make_everything_complete(self, school):
        from cqcheck.completeness import canonical_statements

        q = school.query("QPerSchool")
        report = dimension_analysis(
            school.instance("DEnrollment"),
            list(canonical_statements(q)),
            q,
            [V("s")],
        )
        assert set(report.per_value.values()) == {COMPLETE}
        assert not report.new_values_possible

    def test_no_statements_everything_open(self, school):
        report = dimension_analysis(
            school.instance("DEnrollment"), [], school.query("QPerSchool"), [V("s")]
        )
        assert set(report.per_value.values()) == {POSSIBLY_INCOMPLETE}
        assert report.new_values_possible

    def test_dimension_must_be_a_head_variable(self, school):
        with pytest.raises(InputError):
            dimension_analysis(
                school.instance("DEnrollment"),
                [],
                school.query("QPerSchool"),
                [V("nope")],
            )
