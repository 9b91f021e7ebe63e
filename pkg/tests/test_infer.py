"""Tests for type inference: schemes, let polymorphism, records, errors,
and the staging discipline."""

import pytest

import rowml.infer as infer_mod
from rowml.infer import (
    InferSession,
    KindFailure,
    NotARecord,
    UnboundVariable,
    UnifyFailure,
    generalize,
    infer_program,
    infer_term,
    instantiate,
)
from rowml.parser import parse_term
from rowml.syntax import (
    INT,
    ROW,
    STRING,
    Scheme,
    TFun,
    TVar,
    TypeEnv,
    TypeVar,
    alpha_equal,
    free_type_vars,
    pretty_scheme,
    record,
)
from rowml.unify import DuplicateLabel, Mismatch, OccursCheck, RowMissingLabel

A = TypeVar(0)
RHO = TypeVar(1, ROW)


def scheme_of(src: str, env: TypeEnv | None = None) -> Scheme:
    return infer_program(src, env=env)


class TestInstantiate:
    def test_fresh_copies(self):
        session = InferSession(fresh_start=10)
        s = Scheme((A,), TFun(TVar(A), TVar(A)))
        t1 = instantiate(session, s)
        t2 = instantiate(session, s)
        assert isinstance(t1, TFun) and t1.dom == t1.cod
        assert t1 != t2  # distinct fresh variables each time
        assert A not in free_type_vars(t1)

    def test_row_binder_gets_row_kind(self):
        session = InferSession(fresh_start=10)
        s = Scheme((RHO,), record({"name": STRING}, RHO))
        t = instantiate(session, s)
        (v,) = free_type_vars(t)
        assert v.kind == ROW and v != RHO

    def test_free_vars_survive_instantiation(self):
        session = InferSession(fresh_start=10)
        b = TypeVar(5)
        s = Scheme((A,), TFun(TVar(A), TVar(b)))
        assert free_type_vars(instantiate(session, s)) >= free_type_vars(s)

    def test_monomorphic_is_identity(self):
        session = InferSession()
        assert instantiate(session, Scheme((), INT)) is INT


class TestGeneralize:
    def test_closed_environment(self):
        s = generalize(TypeEnv(), TFun(TVar(A), TVar(A)))
        assert s == Scheme((A,), TFun(TVar(A), TVar(A)))

    def test_row_polymorphic_scheme(self):
        t = TFun(record({"name": STRING}, RHO), STRING)
        s = generalize(TypeEnv(), t)
        assert s.quantified == (RHO,)

    def test_environment_blocks_generalization(self):
        env = TypeEnv().extend("x", Scheme((), TVar(A)))
        s = generalize(env, TFun(TVar(A), INT))
        assert s.quantified == ()

    def test_quantifier_order_is_first_occurrence(self):
        b = TypeVar(7)
        t = TFun(TVar(b), TFun(TVar(A), TVar(b)))
        assert generalize(TypeEnv(), t).quantified == (b, A)


class TestInferExamples:
    def test_identity(self):
        assert pretty_scheme(scheme_of("\\x. x")) == "∀a:*. a -> a"

    def test_record_literal(self):
        assert pretty_scheme(scheme_of('{name = "Ana", age = 7}')) == "Rec {age:Int, name:String}"

    def test_field_selection_is_row_polymorphic(self):
        got = scheme_of("\\r. r.name")
        a, rho = TypeVar(50), TypeVar(51, ROW)
        want = Scheme((a, rho), TFun(record({"name": TVar(a)}, rho), TVar(a)))
        assert alpha_equal(got, want)

    def test_missing_label_is_reported(self):
        with pytest.raises(UnifyFailure) as exc:
            scheme_of("(\\r. r.name) {age = 7}")
        assert isinstance(exc.value.cause, RowMissingLabel)
        assert exc.value.cause.label == "name"

    def test_one_function_many_records(self):
        src = (
            "let pair = \\x. \\y. \\s. s x y in "
            "let f = \\r. r.name in "
            'pair (f {name = "a"}) (f {name = "b", age = 1})'
        )
        scheme_of(src)  # must simply typecheck

    def test_literals(self):
        assert pretty_scheme(scheme_of("42")) == "Int"
        assert pretty_scheme(scheme_of('"hi"')) == "String"

    def test_single_field_record(self):
        assert pretty_scheme(scheme_of('{name = "Ana"}')) == "Rec {name:String}"

    def test_selection_result(self):
        src = 'let f = \\r. r.name in f {name = "a", age = 1}'
        assert pretty_scheme(scheme_of(src)) == "String"

    def test_extension(self):
        got = scheme_of("\\r. {x = 1 | r}")
        rho = TypeVar(60, ROW)
        want = Scheme(
            (rho,), TFun(record({}, rho), record({"x": INT}, rho))
        )
        assert alpha_equal(got, want)

    def test_restriction(self):
        got = scheme_of("\\r. r - x")
        a, rho = TypeVar(61), TypeVar(62, ROW)
        want = Scheme((a, rho), TFun(record({"x": TVar(a)}, rho), record({}, rho)))
        assert alpha_equal(got, want)

    def test_extension_after_restriction_replaces_field(self):
        src = '\\r. {x = "s" | r - x}'
        got = scheme_of(src)
        a, rho = TypeVar(63), TypeVar(64, ROW)
        want = Scheme(
            (a, rho),
            TFun(record({"x": TVar(a)}, rho), record({"x": STRING}, rho)),
        )
        assert alpha_equal(got, want)

    def test_nested_records(self):
        src = '{outer = {inner = 1}, flag = "y"}'
        assert (
            pretty_scheme(scheme_of(src))
            == "Rec {flag:String, outer:Rec {inner:Int}}"
        )


class TestHMBattery:
    def test_let_polymorphism_accepted(self):
        src = (
            "let pair = \\x. \\y. \\s. s x y in "
            'let id = \\z. z in pair (id 1) (id "a")'
        )
        scheme_of(src)

    def test_lambda_bound_polymorphism_rejected(self):
        src = (
            "let pair = \\x. \\y. \\s. s x y in "
            '(\\id. pair (id 1) (id "a")) (\\z. z)'
        )
        with pytest.raises(UnifyFailure) as exc:
            scheme_of(src)
        assert isinstance(exc.value.cause, Mismatch)

    def test_self_application_fails_occurs_check(self):
        with pytest.raises(UnifyFailure) as exc:
            scheme_of("\\x. x x")
        assert isinstance(exc.value.cause, OccursCheck)

    def test_applying_a_non_function(self):
        with pytest.raises(UnifyFailure) as exc:
            scheme_of("7 8")
        assert isinstance(exc.value.cause, Mismatch)
        assert exc.value.cause.left == INT
        assert isinstance(exc.value.cause.right, TFun)
        assert exc.value.cause.right.dom == INT

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariable):
            scheme_of("nope")

    def test_shadowing_uses_innermost_binding(self):
        assert pretty_scheme(scheme_of("\\x. \\x. x")) == "∀a:*. ∀b:*. a -> b -> b"


class TestRecordErrors:
    def test_selection_via_application_mismatches(self):
        # the lambda itself types fine; the failure is applying it to an Int
        with pytest.raises(UnifyFailure) as exc:
            scheme_of("(\\x. x.name) 7")
        assert isinstance(exc.value.cause, Mismatch)

    def test_selecting_from_literal(self):
        with pytest.raises(NotARecord):
            scheme_of("7 . name".replace(" ", ""))

    def test_restricting_a_string(self):
        with pytest.raises(NotARecord):
            scheme_of('"s" - x')

    def test_extending_a_list_alike(self):
        env = TypeEnv().extend("xs", Scheme((), INT))
        with pytest.raises(NotARecord):
            infer_program("{a = 1 | xs}", env=env)

    def test_duplicate_extension_of_known_record(self):
        # the record already has x; the merge that would duplicate it is
        # reported where the substitution gets applied
        with pytest.raises(UnifyFailure) as exc:
            scheme_of("let r = {x = 1} in {x = 2 | r}")
        assert isinstance(exc.value.cause, DuplicateLabel)
        assert exc.value.cause.label == "x"

    def test_duplicate_extension_through_application(self):
        # same collision, but the row is still open when extended and the
        # duplicate only appears when the function meets its argument
        src = '(\\r. {x = 2 | r}) {x = "s"}'
        with pytest.raises(UnifyFailure) as exc:
            scheme_of(src)
        assert isinstance(exc.value.cause, DuplicateLabel)

    def test_error_spans_point_into_source(self):
        src = "(\\r. r.name) {age = 7}"
        with pytest.raises(UnifyFailure) as exc:
            scheme_of(src)
        span = exc.value.span
        assert span is not None and 0 <= span.start < span.end <= len(src)


class TestStageSeparation:
    def test_ill_kinded_environment_scheme_fails_first(self):
        # Rec applied to a star-kinded argument; the program itself would
        # also fail to unify, but the kind error must win
        from rowml.syntax import REC, TApp

        bad = Scheme((A,), TApp(REC, TVar(A)))
        env = TypeEnv().extend("x", bad)
        with pytest.raises(KindFailure):
            infer_program("7 8", env=env)

    def test_row_valued_scheme_rejected(self):
        env = TypeEnv().extend("x", Scheme((RHO,), TVar(RHO)))
        with pytest.raises(KindFailure):
            infer_program("x", env=env)

    def test_no_kind_checking_during_inference(self, monkeypatch):
        calls = []

        def spy(delta, tau):
            calls.append(tau)
            raise AssertionError("kind_of must not run during inference")

        monkeypatch.setattr(infer_mod, "check_scheme", lambda d, s: None)
        import rowml.kindcheck as kindcheck_mod

        monkeypatch.setattr(kindcheck_mod, "kind_of", spy)
        scheme_of('let f = \\r. {y = 2 | r - y} in f {x = 1, y = "s"}')
        assert calls == []

    def test_kinding_happens_before_any_unification(self, monkeypatch):
        events = []
        real_check = infer_mod.check_scheme
        real_unify = infer_mod.unify

        monkeypatch.setattr(
            infer_mod, "check_scheme", lambda d, s: events.append("kind") or real_check(d, s)
        )
        monkeypatch.setattr(
            infer_mod, "unify", lambda *a, **k: events.append("unify") or real_unify(*a, **k)
        )
        env = TypeEnv().extend("n", Scheme((), INT))
        infer_program("(\\x. x) n", env=env)
        assert "kind" in events and "unify" in events
        assert events.index("kind") < events.index("unify")


class TestResultIsFullySubstituted:
    @pytest.mark.parametrize(
        "src",
        [
            "\\x. x",
            "\\r. r.name",
            "let f = \\r. r.name in f",
            "\\r. {x = 1 | r}",
            '{a = {b = "s"}}',
        ],
    )
    def test_session_substitution_is_settled(self, src):
        session = InferSession()
        t = infer_term(session, TypeEnv(), parse_term(src))
        assert session.resolve(t) == t
        for image in session.subst.mapping.values():  # idempotency
            assert session.resolve(image) == image


class TestInferProgramPipeline:
    def test_env_schemes_are_usable(self):
        env = TypeEnv().extend(
            "get_name", Scheme((RHO,), TFun(record({"name": STRING}, RHO), STRING))
        )
        assert pretty_scheme(infer_program('get_name {name = "x", age = 1}', env=env)) == "String"

    def test_result_rows_are_canonical(self):
        s = infer_program('{z = 1, a = "s"}')
        assert list(s.body.arg.fields) == ["a", "z"]

    def test_parse_errors_surface(self):
        from rowml.parser import ParseError

        with pytest.raises(ParseError):
            infer_program("let = 1")
