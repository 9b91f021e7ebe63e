"""Type inference for the surface language.

Algorithm-W style: a single session threads a fresh-variable supply and
an accumulated substitution, and every case returns a fully substituted
type.  Records funnel all row reasoning through unification against a
template ``Rec {l:a | r}``, so row unification is exercised exactly
where function application (and the record primitives, which are typed
as applications of such templates) demands it.

Inference is staged: `infer_program` first kind-checks every scheme of
the initial environment, then runs inference; constraint solving never
consults the kind checker.
"""

from __future__ import annotations

from typing import Union

from rowml.kindcheck import KindError, UnboundTypeName, check_scheme
from rowml.parser import SourceSpan, parse_term
from rowml.syntax import (
    App,
    Extend,
    FreshVars,
    INT,
    KindEnv,
    Lam,
    Let,
    Lit,
    REC,
    ROW,
    RecordLit,
    Restrict,
    STAR,
    Scheme,
    Select,
    STRING,
    TApp,
    TCon,
    TFun,
    TRow,
    TVar,
    Term,
    Type,
    TypeEnv,
    TypeVar,
    Var,
    base_kind_env,
    canonicalize,
    free_type_vars,
    free_vars_ordered,
    pretty_type,
)
from rowml.unify import Subst, UnifyError, unify


class InferError(Exception):
    """Base class for type errors; carries a source span when one is known."""

    def __init__(self, message: str, span: SourceSpan | None = None) -> None:
        super().__init__(message)
        self.span = span


class UnboundVariable(InferError):
    def __init__(self, name: str, span: SourceSpan | None = None) -> None:
        super().__init__(f"unbound variable '{name}'", span)
        self.name = name


class UnifyFailure(InferError):
    """A unification step failed; wraps the underlying UnifyError."""

    def __init__(self, cause: UnifyError, span: SourceSpan | None = None) -> None:
        super().__init__(str(cause), span)
        self.cause = cause


class KindFailure(InferError):
    """The kinding stage rejected a scheme before inference began."""

    def __init__(self, cause: Union[KindError, UnboundTypeName]) -> None:
        super().__init__(f"kind error: {cause}")
        self.cause = cause


class NotARecord(InferError):
    def __init__(self, actual: Type, span: SourceSpan | None = None) -> None:
        super().__init__(f"not a record: {pretty_type(actual)}", span)
        self.actual = actual


class InferSession:
    """Mutable state for inferring one program: the fresh-variable
    counter, the kinding context, and the accumulated substitution."""

    def __init__(self, delta: KindEnv | None = None, fresh_start: int = 0) -> None:
        self.delta = delta if delta is not None else base_kind_env()
        self.fresh = FreshVars(fresh_start)
        self.subst = Subst.empty()

    def fresh_var(self, kind) -> TypeVar:
        return self.fresh.fresh(kind)

    def resolve(self, t: Type) -> Type:
        return self.subst.apply(t)

    def resolve_env(self, gamma: TypeEnv) -> TypeEnv:
        return self.subst.apply_env(gamma)

    def unify(self, t1: Type, t2: Type, span: SourceSpan | None) -> None:
        try:
            step = unify(t1, t2, self.fresh)
        except UnifyError as exc:
            raise UnifyFailure(exc, span) from exc
        self.subst = step.compose(self.subst)


def instantiate(session: InferSession, scheme: Scheme) -> Type:
    """The scheme's body with every quantified variable replaced by a
    fresh variable of the same kind."""
    if not scheme.quantified:
        return scheme.body
    renaming = Subst(
        {v.id: TVar(session.fresh_var(v.kind)) for v in scheme.quantified}
    )
    return renaming.apply(scheme.body)


def generalize(gamma: TypeEnv, tau: Type) -> Scheme:
    """Quantify the variables free in `tau` but not in `gamma`,
    in first-occurrence order; `tau` must be fully substituted."""
    env_ids = {v.id for v in free_type_vars(gamma)}
    quantified = tuple(v for v in free_vars_ordered(tau) if v.id not in env_ids)
    return Scheme(quantified, tau)


def _head_constructor(t: Type) -> Type:
    while isinstance(t, TApp):
        t = t.fun
    return t


def _require_record(t: Type, span: SourceSpan | None) -> None:
    head = _head_constructor(t)
    if isinstance(head, (TCon, TFun)) and head != REC:
        raise NotARecord(t, span)


def infer_term(session: InferSession, gamma: TypeEnv, term: Term) -> Type:
    """Infer the (fully substituted) type of `term` under `gamma`."""
    if isinstance(term, Var):
        scheme = gamma.lookup(term.name)
        if scheme is None:
            raise UnboundVariable(term.name, term.span)
        return session.resolve(instantiate(session, scheme))

    if isinstance(term, Lit):
        return INT if isinstance(term.value, int) else STRING

    if isinstance(term, Lam):
        param = TVar(session.fresh_var(STAR))
        inner = gamma.extend(term.param, Scheme((), param))
        body = infer_term(session, inner, term.body)
        return TFun(session.resolve(param), body)

    if isinstance(term, App):
        fun = infer_term(session, gamma, term.fun)
        arg = infer_term(session, gamma, term.arg)
        result = TVar(session.fresh_var(STAR))
        session.unify(session.resolve(fun), TFun(arg, result), term.span)
        return session.resolve(result)

    if isinstance(term, Let):
        bound = infer_term(session, gamma, term.bound)
        scheme = generalize(session.resolve_env(gamma), bound)
        return infer_term(session, gamma.extend(term.name, scheme), term.body)

    if isinstance(term, RecordLit):
        fields = {label: infer_term(session, gamma, value) for label, value in term.fields.items()}
        fields = {label: session.resolve(t) for label, t in fields.items()}
        return TApp(REC, TRow(fields, None))

    if isinstance(term, Select):
        rec_type = infer_term(session, gamma, term.record)
        _require_record(rec_type, term.span)
        value = TVar(session.fresh_var(STAR))
        rest = session.fresh_var(ROW)
        session.unify(rec_type, TApp(REC, TRow({term.label: value}, rest)), term.span)
        return session.resolve(value)

    if isinstance(term, Extend):
        value = infer_term(session, gamma, term.value)
        rec_type = infer_term(session, gamma, term.record)
        _require_record(rec_type, term.span)
        rest = session.fresh_var(ROW)
        session.unify(rec_type, TApp(REC, TRow({}, rest)), term.span)
        extended = TApp(REC, TRow({term.label: session.resolve(value)}, rest))
        try:
            return session.resolve(extended)
        except UnifyError as exc:  # the tail already carries this label
            raise UnifyFailure(exc, term.span) from exc

    if isinstance(term, Restrict):
        rec_type = infer_term(session, gamma, term.record)
        _require_record(rec_type, term.span)
        value = TVar(session.fresh_var(STAR))
        rest = session.fresh_var(ROW)
        session.unify(rec_type, TApp(REC, TRow({term.label: value}, rest)), term.span)
        return session.resolve(TApp(REC, TRow({}, rest)))

    raise AssertionError(f"unexpected term node: {term!r}")


def _id_ceiling(gamma: TypeEnv) -> int:
    highest = -1
    for _, scheme in gamma:
        for v in free_vars_ordered(scheme.body):
            highest = max(highest, v.id)
        for v in scheme.quantified:
            highest = max(highest, v.id)
    return highest + 1


def infer_program(
    src: str,
    env: TypeEnv | None = None,
    delta: KindEnv | None = None,
) -> Scheme:
    """Parse, kind-check, infer, and generalize a whole program.

    Stage one kind-checks every scheme in the initial environment (the
    only type annotations a program has); stage two runs inference and
    generalizes at top level.  The returned scheme has canonically
    ordered rows.  Raises ParseError, KindFailure, or one of the
    inference errors; the first failing stage wins.
    """
    term = parse_term(src)
    kind_env = delta if delta is not None else base_kind_env()
    gamma = env if env is not None else TypeEnv()
    for _, scheme in gamma:
        try:
            check_scheme(kind_env, scheme)
        except (KindError, UnboundTypeName) as exc:
            raise KindFailure(exc) from exc
    session = InferSession(kind_env, fresh_start=_id_ceiling(gamma))
    try:
        inferred = infer_term(session, gamma, term)
        result = generalize(session.resolve_env(gamma), inferred)
    except UnifyError as exc:  # a substitution merge outside a unify call
        raise UnifyFailure(exc, None) from exc
    return Scheme(result.quantified, canonicalize(result.body))
