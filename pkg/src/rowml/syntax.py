"""Kinds, types, terms and type schemes for a small functional language
with row-polymorphic extensible records.

A row is a finite, duplicate-free map from labels to types plus an
optional tail variable of kind row; a record type is the application of
the distinguished constructor ``Rec : row -> *`` to a row.  Rows are
unordered: ``fields`` is a dict, so structural equality already ignores
field order, and ``canonicalize_row`` merely fixes iteration and
printing order to be lexicographic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator, Union

if TYPE_CHECKING:
    from rowml.parser import SourceSpan


# ---------------------------------------------------------------------------
# Kinds


class Kind:
    """A kind: ``*`` for value types, ``row`` for rows, or an arrow."""


@dataclass(frozen=True)
class StarKind(Kind):
    def __str__(self) -> str:
        return "*"


@dataclass(frozen=True)
class RowKind(Kind):
    def __str__(self) -> str:
        return "row"


@dataclass(frozen=True)
class ArrowKind(Kind):
    param: Kind
    result: Kind

    def __str__(self) -> str:
        param = f"({self.param})" if isinstance(self.param, ArrowKind) else str(self.param)
        return f"{param} -> {self.result}"


STAR = StarKind()
ROW = RowKind()


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TypeVar:
    """A type or row variable; ids are unique within one inference session."""

    id: int
    kind: Kind = STAR


class Type:
    """Base class for type expressions."""


@dataclass(frozen=True)
class TVar(Type):
    var: TypeVar


@dataclass(frozen=True)
class TCon(Type):
    """A type constructor such as ``Int : *`` or ``List : * -> *``."""

    name: str
    kind: Kind = STAR


@dataclass(frozen=True)
class TApp(Type):
    fun: Type
    arg: Type


@dataclass(frozen=True)
class TFun(Type):
    dom: Type
    cod: Type


@dataclass(frozen=True)
class TRow(Type):
    """An unordered row ``{l1:T1, ...}``, open when it has a tail variable."""

    fields: dict[str, Type]
    tail: TypeVar | None = None

    def __post_init__(self) -> None:
        if self.tail is not None and self.tail.kind != ROW:
            raise ValueError(f"row tail must have kind row, got {self.tail.kind}")


INT = TCon("Int")
STRING = TCon("String")
BOOL = TCon("Bool")
LIST = TCon("List", ArrowKind(STAR, STAR))
REC = TCon("Rec", ArrowKind(ROW, STAR))

BASE_CONSTRUCTORS: dict[str, TCon] = {c.name: c for c in (INT, STRING, BOOL, LIST, REC)}


def record(fields: dict[str, Type], tail: TypeVar | None = None) -> Type:
    """The record type over the given row: ``Rec {fields | tail}``."""
    return TApp(REC, TRow(dict(fields), tail))


@dataclass(frozen=True)
class Scheme:
    """A type quantified over kinded variables, e.g. ``forall a:*. a -> a``.

    A scheme with no quantifiers is just a monomorphic type.
    """

    quantified: tuple[TypeVar, ...]
    body: Type

    def __post_init__(self) -> None:
        ids = [v.id for v in self.quantified]
        if len(set(ids)) != len(ids):
            raise ValueError("scheme quantifies the same variable twice")


def monotype(t: Type) -> Scheme:
    return Scheme((), t)


# ---------------------------------------------------------------------------
# Environments


@dataclass
class KindEnv:
    """Kinding context: the kinds of type constructors and type variables."""

    cons: dict[str, Kind] = field(default_factory=dict)
    vars: dict[int, Kind] = field(default_factory=dict)

    def with_vars(self, new: Iterable[TypeVar]) -> KindEnv:
        ext = dict(self.vars)
        for v in new:
            ext[v.id] = v.kind
        return KindEnv(self.cons, ext)


def base_kind_env() -> KindEnv:
    """The constructors every program starts with: Int, String, Bool, List, Rec."""
    return KindEnv({name: con.kind for name, con in BASE_CONSTRUCTORS.items()}, {})


@dataclass(frozen=True)
class TypeEnv:
    """Term-variable context; lookup returns the innermost binding first."""

    bindings: tuple[tuple[str, Scheme], ...] = ()

    def lookup(self, name: str) -> Scheme | None:
        for bound_name, scheme in self.bindings:
            if bound_name == name:
                return scheme
        return None

    def extend(self, name: str, scheme: Scheme) -> TypeEnv:
        return TypeEnv(((name, scheme),) + self.bindings)

    def __iter__(self) -> Iterator[tuple[str, Scheme]]:
        return iter(self.bindings)


# ---------------------------------------------------------------------------
# Terms


class Term:
    """Base class for surface-language terms."""


@dataclass(frozen=True)
class Var(Term):
    name: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lam(Term):
    param: str
    body: Term
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Let(Term):
    name: str
    bound: Term
    body: Term
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lit(Term):
    """An integer or string literal."""

    value: Union[int, str]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RecordLit(Term):
    fields: dict[str, Term]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Select(Term):
    record: Term
    label: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Extend(Term):
    label: str
    value: Term
    record: Term
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Restrict(Term):
    record: Term
    label: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Fresh variables


class FreshVars:
    """Monotone supply of fresh type variables for one inference session."""

    def __init__(self, start: int = 0) -> None:
        self._next = start

    def fresh(self, kind: Kind) -> TypeVar:
        v = TypeVar(self._next, kind)
        self._next += 1
        return v


# ---------------------------------------------------------------------------
# Traversals


def _iter_vars(t: Type) -> Iterator[TypeVar]:
    """Every variable occurrence, left to right, rows in label order."""
    if isinstance(t, TVar):
        yield t.var
    elif isinstance(t, TApp):
        yield from _iter_vars(t.fun)
        yield from _iter_vars(t.arg)
    elif isinstance(t, TFun):
        yield from _iter_vars(t.dom)
        yield from _iter_vars(t.cod)
    elif isinstance(t, TRow):
        for label in sorted(t.fields):
            yield from _iter_vars(t.fields[label])
        if t.tail is not None:
            yield t.tail


def free_vars_ordered(t: Type) -> list[TypeVar]:
    """Free variables of a type in first-occurrence order.

    Rows are traversed in lexicographic label order (fields before the
    tail) so the result does not depend on how a row was built.
    """
    seen: set[int] = set()
    out: list[TypeVar] = []
    for v in _iter_vars(t):
        if v.id not in seen:
            seen.add(v.id)
            out.append(v)
    return out


def free_type_vars(x: Union[Type, Scheme, TypeEnv]) -> set[TypeVar]:
    """The set of free type variables of a type, scheme, or environment."""
    if isinstance(x, Scheme):
        return free_type_vars(x.body) - set(x.quantified)
    if isinstance(x, TypeEnv):
        out: set[TypeVar] = set()
        for _, scheme in x:
            out |= free_type_vars(scheme)
        return out
    return set(_iter_vars(x))


def type_kind(t: Type) -> Kind:
    """The kind of a type, computed from the kinds its leaves carry.

    Unlike kind checking proper this consults no context and assumes the
    tree is well-kinded; it exists so substitutions can verify that
    bindings respect kinds.
    """
    if isinstance(t, TVar):
        return t.var.kind
    if isinstance(t, TCon):
        return t.kind
    if isinstance(t, TFun):
        return STAR
    if isinstance(t, TRow):
        return ROW
    if isinstance(t, TApp):
        k = type_kind(t.fun)
        assert isinstance(k, ArrowKind), f"application of non-constructor kind {k}"
        return k.result
    raise AssertionError(f"unexpected type node: {t!r}")


# ---------------------------------------------------------------------------
# Canonical form


def canonicalize_row(r: TRow) -> TRow:
    """The same row with fields iterated and printed in lexicographic order."""
    return TRow({label: r.fields[label] for label in sorted(r.fields)}, r.tail)


def canonicalize(t: Type) -> Type:
    """Recursively put every row in `t` into canonical field order."""
    if isinstance(t, TApp):
        return TApp(canonicalize(t.fun), canonicalize(t.arg))
    if isinstance(t, TFun):
        return TFun(canonicalize(t.dom), canonicalize(t.cod))
    if isinstance(t, TRow):
        return TRow({label: canonicalize(t.fields[label]) for label in sorted(t.fields)}, t.tail)
    return t


# ---------------------------------------------------------------------------
# Alpha equivalence


def alpha_equal(s1: Scheme, s2: Scheme) -> bool:
    """Whether two schemes are equal up to renaming of their quantified
    variables, ignoring row field order everywhere.

    Free variables must match exactly; quantified variables are paired
    up by position of first use, and paired variables must agree on
    kind.
    """
    q1 = {v.id for v in s1.quantified}
    q2 = {v.id for v in s2.quantified}
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}

    def vars_eq(v1: TypeVar, v2: TypeVar) -> bool:
        if (v1.id in q1) != (v2.id in q2) or v1.kind != v2.kind:
            return False
        if v1.id not in q1:
            return v1.id == v2.id
        if v1.id in fwd or v2.id in bwd:
            return fwd.get(v1.id) == v2.id and bwd.get(v2.id) == v1.id
        fwd[v1.id] = v2.id
        bwd[v2.id] = v1.id
        return True

    def go(t1: Type, t2: Type) -> bool:
        if isinstance(t1, TVar) and isinstance(t2, TVar):
            return vars_eq(t1.var, t2.var)
        if isinstance(t1, TCon) and isinstance(t2, TCon):
            return t1 == t2
        if isinstance(t1, TApp) and isinstance(t2, TApp):
            return go(t1.fun, t2.fun) and go(t1.arg, t2.arg)
        if isinstance(t1, TFun) and isinstance(t2, TFun):
            return go(t1.dom, t2.dom) and go(t1.cod, t2.cod)
        if isinstance(t1, TRow) and isinstance(t2, TRow):
            if set(t1.fields) != set(t2.fields):
                return False
            if not all(go(t1.fields[l], t2.fields[l]) for l in sorted(t1.fields)):
                return False
            if (t1.tail is None) != (t2.tail is None):
                return False
            return t1.tail is None or vars_eq(t1.tail, t2.tail)
        return False

    return go(s1.body, s2.body)


# ---------------------------------------------------------------------------
# Printing


_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _var_names() -> Iterator[str]:
    suffix = 0
    while True:
        for c in _LETTERS:
            yield c if suffix == 0 else f"{c}{suffix}"
        suffix += 1


def _kind_atom(k: Kind) -> str:
    return f"({k})" if isinstance(k, ArrowKind) else str(k)


def pretty_type(t: Type, names: dict[int, str] | None = None) -> str:
    """Render a type; variables not in `names` print as ``t<id>``."""
    table = names or {}

    def var_name(v: TypeVar) -> str:
        return table.get(v.id, f"t{v.id}")

    def go(t: Type) -> str:
        if isinstance(t, TVar):
            return var_name(t.var)
        if isinstance(t, TCon):
            return t.name
        if isinstance(t, TFun):
            dom = go(t.dom)
            if isinstance(t.dom, TFun):
                dom = f"({dom})"
            return f"{dom} -> {go(t.cod)}"
        if isinstance(t, TApp):
            fun = go(t.fun)
            if isinstance(t.fun, TFun):
                fun = f"({fun})"
            arg = go(t.arg)
            if isinstance(t.arg, (TApp, TFun)):
                arg = f"({arg})"
            return f"{fun} {arg}"
        if isinstance(t, TRow):
            inner = ", ".join(f"{l}:{go(t.fields[l])}" for l in sorted(t.fields))
            if t.tail is not None:
                inner += f" | {var_name(t.tail)}"
            return "{" + inner + "}"
        raise AssertionError(f"unexpected type node: {t!r}")

    return go(t)


def pretty_scheme(s: Scheme) -> str:
    """Render a scheme, renaming variables to ``a, b, c, ...`` in
    first-occurrence order; monomorphic schemes print as bare types."""
    names: dict[int, str] = {}
    order: list[TypeVar] = []
    seq = _var_names()
    quantified = {v.id: v for v in s.quantified}
    for v in free_vars_ordered(s.body):
        if v.id in quantified and v.id not in names:
            names[v.id] = next(seq)
            order.append(v)
    for v in s.quantified:  # quantifiers that never occur in the body
        if v.id not in names:
            names[v.id] = next(seq)
            order.append(v)
    prefix = "".join(f"∀{names[v.id]}:{_kind_atom(v.kind)}. " for v in order)
    return prefix + pretty_type(s.body, names)


def pretty_types_shared(types: Iterable[Type]) -> list[str]:
    """Render several types with one shared variable-naming table, for
    error messages that mention more than one type."""
    types = list(types)
    names: dict[int, str] = {}
    seq = _var_names()
    for t in types:
        for v in free_vars_ordered(t):
            if v.id not in names:
                names[v.id] = next(seq)
    return [pretty_type(t, names) for t in types]


def _quote(s: str) -> str:
    escapes = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}
    return '"' + "".join(escapes.get(c, c) for c in s) + '"'


def pretty_term(t: Term) -> str:
    """Render a term in the concrete syntax accepted by the parser."""

    def atom(t: Term) -> str:
        s = go(t)
        if isinstance(t, (Lam, Let, App)):
            return f"({s})"
        return s

    def go(t: Term) -> str:
        if isinstance(t, Var):
            return t.name
        if isinstance(t, Lit):
            return _quote(t.value) if isinstance(t.value, str) else str(t.value)
        if isinstance(t, Lam):
            return f"\\{t.param}. {go(t.body)}"
        if isinstance(t, Let):
            return f"let {t.name} = {go(t.bound)} in {go(t.body)}"
        if isinstance(t, App):
            fun = go(t.fun)
            if isinstance(t.fun, (Lam, Let)):
                fun = f"({fun})"
            return f"{fun} {atom(t.arg)}"
        if isinstance(t, Select):
            return f"{atom(t.record)}.{t.label}"
        if isinstance(t, Restrict):
            return f"{atom(t.record)} - {t.label}"
        if isinstance(t, RecordLit):
            inner = ", ".join(f"{l} = {go(t.fields[l])}" for l in sorted(t.fields))
            return "{" + inner + "}"
        if isinstance(t, Extend):
            return f"{{{t.label} = {go(t.value)} | {go(t.record)}}}"
        raise AssertionError(f"unexpected term node: {t!r}")

    return go(t)
