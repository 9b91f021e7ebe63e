"""Brute-force ground oracle for row unification.

`ground_solutions` enumerates, over a small finite space, every
assignment of ground rows and base types to a problem's variables under
which both rows become the same label-to-type map.  `oracle_agrees`
compares that set with the set of ground instances of the unifier's
answer, so a wrong or over-specific substitution shows up as a set
difference rather than a syntactic mismatch.

The solution side is computed here by enumeration and map merging only;
it shares nothing with the unifier beyond the syntax types.  Comparison
is always relative to the space: both sides only count assignments
whose rows fit inside it.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional

from rowml.syntax import (
    BOOL,
    FreshVars,
    INT,
    ROW,
    STAR,
    STRING,
    TCon,
    TRow,
    TVar,
    Type,
    TypeVar,
    free_vars_ordered,
)

Problem = tuple[TRow, TRow]
GroundRow = tuple[tuple[str, str], ...]  # sorted (label, type name) pairs
Assignment = frozenset  # of (variable id, GroundRow | type name)


@dataclass(frozen=True)
class GroundSpace:
    """The finite space ground solutions are drawn from."""

    labels: tuple[str, ...] = ("a", "b", "c", "d")
    base_types: tuple[TCon, ...] = (INT, BOOL, STRING)
    max_row_size: int = 3

    def __post_init__(self) -> None:
        assert self.labels and self.base_types and self.max_row_size >= 0

    @property
    def type_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.base_types)


@lru_cache(maxsize=None)
def _ground_row_keys(space: GroundSpace) -> tuple[GroundRow, ...]:
    labels = tuple(sorted(space.labels))
    names = space.type_names
    keys: list[GroundRow] = []
    for size in range(min(space.max_row_size, len(labels)) + 1):
        for combo in itertools.combinations(labels, size):
            for types in itertools.product(names, repeat=size):
                keys.append(tuple(zip(combo, types)))
    return tuple(keys)


def enumerate_ground_rows(space: GroundSpace) -> Iterator[TRow]:
    """All closed rows over the space, sizes 0 through max_row_size."""
    by_name = {t.name: t for t in space.base_types}
    for key in _ground_row_keys(space):
        yield TRow({label: by_name[name] for label, name in key}, None)


@lru_cache(maxsize=None)
def _merge(fields: GroundRow, extra: GroundRow) -> Optional[GroundRow]:
    """Union of two ground rows, or None when a label repeats."""
    if not fields:
        return extra
    if not extra:
        return fields
    merged = fields + extra
    if len({label for label, _ in merged}) < len(merged):
        return None
    return tuple(sorted(merged))


@lru_cache(maxsize=None)
def _absorption_index(fields: GroundRow, space: GroundSpace) -> dict[GroundRow, tuple[GroundRow, ...]]:
    """For an open side with the given fields: merged result -> the
    ground rows its tail can take to produce it."""
    index: dict[GroundRow, list[GroundRow]] = {}
    for key in _ground_row_keys(space):
        merged = _merge(fields, key)
        if merged is not None:
            index.setdefault(merged, []).append(key)
    return {merged: tuple(keys) for merged, keys in index.items()}


def _problem_vars(problem: Problem) -> tuple[list[TypeVar], list[TypeVar]]:
    """Row tails and star-kinded field variables, in a fixed order."""
    row_vars: list[TypeVar] = []
    star_vars: list[TypeVar] = []
    for side in problem:
        for label in sorted(side.fields):
            t = side.fields[label]
            if isinstance(t, TCon):
                continue
            if isinstance(t, TVar) and t.var.kind == STAR:
                if t.var not in star_vars:
                    star_vars.append(t.var)
                continue
            raise ValueError(
                "oracle problems allow only base types and plain type variables in fields"
            )
        if side.tail is not None and side.tail not in row_vars:
            row_vars.append(side.tail)
    if len(row_vars) > 2:
        raise ValueError("oracle problems allow at most two distinct row variables")
    return row_vars, star_vars


def _ground_fields(side: TRow, star_env: dict[int, str]) -> GroundRow:
    return tuple(
        sorted(
            (label, t.name if isinstance(t, TCon) else star_env[t.var.id])
            for label, t in side.fields.items()
        )
    )


def ground_solutions(problem: Problem, space: GroundSpace) -> set[Assignment]:
    """Every assignment of ground rows/types (within the space) to the
    problem's variables making both sides the same label-to-type map."""
    r1, r2 = problem
    row_vars, star_vars = _problem_vars(problem)
    rows = _ground_row_keys(space)
    solutions: set[Assignment] = set()
    tail1, tail2 = r1.tail, r2.tail
    for combo in itertools.product(space.type_names, repeat=len(star_vars)):
        star_env = {v.id: name for v, name in zip(star_vars, combo)}
        star_items = tuple((v.id, star_env[v.id]) for v in star_vars)
        fields1 = _ground_fields(r1, star_env)
        fields2 = _ground_fields(r2, star_env)
        if tail1 is None and tail2 is None:
            if fields1 == fields2:
                solutions.add(frozenset(star_items))
        elif tail1 is not None and tail2 is not None and tail1.id == tail2.id:
            for key in rows:
                m1 = _merge(fields1, key)
                if m1 is not None and m1 == _merge(fields2, key):
                    solutions.add(frozenset(star_items + ((tail1.id, key),)))
        elif tail1 is not None and tail2 is not None:
            index1 = _absorption_index(fields1, space)
            index2 = _absorption_index(fields2, space)
            for merged in index1.keys() & index2.keys():
                for key1 in index1[merged]:
                    for key2 in index2[merged]:
                        solutions.add(
                            frozenset(star_items + ((tail1.id, key1), (tail2.id, key2)))
                        )
        else:
            if tail1 is not None:
                open_fields, open_tail, closed_fields = fields1, tail1, fields2
            else:
                open_fields, open_tail, closed_fields = fields2, tail2, fields1
            index = _absorption_index(open_fields, space)
            for key in index.get(closed_fields, ()):
                solutions.add(frozenset(star_items + ((open_tail.id, key),)))
    return solutions


def _ground_row_value(
    t: Type, row_env: dict[int, GroundRow], star_env: dict[int, str]
) -> Optional[GroundRow]:
    if isinstance(t, TVar):
        return row_env[t.var.id]
    assert isinstance(t, TRow)
    fields = _ground_fields(t, star_env)
    if t.tail is None:
        return fields
    return _merge(fields, row_env[t.tail.id])


def _admissible(
    problem: Problem,
    row_assignment: dict[int, GroundRow],
    star_assignment: dict[int, str],
) -> bool:
    """Whether substituting the assignment into the problem keeps both
    rows duplicate-free (assignments that do not are no solutions and no
    instances either)."""
    for side in problem:
        if side.tail is None:
            continue
        fields = _ground_fields(side, star_assignment)
        if _merge(fields, row_assignment[side.tail.id]) is None:
            return False
    return True


def _instances_within(sigma, problem: Problem, space: GroundSpace) -> set[Assignment]:
    """Ground instances of the substitution, restricted to assignments
    that fit in the space (labels and size) and are admissible for the
    problem."""
    row_vars, star_vars = _problem_vars(problem)
    images: dict[int, Type] = {}
    for v in row_vars:
        images[v.id] = sigma.mapping.get(v.id, TRow({}, v))
    for v in star_vars:
        images[v.id] = sigma.mapping.get(v.id, TVar(v))

    residual_rows: list[TypeVar] = []
    residual_stars: list[TypeVar] = []
    for v in row_vars + star_vars:
        for free in free_vars_ordered(images[v.id]):
            bucket = residual_rows if free.kind == ROW else residual_stars
            if free not in bucket:
                bucket.append(free)

    rows = _ground_row_keys(space)
    label_set = set(space.labels)
    out: set[Assignment] = set()
    for row_choice in itertools.product(rows, repeat=len(residual_rows)):
        row_env = {v.id: key for v, key in zip(residual_rows, row_choice)}
        for star_choice in itertools.product(space.type_names, repeat=len(residual_stars)):
            star_env = {v.id: name for v, name in zip(residual_stars, star_choice)}
            row_values: dict[int, GroundRow] = {}
            valid = True
            for v in row_vars:
                value = _ground_row_value(images[v.id], row_env, star_env)
                if (
                    value is None
                    or len(value) > space.max_row_size
                    or any(label not in label_set for label, _ in value)
                ):
                    valid = False
                    break
                row_values[v.id] = value
            if not valid:
                continue
            star_values: dict[int, str] = {}
            for v in star_vars:
                image = images[v.id]
                star_values[v.id] = (
                    image.name if isinstance(image, TCon) else star_env[image.var.id]
                )
            if not _admissible(problem, row_values, star_values):
                continue
            out.add(frozenset(tuple(row_values.items()) + tuple(star_values.items())))
    return out


def oracle_agrees(
    problem: Problem,
    space: GroundSpace,
    unifier=None,
    fresh_start: int = 1_000_000,
) -> bool:
    """Run the unifier and the brute-force enumeration on one problem.

    True when both report no solution, or when the unifier's answer (a)
    actually unifies the two rows and (b) has exactly the brute-forced
    ground solutions as its instances within the space.
    """
    from rowml.unify import UnifyError, unify_rows

    run = unifier if unifier is not None else unify_rows
    r1, r2 = problem
    try:
        sigma = run(r1, r2, FreshVars(fresh_start))
    except UnifyError:
        sigma = None
    solutions = ground_solutions(problem, space)
    if sigma is None:
        return not solutions
    try:
        if sigma.apply(r1) != sigma.apply(r2):  # rows compare modulo field order
            return False
    except UnifyError:
        return False
    return _instances_within(sigma, problem, space) == solutions


# ---------------------------------------------------------------------------
# Problem generators and campaigns

_RHO1 = TypeVar(1, ROW)
_RHO2 = TypeVar(2, ROW)
_ALPHA = TypeVar(3, STAR)
_BETA = TypeVar(4, STAR)


def exhaustive_problems(space: GroundSpace) -> Iterator[Problem]:
    """Every problem whose sides use ground fields over the space's
    labels and at most one tail per side (two row variables total)."""
    field_maps = [dict(key) for key in _ground_row_keys(space)]
    by_name = {t.name: t for t in space.base_types}
    sides = [
        {label: by_name[name] for label, name in fm.items()} for fm in field_maps
    ]
    for fields1 in sides:
        for tail1 in (None, _RHO1):
            left = TRow(fields1, tail1)
            for fields2 in sides:
                for tail2 in (None, _RHO1, _RHO2):
                    yield (left, TRow(fields2, tail2))


def sample_problems(
    count: int, space: GroundSpace, seed: int = 0
) -> Iterator[Problem]:
    """Randomized problems over the space; fields may also be the shared
    type variables so pointwise unification gets exercised."""
    rng = random.Random(seed)
    type_pool: list[Type] = list(space.base_types)
    var_pool: list[Type] = [TVar(_ALPHA), TVar(_BETA)]
    max_fields = min(3, len(space.labels))

    def side(tails: tuple) -> TRow:
        size = rng.randint(0, max_fields)
        labels = rng.sample(sorted(space.labels), size)
        fields: dict[str, Type] = {}
        for label in labels:
            if rng.random() < 0.2:
                fields[label] = rng.choice(var_pool)
            else:
                fields[label] = rng.choice(type_pool)
        return TRow(fields, rng.choice(tails))

    for _ in range(count):
        yield (side((None, _RHO1)), side((None, _RHO1, _RHO2)))


@dataclass
class CampaignResult:
    problems: int
    failures: int
    first_failure: Problem | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0


def run_campaign(
    problems: Iterable[Problem], space: GroundSpace, unifier=None
) -> CampaignResult:
    """oracle_agrees over a stream of problems, counting disagreements."""
    total = failures = 0
    first: Problem | None = None
    for problem in problems:
        total += 1
        if not oracle_agrees(problem, space, unifier):
            failures += 1
            if first is None:
                first = problem
    return CampaignResult(total, failures, first)
