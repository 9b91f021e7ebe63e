"""Command line driver: typecheck files, run a REPL, or exercise the
row unifier against the brute-force oracle.

Exit codes: 0 when every input typechecks (or the oracle found no
disagreement), 1 on a parse/kind/type error or oracle failure, 2 on
usage errors such as unreadable files.
"""

from __future__ import annotations

import argparse
import string
import sys
from typing import Sequence

from rowml.infer import InferError, infer_program
from rowml.oracle import (
    GroundSpace,
    exhaustive_problems,
    run_campaign,
    sample_problems,
)
from rowml.parser import ParseError
from rowml.syntax import BOOL, INT, STRING, pretty_scheme, pretty_type


def _error_line(path: str, err: Exception) -> str:
    span = getattr(err, "span", None)
    line = span.line if span is not None else 1
    col = span.col if span is not None else 1
    return f"{path}:{line}:{col}: error: {err}"


def cmd_check(paths: Sequence[str], out=None, err=None) -> int:
    """Typecheck each file; print its principal scheme or a located error."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    status = 0
    for path in paths:
        try:
            with open(path, encoding="utf-8") as handle:
                src = handle.read()
        except OSError as exc:
            print(f"rowml: cannot read {path}: {exc.strerror}", file=err)
            status = 2
            continue
        try:
            scheme = infer_program(src)
        except (ParseError, InferError) as exc:
            print(_error_line(path, exc), file=out)
            if status == 0:
                status = 1
            continue
        print(f"{path}: {pretty_scheme(scheme)}", file=out)
    return status


def cmd_repl(stdin=None, out=None) -> int:
    """Read one term per line and print its scheme; :quit exits."""
    stdin = stdin if stdin is not None else sys.stdin
    out = out if out is not None else sys.stdout
    interactive = hasattr(stdin, "isatty") and stdin.isatty()
    if interactive:
        print("rowml repl; :quit to exit", file=out)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        if line in (":quit", ":q"):
            break
        if line.startswith(":type "):
            line = line[len(":type "):]
        try:
            print(pretty_scheme(infer_program(line)), file=out)
        except (ParseError, InferError) as exc:
            print(f"error: {exc}", file=out)
    return 0


def cmd_oracle(labels: int, types: int, max_size: int, samples: int, out=None) -> int:
    """Exhaustive plus sampled oracle campaign over the requested space."""
    out = out if out is not None else sys.stdout
    space = GroundSpace(
        labels=tuple(string.ascii_lowercase[:labels]),
        base_types=(INT, BOOL, STRING)[:types],
        max_row_size=max_size,
    )
    exhaustive = run_campaign(exhaustive_problems(space), space)
    sampled = run_campaign(sample_problems(samples, space), space)
    problems = exhaustive.problems + sampled.problems
    failures = exhaustive.failures + sampled.failures
    print(f"{problems} problems, {failures} failures", file=out)
    first = exhaustive.first_failure or sampled.first_failure
    if first is not None:
        left, right = first
        print(
            f"first counterexample: {pretty_type(left)} =row= {pretty_type(right)}",
            file=out,
        )
    return 0 if failures == 0 else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rowml",
        description="Typechecker for a small functional language with "
        "row-polymorphic extensible records.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="typecheck source files")
    check.add_argument("files", nargs="+", metavar="file")

    sub.add_parser("repl", help="interactive type-at-a-time loop")

    oracle = sub.add_parser("oracle", help="compare the row unifier with brute force")
    oracle.add_argument("--labels", type=int, default=3, help="label alphabet size")
    oracle.add_argument("--types", type=int, default=3, help="how many base types")
    oracle.add_argument("--max-size", type=int, default=3, help="largest ground row")
    oracle.add_argument("--samples", type=int, default=10000, help="random problems")

    args = parser.parse_args(argv)
    if args.command == "check":
        return cmd_check(args.files)
    if args.command == "repl":
        return cmd_repl()
    if args.command == "oracle":
        if min(args.labels, args.types) < 1 or args.max_size < 0 or args.samples < 0:
            parser.error("oracle bounds must be positive")
        return cmd_oracle(args.labels, args.types, args.max_size, args.samples)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
