"""Command line front end.

Subcommands: run, check, kernel (dump the lowered program), bench.
Exit codes: 0 ok, 1 runtime error, 2 compile/analysis error, 3 usage.
"""

import argparse
import json
import sys

from .astnodes import RuleSet
from .errors import (
    AldaError,
    CompileError,
    FormatError,
    MixedPredicateError,
    RuntimeFault,
)
from .facts import load_fact_file
from .lowering import GLOBALS_CLASS, lower
from .parser import parse_program
from .pretty import pretty_print
from .runtime import Interp

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_COMPILE = 2
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    ap = _Parser(prog="alda", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, facts=True):
        p.add_argument("program", help="program file")
        if facts:
            p.add_argument("--facts", action="append", default=[],
                           metavar="NAME=PATH",
                           help="bind a fact file to a global (repeatable)")
        p.add_argument("--json", action="store_true",
                       help="machine-readable diagnostics")

    p_run = sub.add_parser("run", help="execute a program")
    common(p_run)
    p_run.add_argument("--trace-maintenance", action="store_true",
                       help="log implicit inference to stderr")
    p_run.add_argument("--maintain-every", action="store_true",
                       help="maintain after every update, ignoring the "
                            "static site analysis")
    p_run.add_argument("--seed", type=int, default=0,
                       help="reserved; output order is always canonical")
    p_run.add_argument("--dump-kernel", action="store_true",
                       help="print the lowered program before running")

    p_check = sub.add_parser("check", help="compile and report diagnostics")
    common(p_check)
    p_check.add_argument("--dump-kernel", action="store_true")

    p_kernel = sub.add_parser("kernel", help="print the lowered program")
    common(p_kernel, facts=True)

    p_bench = sub.add_parser("bench", help="run a benchmark suite")
    p_bench.add_argument("suite", choices=["tc", "tc-rev", "rbac"])
    p_bench.add_argument("--n", type=int, default=100,
                         help="cycle size for tc suites")
    p_bench.add_argument("--users", type=int, default=50)
    p_bench.add_argument("--roles", type=int, default=10)
    p_bench.add_argument("--updates", type=int, default=30,
                         help="role-hierarchy edges for the rbac suite")
    p_bench.add_argument("--repeat", type=int, default=1)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--json", action="store_true")
    return ap


def _diag(e: AldaError, as_json: bool):
    if as_json:
        payload = {"error": {"type": type(e).__name__, "message": e.msg,
                             "line": e.line, "col": e.col}}
        print(json.dumps(payload), file=sys.stderr)
    else:
        print(f"alda: {type(e).__name__}: {e}", file=sys.stderr)


def _read_program(path: str, as_json: bool):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        print(f"alda: cannot read {path}: {e.strerror}", file=sys.stderr)
        return None


def _parse_facts(specs, as_json: bool):
    """NAME=PATH bindings -> (name, elements) list, or an exit code."""
    out = []
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep or not name.isidentifier():
            print(f"alda: bad --facts binding {spec!r}, want NAME=PATH",
                  file=sys.stderr)
            return EXIT_USAGE
        try:
            out.append((name, load_fact_file(path)))
        except (FormatError, MixedPredicateError) as e:
            _diag(e, as_json)
            return EXIT_COMPILE
        except OSError as e:
            print(f"alda: cannot read {path}: {e.strerror}", file=sys.stderr)
            return EXIT_USAGE
    return out


def _compile(src: str, fact_names, as_json: bool):
    try:
        prog = parse_program(src)
        return lower(prog, extra_globals=tuple(fact_names))
    except CompileError as e:
        _diag(e, as_json)
        return None


def kernel_text(kp) -> str:
    chunks = []
    for u, rs in kp.rulesets.items():
        chunks.append(pretty_print(RuleSet(u, rs.rules)))
    for name, cd in kp.class_asts().items():
        if name == GLOBALS_CLASS:
            continue
        chunks.append(pretty_print(cd))
    chunks.append(pretty_print(kp.top))
    return "\n\n".join(chunks) + "\n"


def cmd_run(args) -> int:
    src = _read_program(args.program, args.json)
    if src is None:
        return EXIT_USAGE
    facts = _parse_facts(args.facts, args.json)
    if isinstance(facts, int):
        return facts
    kp = _compile(src, [n for n, _ in facts], args.json)
    if kp is None:
        return EXIT_COMPILE
    if args.dump_kernel:
        print(kernel_text(kp), end="")
    trace = None
    if args.trace_maintenance:
        trace = lambda msg: print(msg, file=sys.stderr)  # noqa: E731
    mode = "every" if args.maintain_every else "classified"
    interp = Interp(kp, maintain_mode=mode, trace=trace)
    try:
        for name, elements in facts:
            interp.assign_global(name, interp.heap.new_set(elements))
        interp.run()
    except (FormatError, MixedPredicateError) as e:
        # load_facts builtin hit a bad file mid-run
        _diag(e, args.json)
        return EXIT_COMPILE
    except OSError as e:
        print(f"alda: cannot read {e.filename}: {e.strerror}",
              file=sys.stderr)
        return EXIT_USAGE
    except RuntimeFault as e:
        _diag(e, args.json)
        return EXIT_RUNTIME
    except RecursionError:
        print("alda: call depth exceeded", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_check(args) -> int:
    src = _read_program(args.program, args.json)
    if src is None:
        return EXIT_USAGE
    facts = _parse_facts(args.facts, args.json)
    if isinstance(facts, int):
        return facts
    kp = _compile(src, [n for n, _ in facts], args.json)
    if kp is None:
        return EXIT_COMPILE
    if args.dump_kernel:
        print(kernel_text(kp), end="")
    if args.json:
        payload = {
            "sites": [
                {"line": r.line, "col": r.col, "kind": r.kind,
                 "detail": r.detail, "classification": r.classification,
                 "rulesets": sorted(r.rulesets)}
                for r in kp.sites
            ],
            "rulesets": {
                u: {"scope": kp.ruleset_scope[u],
                    "base": sorted(rs.base_keys),
                    "derived": sorted(rs.derived_keys),
                    "strata": [sorted(s) for s in rs.strata]}
                for u, rs in kp.rulesets.items()
            },
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    for u, rs in kp.rulesets.items():
        strata = "; ".join(", ".join(sorted(s)) for s in rs.strata)
        print(f"rule set {u} [{kp.ruleset_scope[u]}]: "
              f"base {sorted(rs.base_keys)}, derived {sorted(rs.derived_keys)}")
        print(f"  strata: {strata}")
    for r in kp.sites:
        pos = f"{r.line}:{r.col}" if r.line is not None else "?"
        used = f" (rule sets: {', '.join(sorted(r.rulesets))})" \
            if r.rulesets else ""
        print(f"{pos}: {r.kind} {r.detail}: {r.classification}{used}")
    print("ok")
    return EXIT_OK


def cmd_kernel(args) -> int:
    src = _read_program(args.program, args.json)
    if src is None:
        return EXIT_USAGE
    facts = _parse_facts(args.facts, args.json)
    if isinstance(facts, int):
        return facts
    kp = _compile(src, [n for n, _ in facts], args.json)
    if kp is None:
        return EXIT_COMPILE
    print(kernel_text(kp), end="")
    return EXIT_OK


def cmd_bench(args) -> int:
    from . import bench

    try:
        if args.suite in ("tc", "tc-rev"):
            report = bench.bench_tc(args.n, reverse=(args.suite == "tc-rev"),
                                    repeat=args.repeat)
        else:
            report = bench.bench_rbac(args.users, args.roles, args.updates,
                                      seed=args.seed, repeat=args.repeat)
    except AldaError as e:
        _diag(e, args.json)
        return EXIT_RUNTIME
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for line in bench.format_report(report):
            print(line)
    return EXIT_OK


def main(argv=None) -> int:
    sys.setrecursionlimit(20000)
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "check": cmd_check, "kernel": cmd_kernel,
                "bench": cmd_bench}
    return handlers[args.cmd](args)


if __name__ == "__main__":
    sys.exit(main())
