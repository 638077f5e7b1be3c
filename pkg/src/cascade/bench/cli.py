"""Command-line driver: inspect each pipeline stage, run methods, benchmark."""
from __future__ import annotations

import argparse
import sys

from ..errors import CascadeError, UserError
from ..words import fits_smallint, is_smallint, signed, tag, untag

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; that code is reserved for internal errors
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _load_vm(path):
    from ..frontend import load_slang_file
    from ..runtime.vm import VM
    try:
        sources = load_slang_file(path)
    except OSError as exc:
        raise UserError(f"cannot read {path}: {exc.strerror}") from None
    vm = VM()
    selectors = [vm.define(src) for src in sources]
    return vm, selectors


def _selector(vm, selector):
    if selector not in vm.library:
        known = ", ".join(sorted(vm.library)) or "none"
        raise UserError(f"no method {selector!r} in file (defined: {known})")
    return selector


def cmd_parse(args, out):
    from ..frontend import format_method
    vm, selectors = _load_vm(args.file)
    for i, sel in enumerate(selectors):
        if i:
            out.write("\n")
        out.write(format_method(vm.method(sel)).rstrip("\n") + "\n")


def cmd_dump_reachable(args, out):
    from ..reachability import reachable_methods
    vm, _ = _load_vm(args.file)
    sel = _selector(vm, args.selector)
    table = vm.method_table()
    table.methods[sel] = vm.method(sel)
    reach = reachable_methods(sel, table)
    for s in reach.selectors:
        out.write(f"method    {s}\n")
    for t in reach.templates:
        out.write(f"template  {t}\n")
    for v in reach.vm_functions:
        out.write(f"vm        {v}\n")


def cmd_dump_ir(args, out):
    vm, _ = _load_vm(args.file)
    sel = _selector(vm, args.selector)
    prepared = vm.prepare(sel, native=False)
    fns = prepared.ssa if args.ssa else prepared.tac
    for i, name in enumerate(fns):
        if i:
            out.write("\n")
        out.write(fns[name].dump())


def cmd_dump_asm(args, out):
    vm, _ = _load_vm(args.file)
    sel = _selector(vm, args.selector)
    artifact = vm.prepare(sel).artifact
    out.write(artifact.listing.rstrip("\n") + "\n")
    if artifact.relocations:
        out.write("\nrelocations:\n")
        for r in artifact.relocations:
            out.write(f"  {r.offset:06x}  {r.kind:<11} {r.symbol}\n")


def _parse_int(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise UserError(f"argument {text!r} is not an integer") from None
    if not fits_smallint(value):
        raise UserError(f"argument {text} does not fit a tagged small integer")
    return value


def describe_result(word, returns_oop, as_hex=False):
    if returns_oop:
        if is_smallint(word):
            return str(untag(word))
        return f"0x{word:x}" if word else "nil"
    return f"0x{word:x}" if as_hex else str(signed(word))


def cmd_run(args, out):
    from ..frontend import selector_arity
    vm, _ = _load_vm(args.file)
    sel = _selector(vm, args.selector)
    arity = selector_arity(sel)
    if len(args.args) != arity:
        raise UserError(f"{sel} takes {arity} argument(s), got {len(args.args)}")
    oops = [tag(_parse_int(a)) for a in args.args]
    word = vm.execute(sel, vm.heap.nil, oops, backend=args.backend)
    out.write(describe_result(word, vm.method(sel).returns_oop, args.hex) + "\n")


SWAP_SOURCES = {
    "answer": "answer\n\t^ 41 + 1",
    "sibling": "sibling\n\t^ 7 * 6",
}


def swap_demo(out=None):
    """Edit one primitive of a live plugin; returns (before, after, sibling_unchanged)."""
    from ..frontend import SourceMethod
    from ..plugins import Plugin, mark_dirty, nativize_plugin
    from ..runtime.vm import VM
    vm = VM()
    plugin = Plugin("SwapDemo", {s: SourceMethod("SwapDemo", s, src) for s, src in SWAP_SOURCES.items()})
    nativize_plugin(plugin, vm)
    before = untag(plugin.call("answer"))
    plugin.call("sibling")
    sibling_code = plugin.artifact_bytes("sibling")
    plugin.edit("answer", "answer\n\t^ 41 - 1")
    mark_dirty(plugin, "answer")
    after = untag(plugin.call("answer"))
    plugin.call("sibling")
    unchanged = plugin.artifact_bytes("sibling") == sibling_code
    if out is not None:
        out.write(f"answer before edit: {before}\n")
        out.write(f"answer after edit:  {after}\n")
        out.write(f"compilations of answer: {vm.slot('answer').compile_count}\n")
        out.write(f"sibling artifact unchanged: {'yes' if unchanged else 'no'}\n")
    return before, after, unchanged


def cmd_swap_demo(args, out):
    before, after, unchanged = swap_demo(out)
    if before == after or not unchanged:
        raise CascadeError("hot swap did not take effect")


def _csv_list(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


# object creation sweeps 100..1000; the file plugin is measured at 1000 directories
DEFAULT_POINTS = {"basicnew": ",".join(str(n) for n in range(100, 1001, 100)), "fileplugin": "1000"}


def cmd_bench(args, out):
    from .harness import BenchConfig, check_ordering, rows_to_csv, rows_to_json, run_bench
    text = args.points or DEFAULT_POINTS[args.experiment]
    try:
        points = tuple(int(p) for p in _csv_list(text))
    except ValueError:
        raise UserError(f"points must be integers, got {text!r}") from None
    cfg = BenchConfig(experiment=args.experiment, points=points, runs=args.runs, n=args.n,
                      configs=_csv_list(args.configs) if args.configs else (),
                      filesystem=args.fs, root=args.root)
    rows = run_bench(cfg)
    text = rows_to_json(rows) + "\n" if args.json else rows_to_csv(rows)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    if args.check and cfg.experiment == "basicnew":
        problems = check_ordering(rows, point=max(cfg.points))
        for p in problems:
            sys.stderr.write(f"ordering: {p}\n")
        if problems:
            raise CascadeError("ordering check failed")


def build_parser():
    p = _Parser(prog="cascade", description="Compile Slang-subset methods to native code and run them.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    s = sub.add_parser("parse", help="parse a .slang file and print its methods")
    s.add_argument("file")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("dump-reachable", help="methods, templates and VM functions a selector reaches")
    s.add_argument("file")
    s.add_argument("selector")
    s.set_defaults(func=cmd_dump_reachable)

    s = sub.add_parser("dump-ir", help="three-address code for a selector and its callees")
    s.add_argument("file")
    s.add_argument("selector")
    s.add_argument("--ssa", action="store_true", help="print the SSA form")
    s.set_defaults(func=cmd_dump_ir)

    s = sub.add_parser("dump-asm", help="x86-64 listing of the compiled primitive")
    s.add_argument("file")
    s.add_argument("selector")
    s.set_defaults(func=cmd_dump_asm)

    s = sub.add_parser("run", help="execute a selector with integer arguments")
    s.add_argument("file")
    s.add_argument("selector")
    s.add_argument("args", nargs="*", metavar="ARG")
    s.add_argument("--backend", choices=("native", "ir", "ir-tac", "ast"), default="native")
    s.add_argument("--hex", action="store_true", help="print non-object results in hex")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("swap-demo", help="edit a live plugin primitive and recompile it")
    s.set_defaults(func=cmd_swap_demo)

    s = sub.add_parser("bench", help="object-creation or file-plugin benchmark as CSV")
    s.add_argument("experiment", choices=("basicnew", "fileplugin"))
    s.add_argument("--points", default=None,
                   help="comma-separated counts (basicnew: 100..1000 by 100, fileplugin: 1000)")
    s.add_argument("--runs", type=int, default=50)
    s.add_argument("--n", type=int, default=1, help="interleaved repetitions per run")
    s.add_argument("--configs", default="", help="comma-separated subset of configurations")
    s.add_argument("--fs", choices=("host", "memory"), default="host")
    s.add_argument("--root", default=None, help="directory for fileplugin host runs")
    s.add_argument("--json", action="store_true", help="emit JSON records instead of CSV")
    s.add_argument("--output", "-o", default=None)
    s.add_argument("--check", action="store_true", help="exit 2 if the basicnew ordering fails")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise _UsageError("cascade: a command is required")
    except _UsageError as exc:
        err.write(parser.format_usage())
        err.write(f"{exc}\n")
        return EXIT_USER
    except SystemExit as exc:          # --help
        return EXIT_OK if not exc.code else EXIT_USER
    try:
        args.func(args, out)
    except UserError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USER
    except Exception as exc:  # noqa: BLE001 - anything else is a toolchain defect
        err.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
