"""Command-line front end.

Reports are tab-separated ``key<TAB>value`` lines on stdout, or one JSON
object with ``--json``.  ``--figures DIR`` also renders PNG figures.

Exit codes: 0 success, 2 validation failure, 3 missing resource,
4 semantic or equivalence failure, 5 runtime deadlock.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import errors as E
from .conventions import diff_conventions
from .frontend import (
    ItemProgram,
    NnefProgram,
    load_weights,
    parse,
    read_tensor,
    validate_item_set,
    validate_ssa,
    write_tensor,
)
from .petri import (
    check_equivalence,
    enumerate_paths,
    export_dot,
    marking_graph,
    translate,
    translate_multi,
    validate_trace,
)
from .runtime import load_noise, read_trace, run_barrier_schedule, run_items, write_trace
from .splitter import load_assignment, merge, split, write_items
from .tensor import evaluate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_MISSING = 3
EXIT_SEMANTIC = 4
EXIT_DEADLOCK = 5


class Failure(Exception):
    def __init__(self, code: int, message: str, details: Sequence[str] = ()) -> None:
        super().__init__(message)
        self.code = code
        self.details = list(details)


class Report:
    def __init__(self, as_json: bool) -> None:
        self.as_json = as_json
        self.silent = False
        self.fields: dict = {}

    def add(self, key: str, value) -> None:
        self.fields[key] = value

    def emit(self, out=None) -> None:
        out = out or sys.stdout
        if self.as_json:
            out.write(json.dumps(self.fields, indent=2, default=str) + "\n")
            return
        for key, value in self.fields.items():
            if isinstance(value, (list, tuple)):
                value = " ".join(str(v) for v in value)
            elif isinstance(value, bool):
                value = "yes" if value else "no"
            out.write(f"{key}\t{value}\n")


# --- loading ------------------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise Failure(EXIT_MISSING, f"no such file: {path}") from None


def load_program(path: str) -> NnefProgram:
    return parse(_read_text(path))


def load_items(paths: Sequence[str]) -> list[ItemProgram]:
    items = []
    for path in paths:
        program = load_program(path)
        if not isinstance(program, ItemProgram):
            raise Failure(EXIT_INVALID, f"{path} has no graphitem header")
        items.append(program)
    return items


def _require_ssa(program: NnefProgram, origin: str) -> None:
    violations = validate_ssa(program)
    if violations:
        raise Failure(EXIT_INVALID, f"{origin}: {len(violations)} SSA violation(s)", [str(v) for v in violations])


def _require_items(items: Sequence[ItemProgram]) -> None:
    problems = []
    for item in items:
        problems += [f"{item.item_id}: {v}" for v in validate_ssa(item)]
    problems += [str(v) for v in validate_item_set(items)]
    if problems:
        raise Failure(EXIT_INVALID, f"item set has {len(problems)} problem(s)", problems)


def load_net(paths: Sequence[str]):
    """A plain net for one model file, a coloured net for item files."""
    programs = [load_program(p) for p in paths]
    if len(programs) == 1 and not isinstance(programs[0], ItemProgram):
        return programs, translate(programs[0])
    if not all(isinstance(p, ItemProgram) for p in programs):
        raise Failure(EXIT_INVALID, "give either one model file or only item files")
    return programs, translate_multi(programs)


def load_inputs(path: str | None, programs: Sequence[NnefProgram]) -> dict[str, np.ndarray]:
    externals = []
    for program in programs:
        for inst in program.declarations():
            if inst.op == "external" and inst.result not in externals:
                externals.append(inst.result)
    if path is None:
        raise Failure(EXIT_MISSING, "--input is required")
    src = Path(path)
    if src.is_dir():
        out = {}
        for name in externals:
            file = src / f"{name}.dat"
            if not file.exists():
                raise Failure(EXIT_MISSING, f"missing input tensor {file}")
            out[name] = read_tensor(file)
        return out
    if not src.exists():
        raise Failure(EXIT_MISSING, f"no such file: {path}")
    if len(externals) != 1:
        raise Failure(EXIT_INVALID, f"model has {len(externals)} inputs; pass a directory of <name>.dat files")
    return {externals[0]: read_tensor(src)}


def load_all_weights(path: str | None, programs: Sequence[NnefProgram]) -> dict[str, np.ndarray]:
    if path is None:
        raise Failure(EXIT_MISSING, "--weights is required")
    if not Path(path).is_dir():
        raise Failure(EXIT_MISSING, f"weights directory not found: {path}")
    store: dict[str, np.ndarray] = {}
    for program in programs:
        store.update(load_weights(path, program))
    return store


def _figures_dir(args) -> Path | None:
    if not getattr(args, "figures", None):
        return None
    path = Path(args.figures)
    path.mkdir(parents=True, exist_ok=True)
    return path


# --- subcommands --------------------------------------------------------------


def cmd_check(args, report: Report) -> int:
    programs, net = load_net(args.model)
    if isinstance(programs[0], ItemProgram):
        _require_items(programs)
    else:
        _require_ssa(programs[0], args.model[0])
    report.add("net", net.name)
    report.add("places", len(net.places))
    report.add("transitions", len(net.transitions))
    report.add("initial_tokens", net.initial.total())
    report.add("final_marking", str(net.final))
    try:
        stats = enumerate_paths(net, cap=args.cap)
        report.add("paths", stats.path_count)
        report.add("markings", stats.marking_count)
        report.add("unique_final", stats.unique_final)
        report.add("reaches_final", stats.reaches_final)
    except E.CapExceeded as exc:
        report.add("paths", f">{args.cap}")
        report.add("cap_exceeded", str(exc))
    if args.graph_json or _figures_dir(args):
        graph = marking_graph(net)
        if args.graph_json:
            Path(args.graph_json).write_text(json.dumps(graph.to_json(), indent=1) + "\n", encoding="utf-8")
            report.add("marking_graph", args.graph_json)
        figures = _figures_dir(args)
        if figures:
            from .plotting import plot_marking_profile

            report.add("figure", str(plot_marking_profile(graph, figures / f"{net.name}.markings.png")))
    return EXIT_OK


def cmd_eval(args, report: Report) -> int:
    program = load_program(args.model)
    if isinstance(program, ItemProgram):
        raise Failure(EXIT_INVALID, "eval expects a whole-model file; use 'run' for items")
    _require_ssa(program, args.model)
    weights = load_all_weights(args.weights, [program])
    inputs = load_inputs(args.input, [program])
    outputs = evaluate(program, inputs, weights)
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for name, tensor in outputs.items():
        report.add(f"output.{name}.shape", list(tensor.shape))
        report.add(f"output.{name}.argmax", int(np.argmax(tensor)))
        if out_dir:
            write_tensor(out_dir / f"{name}.dat", tensor)
            report.add(f"output.{name}.file", str(out_dir / f"{name}.dat"))
    return EXIT_OK


def cmd_split(args, report: Report) -> int:
    program = load_program(args.model)
    _require_ssa(program, args.model)
    if not args.assignment:
        raise Failure(EXIT_MISSING, "--assignment is required")
    if not Path(args.assignment).exists():
        raise Failure(EXIT_MISSING, f"no such file: {args.assignment}")
    items = split(program, load_assignment(args.assignment))
    paths = write_items(items, args.out or ".")
    for item, path in zip(items, paths):
        report.add(f"item.{item.item_id}", str(path))
    merged = merge(items)
    same = sorted(i.result for i in merged.computations()) == sorted(i.result for i in program.computations())
    report.add("union", "ok" if same else "MISMATCH")
    verdict = check_equivalence(translate_multi(items), translate(program), cap=args.cap)
    report.add("equivalence", verdict.verdict)
    return EXIT_OK if same and verdict.equivalent else EXIT_SEMANTIC


def cmd_verify(args, report: Report) -> int:
    items = load_items(args.items)
    original = load_program(args.original)
    _require_ssa(original, args.original)
    result = check_equivalence(translate_multi(items), translate(original), cap=args.cap)
    report.add("verdict", result.verdict)
    report.add("product_states", result.product_states)
    if not result.equivalent:
        report.add("accepted_only_by", result.accepted_by)
        report.add("counterexample", list(result.counterexample or ()))
        return EXIT_SEMANTIC
    return EXIT_OK


def cmd_run(args, report: Report) -> int:
    items = load_items(args.items)
    weights = load_all_weights(args.weights, items)
    inputs = load_inputs(args.input, items)
    noise = load_noise(args.noise) if args.noise else None
    runner = run_barrier_schedule if args.barrier else run_items
    result = runner(items, inputs, weights, noise)
    report.add("mode", "barrier" if args.barrier else "sync")
    reference = evaluate(merge(items), inputs, weights)
    same = set(reference) == set(result.outputs) and all(
        np.array_equal(reference[k], result.outputs[k]) for k in reference
    )
    report.add("outputs_match_sequential", same)
    verdict = validate_trace(translate_multi(items), result.trace)
    report.add("trace", verdict.verdict)
    if verdict.message:
        report.add("trace_message", verdict.message)
    report.add("schedule", list(result.trace.schedule()))
    if result.trace.rendezvous:
        report.add("rendezvous", [name for name, _ in result.trace.rendezvous])
    if args.trace:
        write_trace(result.trace, args.trace)
        report.add("trace_file", args.trace)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, tensor in result.outputs.items():
            write_tensor(out_dir / f"{name}.dat", tensor)
    figures = _figures_dir(args)
    if figures:
        from .plotting import plot_trace

        name = items[0].node_name if items else "run"
        report.add("figure", str(plot_trace(result.trace, figures / f"{name}.trace.png", title=f"{name} ({report.fields['mode']})")))
    return EXIT_OK if same and verdict.accepted and verdict.final else EXIT_SEMANTIC


def cmd_trace_validate(args, report: Report) -> int:
    _, net = load_net(args.items)
    if not Path(args.trace).exists():
        raise Failure(EXIT_MISSING, f"no such file: {args.trace}")
    trace = read_trace(args.trace)
    verdict = validate_trace(net, trace)
    report.add("events", len(trace))
    report.add("verdict", verdict.verdict)
    report.add("fired", list(verdict.fired))
    if not verdict.final and verdict.accepted:
        report.add("warning", "NOT-FINAL: trace stops before the final marking")
    if verdict.violation is not None:
        v = verdict.violation
        report.add("violation", f"{v.item} {v.transition} {v.kind} t_ns={v.t_ns}")
    if verdict.issues:
        report.add("issues", list(verdict.issues))
    if verdict.message and not verdict.accepted:
        report.add("message", verdict.message)
    return EXIT_OK if verdict.accepted else EXIT_SEMANTIC


def cmd_diff(args, report: Report) -> int:
    diff = diff_conventions(args.height, args.width, args.pool, args.stride, args.keras, args.torch_padding)
    for enc, shape in zip(diff.encodings, diff.shapes):
        report.add(f"{enc.framework}.padding", enc.padding_text())
        report.add(f"{enc.framework}.border", enc.border)
        report.add(f"{enc.framework}.output", f"{shape[0]}x{shape[1]}")
        report.add(f"{enc.framework}.nnef", enc.nnef())
    report.add("divergent", diff.divergent)
    return EXIT_OK


def cmd_dot(args, report: Report) -> int:
    _, net = load_net(args.files)
    text = export_dot(net)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        report.add("dot", args.out)
        return EXIT_OK
    if report.as_json:
        report.add("dot", text)
        return EXIT_OK
    sys.stdout.write(text)
    report.silent = True
    return EXIT_OK


# --- wiring -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nnefitems", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="parse, validate, translate and count paths")
    p.add_argument("model", nargs="+", help="one model file, or the files of an item set")
    p.add_argument("--cap", type=int, default=100_000)
    p.add_argument("--graph-json", help="write the marking graph as JSON")
    p.add_argument("--figures", help="directory for PNG figures")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", parents=[common], help="sequential evaluation")
    p.add_argument("model")
    p.add_argument("--weights")
    p.add_argument("--input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("split", parents=[common], help="write one NNEF file per item")
    p.add_argument("model")
    p.add_argument("--assignment")
    p.add_argument("--out")
    p.add_argument("--cap", type=int, default=1_000_000)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("verify", parents=[common], help="equivalence of an item set with the original")
    p.add_argument("items", nargs="+")
    p.add_argument("--original", required=True)
    p.add_argument("--cap", type=int, default=1_000_000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", parents=[common], help="concurrent execution with self-checks")
    p.add_argument("items", nargs="+")
    p.add_argument("--weights")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--trace", help="write the JSON-lines trace here")
    p.add_argument("--noise")
    p.add_argument("--barrier", action="store_true")
    p.add_argument("--figures", help="directory for PNG figures")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trace-validate", parents=[common], help="check a trace against the net")
    p.add_argument("items", nargs="+", help="one model file, or the files of an item set")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_trace_validate)

    p = sub.add_parser("diff", parents=[common], help="Keras vs PyTorch max_pool encodings")
    p.add_argument("--height", type=int, default=28)
    p.add_argument("--width", type=int, default=28)
    p.add_argument("--pool", type=int, default=2)
    p.add_argument("--stride", type=int, default=2)
    p.add_argument("--keras", choices=("same", "valid"), default="same")
    p.add_argument("--torch-padding", type=int, default=1)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("dot", parents=[common], help="Graphviz export")
    p.add_argument("files", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dot)
    return parser


def _code_for(exc: Exception) -> int:
    if isinstance(exc, E.DeadlockDetected):
        return EXIT_DEADLOCK
    if isinstance(exc, (E.MissingWeight, E.MissingInput, FileNotFoundError)):
        return EXIT_MISSING
    if isinstance(exc, (E.EvaluationError, E.UnknownTransition, E.DoubleWrite, E.CapExceeded)):
        return EXIT_SEMANTIC
    return EXIT_INVALID


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report = Report(args.json)
    try:
        code = args.func(args, report)
    except Failure as exc:
        report.add("error", str(exc))
        if exc.details:
            report.add("details", exc.details)
        code = exc.code
    except (E.NnefError, ValueError, OSError) as exc:
        report.add("error", f"{type(exc).__name__}: {exc}")
        code = _code_for(exc)
    if not report.silent:
        report.emit()
    return code


if __name__ == "__main__":
    raise SystemExit(main())
