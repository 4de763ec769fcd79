"""Command-line interface: synthesize, verify, enumerate tables and benchmark."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .box_solvers.solvers import STRATEGIES, solvers_for
from .box_solvers.tables import BudgetExceeded, LocalProblem, cache_path, get_table, save_table
from .cnot_circuit import CnotCircuit
from .gf2_core import BitMatrix, SingularMatrixError, is_invertible, random_invertible
from .block_synth import combined_bound, synthesize, synthesize_combined
from .topology import BlockLineLayout, build_layout, combined_layouts, local_graph_for

log = logging.getLogger("gf2synth")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SINGULAR = 3
EXIT_VERIFY = 4
EXIT_BUDGET = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class Verdicts:
    functional: bool
    compliance: bool
    depth_bound: bool

    @property
    def ok(self) -> bool:
        return self.functional and self.compliance and self.depth_bound


@dataclass
class RunReport:
    """Machine-readable summary of one synthesis or verification run."""

    input_digest: str
    architecture: str
    n: int
    p: int
    m: int
    depth: int
    gates: int
    bound: int
    elapsed_s: float
    verdicts: Verdicts
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        out = asdict(self)
        out["verdicts"]["ok"] = self.verdicts.ok
        return json.dumps(out, indent=2, sort_keys=True)


# -- independent checks -----------------------------------------------------
# These use numpy arrays and their own scheduling so that verdicts do not
# share code with the synthesizer.


def _to_array(m: BitMatrix) -> np.ndarray:
    return np.array(m.to_lists(), dtype=bool)


def replay(c: CnotCircuit) -> np.ndarray:
    """Operator of ``c`` as a boolean array."""
    out = np.eye(c.n_qubits, dtype=bool)
    for g in c.gates:
        out[g.target] ^= out[g.control]
    return out


def asap_depth(c: CnotCircuit) -> int:
    busy = np.zeros(c.n_qubits, dtype=np.int64)
    for g in c.gates:
        t = max(busy[g.control], busy[g.target]) + 1
        busy[g.control] = busy[g.target] = t
    return int(busy.max(initial=0))


def off_graph_gates(c: CnotCircuit, edges) -> int:
    allowed = {frozenset(e) for e in edges}
    return sum(frozenset((g.control, g.target)) not in allowed for g in c.gates)


def verify_circuit(a: BitMatrix, c: CnotCircuit, edges, bound: int | None) -> tuple[Verdicts, int]:
    if c.n_qubits != a.n_rows:
        raise CliError(f"circuit has {c.n_qubits} qubits, matrix has {a.n_rows}", EXIT_INPUT)
    d = asap_depth(c)
    verdicts = Verdicts(
        functional=bool(np.array_equal(replay(c), _to_array(a))),
        compliance=off_graph_gates(c, edges) == 0,
        depth_bound=bound is None or d <= bound,
    )
    return verdicts, d


# -- helpers ----------------------------------------------------------------


def digest(a: BitMatrix) -> str:
    return hashlib.sha256(a.to_text().encode()).hexdigest()[:16]


def read_matrix(path: str) -> BitMatrix:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        a = BitMatrix.from_text(text)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read matrix {path}: {exc}", EXIT_INPUT) from exc
    if not a.is_square():
        raise CliError(f"matrix {path} is not square: {a.shape}", EXIT_INPUT)
    return a


def read_circuit(path: str) -> CnotCircuit:
    try:
        return CnotCircuit.from_text(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read circuit {path}: {exc}", EXIT_INPUT) from exc


@dataclass
class Architecture:
    """Resolved architecture: one layout, or a coarse/fine pair for combined synthesis."""

    descriptor: str
    layout: BlockLineLayout
    coarse: BlockLineLayout | None = None

    @property
    def edges(self):
        edges = set(self.layout.graph.edges)
        if self.coarse is not None:
            edges |= self.coarse.graph.edges
        return edges


def resolve_architecture(descriptor: str, combined: bool = False) -> Architecture:
    try:
        if combined:
            coarse, fine = combined_layouts(descriptor)
            return Architecture(descriptor, fine, coarse)
        return Architecture(descriptor, build_layout(descriptor))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc


def _solvers(args, layout: BlockLineLayout):
    try:
        return solvers_for(layout, args.strategy, args.mode, cache_dir=args.cache_dir)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc


def arch_bound(arch: Architecture, args) -> int:
    fine = _solvers(args, arch.layout)
    if arch.coarse is None:
        return fine.bound(arch.layout.m)
    return combined_bound(arch.coarse, _solvers(args, arch.coarse), arch.layout, fine)


def run_synthesis(a: BitMatrix, arch: Architecture, args, debug: bool = False):
    if a.n_rows != arch.layout.n:
        raise CliError(f"matrix has {a.n_rows} rows, {arch.descriptor} has {arch.layout.n} qubits", EXIT_INPUT)
    if not is_invertible(a):
        raise CliError("matrix is singular", EXIT_SINGULAR)
    fine = _solvers(args, arch.layout)
    if arch.coarse is None:
        return synthesize(a, arch.layout, fine, debug=debug), fine.describe()
    coarse = _solvers(args, arch.coarse)
    result = synthesize_combined(a, arch.coarse, arch.layout, coarse, fine, debug=debug)
    # the coarse layout only runs step 1, so its Problem-2 table is never needed
    coarse_info = {"strategy": coarse.name, "p": coarse.p, "d1": coarse.d1, "dstar": coarse.dstar}
    fine_info = {"strategy": fine.name, "p": fine.p, "d2": fine.d2, "dstar": fine.dstar}
    return result, {"coarse": coarse_info, "fine": fine_info}


# -- commands ---------------------------------------------------------------


def cmd_synth(args) -> int:
    a = read_matrix(args.input)
    arch = resolve_architecture(args.arch, args.combined)
    start = time.perf_counter()
    result, solver_info = run_synthesis(a, arch, args, debug=args.debug)
    elapsed = time.perf_counter() - start
    verdicts, d = verify_circuit(a, result.circuit, arch.edges, result.bound)
    if args.output:
        Path(args.output).write_text(result.circuit.to_text())
    report = RunReport(
        input_digest=digest(a),
        architecture=arch.descriptor,
        n=arch.layout.n,
        p=arch.layout.p,
        m=arch.layout.m,
        depth=d,
        gates=len(result.circuit),
        bound=result.bound,
        elapsed_s=round(elapsed, 4),
        verdicts=verdicts,
        details={"solvers": solver_info, "step_depths": result.step_depths},
    )
    print(report.to_json())
    return EXIT_OK if verdicts.ok else EXIT_VERIFY


def cmd_verify(args) -> int:
    a = read_matrix(args.input)
    c = read_circuit(args.circuit)
    arch = resolve_architecture(args.arch, args.combined)
    if a.n_rows != arch.layout.n:
        raise CliError(f"matrix has {a.n_rows} rows, {arch.descriptor} has {arch.layout.n} qubits", EXIT_INPUT)
    start = time.perf_counter()
    bound = args.bound if args.bound is not None else arch_bound(arch, args)
    verdicts, d = verify_circuit(a, c, arch.edges, bound)
    report = RunReport(
        input_digest=digest(a),
        architecture=arch.descriptor,
        n=arch.layout.n,
        p=arch.layout.p,
        m=arch.layout.m,
        depth=d,
        gates=len(c),
        bound=bound,
        elapsed_s=round(time.perf_counter() - start, 4),
        verdicts=verdicts,
    )
    print(report.to_json())
    return EXIT_OK if verdicts.ok else EXIT_VERIFY


def _local_problem(args) -> LocalProblem:
    problem = f"P{args.problem}"
    try:
        p, pair_graph, intra_graph = local_graph_for(args.arch)
    except ValueError:
        try:
            layout = build_layout(args.arch)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_INPUT) from exc
        if layout.m < 2 and problem != "P3":
            raise CliError(f"{args.arch} has a single block; no pair problem", EXIT_INPUT)
        p, pair_graph, intra_graph = layout.p, layout.local_graph, layout.intra_graph
    return LocalProblem(problem, p, intra_graph if problem == "P3" else pair_graph)


def cmd_enumerate(args) -> int:
    local = _local_problem(args)
    start = time.perf_counter()

    def progress(depth, layer, visited):
        log.info("depth %d: %d new states, %d visited", depth, layer, visited)

    try:
        table = get_table(
            local.problem, local.p, local.graph, cache_dir=args.cache_dir, budget=args.budget, progress=progress
        )
    except BudgetExceeded as exc:
        print(json.dumps({"status": "budget exceeded", "budget": args.budget, "visited": exc.visited,
                          "counts_by_depth": exc.counts}, indent=2))
        return EXIT_BUDGET
    if args.output:
        save_table(table, Path(args.output))
    out = {
        "problem": local.problem,
        "p": local.p,
        "graph_edges": [f"{a}-{b}" for a, b in local.graph.sorted_edges()],
        "kind": table.kind,
        "counts_by_depth": table.counts_by_depth,
        "total": int(sum(table.counts_by_depth)),
        "max_depth": table.max_depth,
        "states": table.total,
        "cache": str(args.output or cache_path(local, args.cache_dir)),
        "elapsed_s": round(time.perf_counter() - start, 3),
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


_FAMILY = re.compile(r"^(line|ladder|ladder-diag|grid|grid-diag|altered-grid|blocks-full)(?::(.*))?$")


def sized_descriptor(family: str, n: int) -> str:
    """Concrete descriptor with ``n`` qubits for a family such as ``ladder:2`` or ``blocks-full:p=4``.

    Fully specified descriptors are returned unchanged.
    """
    mt = _FAMILY.match(family.strip())
    if not mt:
        raise CliError(f"unknown architecture family {family!r}", EXIT_INPUT)
    kind, arg = mt.group(1), mt.group(2)
    if kind == "line":
        return f"line:{n}"
    if kind == "blocks-full":
        pm = re.fullmatch(r"p=(\d+)(?:,m=\d+)?", arg or "")
        if not pm:
            raise CliError("blocks-full family needs p=<p>", EXIT_INPUT)
        p = int(pm.group(1))
        if n % p:
            raise CliError(f"n={n} is not a multiple of p={p}", EXIT_INPUT)
        return f"blocks-full:p={p},m={n // p}"
    if not arg or not arg.split("x")[0].isdigit():
        raise CliError(f"{kind} family needs the width, e.g. {kind}:2", EXIT_INPUT)
    w = int(arg.split("x")[0])
    if n % w:
        raise CliError(f"n={n} is not a multiple of {w}", EXIT_INPUT)
    return f"{kind}:{w}x{n // w}"


def cmd_bench(args) -> int:
    rows = []
    for n in args.n:
        descriptor = sized_descriptor(args.arch, n)
        arch = resolve_architecture(descriptor, args.combined or descriptor.startswith("altered-grid"))
        depths = []
        bound = None
        start = time.perf_counter()
        for t in range(args.trials):
            a = random_invertible(n, args.seed * 1_000_003 + n * 1009 + t)
            result, _ = run_synthesis(a, arch, args)
            verdicts, d = verify_circuit(a, result.circuit, arch.edges, result.bound)
            if not verdicts.ok:
                log.error("verification failed on %s trial %d: %s", descriptor, t, verdicts)
                return EXIT_VERIFY
            depths.append(d)
            bound = result.bound
        rows.append({
            "architecture": descriptor,
            "n": n,
            "trials": args.trials,
            "mean_depth": round(float(np.mean(depths)), 3),
            "max_depth": int(max(depths)),
            "slope": round(max(depths) / n, 4),
            "bound": bound,
            "elapsed_s": round(time.perf_counter() - start, 3),
        })
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
        print(buf.getvalue(), end="")
    else:
        print(json.dumps(rows, indent=2))
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gf2synth", description="Depth-bounded CNOT circuit synthesis.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def cache_opt(p):
        p.add_argument("--cache-dir", type=Path, default=None, help="table cache directory (else $GF2SYNTH_CACHE)")

    def solver_opts(p):
        cache_opt(p)
        p.add_argument("--strategy", choices=STRATEGIES, default="auto")
        p.add_argument("--mode", choices=("basic", "improved"), default="basic", help="all-to-all construction")
        p.add_argument("--combined", action="store_true", help="coarse step 1 then fine steps 2-3")

    s = sub.add_parser("synth", help="synthesize a circuit for a matrix")
    s.add_argument("-a", "--arch", required=True)
    s.add_argument("-i", "--input", required=True, help="matrix file ('-' for stdin)")
    s.add_argument("-o", "--output", help="circuit output file")
    s.add_argument("--debug", action="store_true", help="check sweep invariants after every round")
    solver_opts(s)
    s.set_defaults(func=cmd_synth)

    v = sub.add_parser("verify", help="check a circuit against a matrix and an architecture")
    v.add_argument("-a", "--arch", required=True)
    v.add_argument("-i", "--input", required=True)
    v.add_argument("-c", "--circuit", required=True)
    v.add_argument("--bound", type=int, default=None, help="depth bound (default: from the solver tables)")
    solver_opts(v)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("enumerate", help="build a local depth table and print its histogram")
    e.add_argument("-P", "--problem", type=int, choices=(1, 2, 3), required=True)
    e.add_argument("-a", "--arch", required=True, help="architecture descriptor or local topology name")
    e.add_argument("-o", "--output", help="write the table here as well")
    e.add_argument("--budget", type=int, default=None, help="maximum number of states to visit")
    cache_opt(e)
    e.set_defaults(func=cmd_enumerate)

    b = sub.add_parser("bench", help="depth statistics over random operators")
    b.add_argument("-a", "--arch", required=True, help="family such as line, ladder:2, grid:4, blocks-full:p=4")
    b.add_argument("-n", type=_int_list, required=True, help="comma separated qubit counts")
    b.add_argument("-t", "--trials", type=int, default=10)
    b.add_argument("-s", "--seed", type=int, default=0)
    b.add_argument("--format", choices=("json", "csv"), default="json")
    solver_opts(b)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SingularMatrixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except BudgetExceeded as exc:
        print(json.dumps({"status": "budget exceeded", "visited": exc.visited, "counts_by_depth": exc.counts}))
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
