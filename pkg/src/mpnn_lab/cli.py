"""Command-line entry point ``mpnn-lab``.

Every subcommand writes CSV (header row first) or JSON to standard output or
``--out``.  Any flag can also come from a ``--config`` file of ``key = value``
lines; flags given on the command line win.  ``MPNN_LAB_THREADS`` caps the
number of worker processes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import bounds as bnd
from .capacity import DEFAULT_DIRECTION, DIRECTIONS, MpnnSchedule, capacity_report, capacity_upper_bound, gin_capacity
from .enumeration import FAMILIES, census
from .graph import read_graphs, write_graphs
from .protocol import FunctionTable, analyze_table
from .simulator import READOUT_MODES, collision_rate
from .universe import (
    DEFAULT_FRACTIONS,
    REFERENCE_AVG_DEGREES,
    REFERENCE_AVG_DIAMETERS,
    REFERENCE_CLASS_COUNTS,
    DatasetSpec,
    class_count,
    dataset_stats,
    generate_instances,
    load_dataset,
    write_dataset,
)

THREADS_ENV = "MPNN_LAB_THREADS"
TABLE_TASKS = tuple(sorted(REFERENCE_CLASS_COUNTS, key=lambda t: (t[0] != "graphs", t[1])))
DEFAULT_TABLE_SAMPLES = 2000
DEFAULT_DEPTHS = (2, 3, 4, 5, 6, 7, 8)
DEFAULT_WIDTHS = (1, 2, 4, 8, 16)

# boolean flags that a config file may switch on with true/false
_BOOL_FLAGS = {"anonymous", "simulate"}


class CliError(Exception):
    pass


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    cpus = os.cpu_count() or 1
    if raw is None:
        return cpus
    try:
        k = int(raw)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return min(k, cpus)


def _ordered_map(fn: Callable, items: Sequence) -> list:
    """``map`` over worker processes when allowed; results keep input order."""
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace("/", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _schedule(text: str) -> MpnnSchedule:
    try:
        return MpnnSchedule.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fmt(x: float) -> str:
    return f"{x:.6f}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_enumerate(args) -> None:
    c = census(args.family, args.v)
    if args.out:
        write_graphs(args.out, c.representatives)
    print("family,v,count")
    print(f"{args.family},{args.v},{len(c)}")


def cmd_universe_build(args) -> None:
    spec = DatasetSpec(args.family, args.n, args.size, args.seed, tuple(args.fractions), args.p)
    instances = generate_instances(spec)
    write_dataset(args.out, instances)


def cmd_universe_stats(args) -> None:
    stats = dataset_stats(load_dataset(args.input), args.family)
    with _output(args.out) as fh:
        fh.write("family,n,classes,avg_degree,avg_diameter\n")
        fh.write(stats.csv_row() + "\n")


def cmd_capacity(args) -> None:
    graphs = read_graphs(args.graph)
    if not graphs:
        raise CliError(f"no graphs in {args.graph}")
    with _output(args.out) as fh:
        fh.write("exact,upper_bound,cut\n")
        for g in graphs:
            rep = capacity_report(g, args.part_a, args.part_b, args.schedule, args.direction)
            fh.write(rep.csv_row() + "\n")


_BOUNDS_HEADER = "family,n,s,readout,beta_both,bound_one,upper,vacuous"


def cmd_bounds(args) -> None:
    rep = bnd.main_bounds(args.n, args.family, args.readout, args.s, args.p)
    with _output(args.out) as fh:
        fh.write(_BOUNDS_HEADER + "\n")
        fh.write(rep.csv_row() + "\n")


def cmd_bound_sweep(args) -> None:
    if args.n_min > args.n_max:
        raise CliError("--n-min exceeds --n-max")
    for n in (args.n_min, args.n_max):
        if n % 2:
            raise CliError(f"n must be even, got {n}")
    with _output(args.out) as fh:
        fh.write(_BOUNDS_HEADER + "\n")
        for n in range(args.n_min, args.n_max + 1, args.n_step):
            for readout in args.readouts:
                fh.write(bnd.main_bounds(n, args.family, readout, args.s, args.p).csv_row() + "\n")


def read_table(path) -> FunctionTable:
    """Whitespace- or comma-separated integer matrix, one row per line; ``#`` starts a comment."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append([int(x) for x in line.replace(",", " ").split()])
    if not rows:
        raise CliError(f"empty table in {path}")
    return FunctionTable.from_matrix(rows)


def cmd_protocol_analyze(args) -> None:
    report = analyze_table(read_table(args.table), args.s)
    with _output(args.out) as fh:
        fh.write(json.dumps(report, sort_keys=True) + "\n")


def _bridge_cut(direction: str) -> int:
    return 2 if direction == "bidirectional" else 1


def cmd_simulate(args) -> None:
    instances = load_dataset(args.dataset)
    if args.limit is not None:
        instances = instances[: args.limit]
    res = collision_rate(instances, args.schedule, args.mode, args.seed, args.anonymous)
    cap = capacity_upper_bound(args.schedule, _bridge_cut(args.direction))
    with _output(args.out) as fh:
        fh.write("capacity,collision_rate,pairs_checked\n")
        fh.write(f"{cap},{_fmt(res.rate)},{res.pairs_checked}\n")


def _table_row(task: tuple[str, int, int, int]) -> str:
    family, n, samples, seed = task
    classes = class_count(family, n)
    reference = REFERENCE_CLASS_COUNTS[(family, n)]
    stats = dataset_stats(generate_instances(DatasetSpec(family, n, samples, seed)), family)
    note = "" if classes == reference else f"computed {classes} differs from printed {reference}"
    return (f"{family},{n},{classes},{reference},{stats.avg_degree:.4f},{REFERENCE_AVG_DEGREES[(family, n)]},"
            f"{stats.avg_diameter:.4f},{REFERENCE_AVG_DIAMETERS[(family, n)]},{note}")


def cmd_reproduce_table(args) -> None:
    tasks = [(f, n, args.samples, args.seed) for f, n in TABLE_TASKS]
    rows = _ordered_map(_table_row, tasks)
    with _output(args.out) as fh:
        fh.write("family,n,classes,reference_classes,avg_degree,reference_avg_degree,"
                 "avg_diameter,reference_avg_diameter,note\n")
        for row in rows:
            fh.write(row + "\n")


def _grid_cell(task) -> str:
    d, w, cut, simulate, instances, mode, seed, anonymous = task
    cap = gin_capacity(d, w, cut)
    if not simulate:
        return f"{d},{w},{cap}"
    res = collision_rate(instances, MpnnSchedule.uniform(d, w), mode, seed, anonymous)
    return f"{d},{w},{cap},{_fmt(res.rate)},{res.pairs_checked}"


def cmd_capacity_grid(args) -> None:
    instances = load_dataset(args.dataset)
    if args.limit is not None:
        instances = instances[: args.limit]
    cut = _bridge_cut(args.direction)
    tasks = [(d, w, cut, args.simulate, instances, args.mode, args.seed, args.anonymous)
             for d in args.depths for w in args.widths]
    rows = _ordered_map(_grid_cell, tasks)
    with _output(args.out) as fh:
        fh.write("d,w,capacity" + (",collision_rate,pairs_checked" if args.simulate else "") + "\n")
        for row in rows:
            fh.write(row + "\n")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpnn-lab", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="file of key = value lines supplying default flag values")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    q = sub.add_parser("enumerate", help="census of connected graphs or trees on v nodes")
    q.add_argument("--family", choices=FAMILIES, required=True)
    q.add_argument("--v", type=int, required=True, help="nodes per graph")
    q.add_argument("--out", help="write representatives in graph text format")
    q.set_defaults(func=cmd_enumerate)

    uni = sub.add_parser("universe", help="build or summarise two-part universe datasets")
    usub = uni.add_subparsers(dest="action", required=True, metavar="ACTION")
    q = usub.add_parser("build", help="sample a JSONL dataset")
    q.add_argument("--family", choices=FAMILIES, required=True)
    q.add_argument("--n", type=int, required=True, help="total nodes (even)")
    q.add_argument("--size", type=int, required=True, help="number of instances")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--p", type=float, help="graphs only: draw halves from G(n/2, p) instead of uniform class pairs")
    q.add_argument("--fractions", type=_float_list, default=list(DEFAULT_FRACTIONS),
                   help="train,valid,test fractions (default 0.9,0.05,0.05)")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_universe_build)
    q = usub.add_parser("stats", help="class count, average degree (4|E|/n) and diameter of a dataset")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--family", choices=FAMILIES, help="default: inferred from edge counts")
    q.add_argument("--out")
    q.set_defaults(func=cmd_universe_stats)

    q = sub.add_parser("capacity", help="exact and closed-form capacity of a schedule across a partition")
    q.add_argument("--graph", required=True, help="graph text file; one CSV row per graph")
    q.add_argument("--part-a", type=_int_list, required=True)
    q.add_argument("--part-b", type=_int_list, help="default: complement of --part-a")
    q.add_argument("--schedule", type=_schedule, required=True, help="e.g. d=2,w=4,m=2,gamma=0,s=2")
    q.add_argument("--direction", choices=DIRECTIONS, default=DEFAULT_DIRECTION,
                   help="count cut edges once per direction (bidirectional) or once")
    q.add_argument("--out")
    q.set_defaults(func=cmd_capacity)

    q = sub.add_parser("bounds", help="lower and trivial upper bounds for one task")
    _bound_flags(q)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--readout", choices=bnd.READOUTS, required=True)
    q.set_defaults(func=cmd_bounds)

    q = sub.add_parser("bound-sweep", help="bounds over a range of n for each readout")
    _bound_flags(q)
    q.add_argument("--n-min", type=int, required=True)
    q.add_argument("--n-max", type=int, required=True)
    q.add_argument("--n-step", type=int, default=2)
    q.add_argument("--readouts", type=lambda t: t.split(","), default=list(bnd.READOUTS),
                   help="comma-separated subset of majority,consensus")
    q.set_defaults(func=cmd_bound_sweep)

    proto = sub.add_parser("protocol", help="two-party protocol tools")
    psub = proto.add_subparsers(dest="action", required=True, metavar="ACTION")
    q = psub.add_parser("analyze", help="rectangle and class-count bounds for a function table")
    q.add_argument("--table", required=True, help="integer matrix, one row per line")
    q.add_argument("--s", type=int, default=2)
    q.add_argument("--out")
    q.set_defaults(func=cmd_protocol_analyze)

    q = sub.add_parser("simulate", help="collision rate of the quantized simulator on a dataset")
    _sim_flags(q)
    q.add_argument("--schedule", type=_schedule, required=True)
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("reproduce-table", help="class/degree/diameter table for the 12 tasks")
    q.add_argument("--samples", type=int, default=DEFAULT_TABLE_SAMPLES,
                   help="instances sampled per task for degree and diameter")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_reproduce_table)

    q = sub.add_parser("capacity-grid", help="capacity (and optional collision rate) over a depth x width grid")
    _sim_flags(q)
    q.add_argument("--depths", type=_int_list, default=list(DEFAULT_DEPTHS))
    q.add_argument("--widths", type=_int_list, default=list(DEFAULT_WIDTHS))
    q.add_argument("--simulate", action="store_true", help="add simulator collision rates")
    q.set_defaults(func=cmd_capacity_grid)
    return p


def _bound_flags(q) -> None:
    q.add_argument("--family", choices=FAMILIES, required=True)
    q.add_argument("--s", type=int, default=2, help="alphabet size")
    q.add_argument("--p", type=float, help="graphs only: edge probability for the expected-case bound")
    q.add_argument("--out")


def _sim_flags(q) -> None:
    q.add_argument("--dataset", required=True, help="JSONL dataset from 'universe build'")
    q.add_argument("--mode", choices=READOUT_MODES, default="consensus")
    q.add_argument("--seed", type=int, default=0, help="hash seed of the simulator")
    q.add_argument("--anonymous", action="store_true", help="ignore node features")
    q.add_argument("--direction", choices=DIRECTIONS, default=DEFAULT_DIRECTION)
    q.add_argument("--limit", type=int, help="use only the first LIMIT instances")
    q.add_argument("--out")


# ---------------------------------------------------------------------------
# config files


def read_config(path) -> list[tuple[str, str]]:
    items = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CliError(f"{path}:{lineno}: expected key = value")
            items.append((key.strip().replace("_", "-"), value.strip()))
    return items


def _config_tokens(items: Iterable[tuple[str, str]]) -> list[str]:
    out = []
    for key, value in items:
        if key in _BOOL_FLAGS:
            if value.lower() in ("1", "true", "yes", "on"):
                out.append(f"--{key}")
            elif value.lower() not in ("0", "false", "no", "off"):
                raise CliError(f"config key {key} expects true/false, got {value!r}")
        else:
            out.append(f"--{key}={value}")
    return out


def _expand_config(argv: list[str]) -> list[str]:
    """Splice config-file flags in right after the command words, so later CLI flags override them."""
    argv = list(argv)
    path = None
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            path = argv[k + 1]
            del argv[k:k + 2]
            break
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            del argv[k]
            break
    if path is None:
        return argv
    tokens = _config_tokens(read_config(path))
    words = 0
    for tok in argv:
        if tok.startswith("-"):
            break
        words += 1
        if tok not in ("universe", "protocol"):
            break
    return argv[:words] + tokens + argv[words:]


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv)
    except (CliError, OSError) as exc:
        print(f"mpnn-lab: error: {exc}", file=sys.stderr)
        return 1
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CliError, ValueError, OSError, RuntimeError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"mpnn-lab: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
