"""Command-line entry point: ``ryseri <command> ...``."""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import __version__
from .bench import LatticeSpec, generate_benchmark, run_class, validate_quartets
from .compress import MalformedChunksError, check_bits, decompress
from .flops import flops_table
from .perfmodel import emit_model_table
from .records import (
    MalformedRecordError,
    QuartetRecord,
    iter_stream,
    read_records,
    write_records,
)
from .rys import prepare_quartet_rys
from .shells import QuartetClass, QuartetInput, all_classes, canonical_classes

EXIT_USAGE, EXIT_IO, EXIT_DATA = 2, 3, 4

TABLE3_CLASSES = ("ss|ss", "pp|pp", "dd|ps", "dd|dd", "ff|fd", "ff|ff")


class CliError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


def _classes(values, default):
    """Expand ``--class`` values; ``all`` and ``canonical`` are shorthands."""
    if not values:
        return list(default)
    out = []
    for v in values:
        for tok in v.replace(";", " ").split():
            if tok == "all":
                out.extend(all_classes())
            elif tok == "canonical":
                out.extend(canonical_classes())
            else:
                try:
                    out.append(QuartetClass.parse(tok))
                except ValueError:
                    raise CliError(f"unknown quartet class {tok!r} (expected e.g. 'pp|ds' or 'pp,ds')", EXIT_USAGE)
    return out


def _one_class(values) -> QuartetClass:
    cls = _classes(values, [])
    if len(cls) != 1:
        raise CliError("this command needs exactly one --class", EXIT_USAGE)
    return cls[0]


def _bits(n: int) -> int:
    try:
        return check_bits(n)
    except ValueError as exc:
        raise CliError(f"invalid bit width: {exc}", EXIT_USAGE)


def _dims(text: str) -> tuple[int, int, int]:
    try:
        dims = tuple(int(x) for x in text.split(","))
        if len(dims) != 3 or min(dims) < 1:
            raise ValueError
    except ValueError:
        raise CliError(f"invalid lattice dims {text!r} (expected three positive integers, e.g. 4,4,2)", EXIT_USAGE)
    return dims


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO)


def _open_out(path, mode="w"):
    if path in (None, "-"):
        return sys.stdout.buffer if "b" in mode else sys.stdout
    try:
        return open(path, mode)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO)


def _emit_text(text: str, path):
    fh = _open_out(path)
    fh.write(text)
    if fh is not sys.stdout:
        fh.close()


def cmd_records(args):
    """Write a record file of random or lattice quartets."""
    qclass = _one_class(args.qclass)
    rng = np.random.default_rng(args.seed)
    if args.dims:
        bench = generate_benchmark(LatticeSpec(_dims(args.dims)), qclass)
        quartets = bench.sample(args.count, rng)
    else:
        quartets = [
            QuartetInput.from_arrays(qclass, rng.uniform(-2.0, 2.0, (4, 3)), rng.uniform(0.5, 2.5, 4))
            for _ in range(args.count)
        ]
    recs = [QuartetRecord.from_quartet(q, prepare_quartet_rys(q) if args.with_roots else None) for q in quartets]
    if args.output in (None, "-"):
        raise CliError("records needs --output FILE", EXIT_USAGE)
    try:
        write_records(args.output, recs)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc.strerror}", EXIT_IO)
    print(f"wrote {len(recs)} {qclass} records to {args.output}", file=sys.stderr)


def cmd_compute(args):
    qclass = _one_class(args.qclass)
    n = _bits(args.bits)
    _read_bytes(args.input)  # distinct error for unreadable input
    try:
        recs = read_records(args.input)
        items = []
        for r in recs:
            q = r.quartet(qclass)
            items.append((q, r.rys_nodes(q)))
    except MalformedRecordError as exc:
        raise CliError(f"malformed record file {args.input}: {exc}", EXIT_DATA)
    res = run_class(qclass, items, n, args.threads, args.precision)
    fh = _open_out(args.output, "wb")
    fh.write(res.stream)
    if fh is not sys.stdout.buffer:
        fh.close()
    print(
        f"{qclass} {res.n_quartets} quartets, {n}-bit, {len(res.stream)} bytes; "
        f"wall {res.wall_time:.3f} s, kernel {res.kernel_time:.3f} s",
        file=sys.stderr,
    )


def cmd_decompress(args):
    qclass = _one_class(args.qclass)
    n = _bits(args.bits)
    data = _read_bytes(args.input)
    try:
        values = [decompress(c) for c in iter_stream(data, qclass, n)]
    except MalformedChunksError as exc:
        raise CliError(f"malformed compressed stream {args.input}: {exc}", EXIT_DATA)
    out = np.concatenate(values) if values else np.zeros(0)
    fh = _open_out(args.output, "wb")
    fh.write(out.astype("<f4").tobytes())
    if fh is not sys.stdout.buffer:
        fh.close()
    print(f"{len(values)} quartets, {out.size} values", file=sys.stderr)


def cmd_bench(args):
    spec = LatticeSpec(_dims(args.dims), args.spacing, args.exponent)
    n = _bits(args.bits)
    classes = _classes(args.qclass, all_classes())
    lines = [f"lattice {spec.dims} spacing {spec.spacing} A exponent {spec.exponent}; "
             f"{n}-bit, {args.precision}, {args.threads} thread(s)"]
    head = ("class", "quartets", "bytes", "wall_s", "kernel_s", "MERIS_wall", "MERIS_kernel")
    rows = []
    for c in classes:
        bench = generate_benchmark(spec, c)
        quartets = []
        for i, q in enumerate(bench):
            if args.quartets is not None and i >= args.quartets:
                break
            quartets.append(q)
        res = run_class(c, quartets, n, args.threads, args.precision)
        rows.append((c.label, res.n_quartets, len(res.stream), f"{res.wall_time:.3f}",
                     f"{res.kernel_time:.3f}", f"{res.eris_per_s_wall / 1e6:.4f}",
                     f"{res.eris_per_s_kernel / 1e6:.4f}"))
    widths = [max(len(str(x)) for x in col) for col in zip(head, *rows)]
    lines += ["  ".join(str(x).rjust(w) for x, w in zip(r, widths)) for r in [head, *rows]]
    _emit_text("\n".join(lines) + "\n", args.output)


def _read_fmax(path) -> dict:
    text = _read_bytes(path).decode("utf-8", errors="replace")
    out = {}
    for row in csv.reader(text.splitlines()):
        if not row or row[0].strip().startswith("#") or row[0].strip() == "class":
            continue
        try:
            out[QuartetClass.parse(",".join(row[:-1]))] = float(row[-1])
        except (ValueError, IndexError):
            raise CliError(f"malformed f_max line {','.join(row)!r} in {path} (expected class,MHz)", EXIT_DATA)
    return out


def cmd_perf_model(args):
    n = _bits(args.bits)
    classes = _classes(args.qclass, [QuartetClass.parse(c) for c in TABLE3_CLASSES])
    f_max = _read_fmax(args.fmax) if args.fmax else None
    _emit_text(emit_model_table(classes, n, f_max, args.format), args.output)


def cmd_flops(args):
    n = _bits(args.bits)
    classes = _classes(args.qclass, canonical_classes())
    _emit_text(flops_table(classes, n), args.output)


def cmd_validate(args):
    spec = LatticeSpec(_dims(args.dims))
    widths = [_bits(int(b)) for b in args.bits.split(",")]
    classes = _classes(args.qclass, canonical_classes())
    rng = np.random.default_rng(args.seed)
    head = ["class", "samples", "b_max"]
    for n in widths:
        head += [f"maxerr_{n}", f"bound_{n}"]
    rows = []
    for c in classes:
        bench = generate_benchmark(spec, c)
        rep = validate_quartets(c, bench.sample(args.samples, rng), widths, args.precision)
        row = [c.label, args.samples, f"{rep[widths[0]].max_b_max:.4f}"]
        for n in widths:
            row += [f"{rep[n].max_abs_error:.3e}", "ok" if rep[n].bound_holds else "VIOLATED"]
        rows.append(row)
    w = [max(len(str(x)) for x in col) for col in zip(head, *rows)]
    _emit_text("\n".join("  ".join(str(x).rjust(k) for x, k in zip(r, w)) for r in [head, *rows]) + "\n", args.output)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ryseri", description="Rys quadrature ERI kernel with lossy compression.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, bits=True, cls=True, out=True):
        if cls:
            sp.add_argument("--class", dest="qclass", action="append",
                            help="quartet class such as 'pp|ds' or 'pp,ds'; repeatable; 'all' or 'canonical'")
        if bits:
            sp.add_argument("--bits", type=int, default=16, help="bits per compressed code (2-32)")
        if out:
            sp.add_argument("--output", "-o", help="output file (default stdout)")

    sp = sub.add_parser("records", help="write a file of random or lattice quartet records")
    common(sp, bits=False)
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dims", help="sample from a lattice of these dims instead of random geometry")
    sp.add_argument("--with-roots", action="store_true", help="store Rys roots and weights in word 2")
    sp.set_defaults(func=cmd_records)

    sp = sub.add_parser("compute", help="record file -> compressed stream")
    common(sp)
    sp.add_argument("input")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--precision", choices=("single", "double"), default="single")
    sp.set_defaults(func=cmd_compute)

    sp = sub.add_parser("decompress", help="compressed stream -> float32 values")
    common(sp)
    sp.add_argument("input")
    sp.set_defaults(func=cmd_decompress)

    sp = sub.add_parser("bench", help="run lattice quartets and report throughput")
    common(sp)
    sp.add_argument("--dims", default="4,4,2")
    sp.add_argument("--spacing", type=float, default=1.0, help="Angstrom")
    sp.add_argument("--exponent", type=float, default=1.5)
    sp.add_argument("--quartets", type=int, help="only the first N quartets of each class")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--precision", choices=("single", "double"), default="single")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("perf-model", help="trip-count and throughput model table")
    common(sp)
    sp.add_argument("--fmax", help="CSV file of class,MHz rows")
    sp.add_argument("--format", choices=("text", "csv"), default="text")
    sp.set_defaults(func=cmd_perf_model)

    sp = sub.add_parser("flops", help="operation counts per quartet")
    common(sp)
    sp.set_defaults(func=cmd_flops)

    sp = sub.add_parser("validate", help="max abs error of decompressed integrals vs the oracle")
    common(sp, bits=False)
    sp.add_argument("--bits", default="16,12", help="comma-separated widths")
    sp.add_argument("--dims", default="4,4,2")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--precision", choices=("single", "double"), default="single")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"ryseri {args.command}: error: {exc}", file=sys.stderr)
        return exc.status
    except ValueError as exc:
        print(f"ryseri {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
