"""``rp``: compress, decompress and inspect archives."""
import argparse
import json
import sys
import time

from .archive import archive_stats, build_archive, decompress, rate_of
from .core import DEFAULT_EPSILON, compress
from .errors import RepairError
from .memory import MemoryAccountant
from .oracle import naive_compress

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


class _Usage(Exception):
    pass


def _epsilon(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from None
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1]")
    return v


def build_parser():
    p = _Parser(prog="rp", description="Re-Pair grammar compressor")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("c", help="compress a file")
    c.add_argument("input")
    c.add_argument("output")
    c.add_argument("--epsilon", type=_epsilon, default=DEFAULT_EPSILON)
    c.add_argument("--trace", metavar="PATH", help="write one line per rule: freq, left, right, symbol")
    c.add_argument("--oracle", action="store_true", help="use the quadratic reference compressor")
    c.add_argument("--json", action="store_true")
    d = sub.add_parser("d", help="decompress an archive")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--json", action="store_true")
    s = sub.add_parser("stats", help="print the size summary of an archive")
    s.add_argument("input")
    s.add_argument("--json", action="store_true")
    return p


def _compress(args, out):
    with open(args.input, "rb") as fh:
        data = fh.read()
    t0 = time.perf_counter()
    peak = 0
    if args.oracle:
        grammar, final = naive_compress(data)
    else:
        res = compress(data, epsilon=args.epsilon, accountant=MemoryAccountant(), engine="stream")
        grammar, final, peak = res.grammar, res.final_text, res.stats.peak_bytes
    blob, header, parts = build_archive(grammar, final, len(data))
    with open(args.output, "wb") as fh:
        fh.write(blob)
    secs = time.perf_counter() - t0
    if args.trace:
        with open(args.trace, "w") as fh:
            for line in grammar.trace_lines():
                fh.write(line + "\n")
    bits = parts.grammar_bits + parts.text_bits
    lb, rate = rate_of(bits, grammar.d, len(final), grammar.sigma)
    row = {"n": len(data), "d": grammar.d, "t": len(final), "M": grammar.distinct_freqs,
           "R": header.R, "bytes": len(blob), "encoded_bits": bits, "lower_bound_bits": lb,
           "rate": rate, "seconds": secs, "peak_bytes": peak}
    if args.json:
        print(json.dumps(row), file=out)
    else:
        print(f"n={row['n']} d={row['d']} t={row['t']} M={row['M']} bytes={row['bytes']} "
              f"rate={rate:.2f}% seconds={secs:.3f} peak_bytes={peak}", file=out)


def _decompress(args, out):
    with open(args.input, "rb") as fh:
        blob = fh.read()
    data = decompress(blob)
    with open(args.output, "wb") as fh:
        fh.write(data)
    if args.json:
        print(json.dumps({"n": len(data)}), file=out)


def _stats(args, out):
    st = archive_stats(args.input)
    if args.json:
        print(json.dumps(st.as_dict()), file=out)
    else:
        print(st.row(), file=out)


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except _Usage as e:
        print(f"rp: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return EXIT_OK if not e.code else EXIT_USAGE
    try:
        {"c": _compress, "d": _decompress, "stats": _stats}[args.command](args, out)
    except FileNotFoundError as e:
        print(f"rp: {e.filename}: no such file", file=sys.stderr)
        return EXIT_DATA
    except (RepairError, ValueError, OSError) as e:
        print(f"rp: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
