"""Command-line entry point: bench / kernel / convert subcommands.

Exit codes: 0 success, 1 runtime failure, 2 usage or parse error.
"""

import argparse
import os
import sys

from . import array, forksim
from .errors import ParseError, RosaError
from .script import ScriptCommandError, run_script
from .semiring import PRESET_NAMES, preset

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _forker_list(text):
    try:
        values = [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad forker list {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty forker list")
    return tuple(values)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rosa",
        description="Associative-array kernel tables and fork benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run the fork-throughput sweep")
    bench.add_argument("--log2-size", type=int, default=14,
                       help="array is 2^m x 2^m (default 14)")
    bench.add_argument("--nnz-per-row", type=int, default=10,
                       help="nonzeros per pid row (default 10)")
    bench.add_argument("--forkers", type=_forker_list, default=(1, 2, 4),
                       help="comma-separated sweep, e.g. 1,2,4,8")
    bench.add_argument("--steps", type=int, default=4,
                       help="timed fork steps per forker (default 4)")
    bench.add_argument("--seed", type=int, default=1)
    bench.add_argument("--out", default="results.csv",
                       help="results CSV path (default results.csv)")
    bench.add_argument("--plot", default=None, metavar="PATH",
                       help="also render a scaling figure (png/pdf/svg)")
    bench.add_argument("--threads", type=int, default=None,
                       help="cap on concurrent workers; overrides "
                            "ROSA_THREADS")
    bench.add_argument("--native-baseline", action="store_true",
                       help="also time real fork/waitpid churn")

    kernel = sub.add_parser("kernel", help="execute a kernel script")
    kernel.add_argument("script", help="script file path")

    convert = sub.add_parser("convert",
                             help="validate/inspect a TSV triple file")
    convert.add_argument("input", help="TSV triple file")
    convert.add_argument("--semiring", default="plus.times",
                         choices=PRESET_NAMES)
    convert.add_argument("--stats", action="store_true",
                         help="print per-column entry histogram")
    convert.add_argument("--out", default=None,
                         help="write the canonical round-trip here")
    return parser


def _resolve_threads(flag_value):
    if flag_value is not None:
        return flag_value
    env = os.environ.get("ROSA_THREADS")
    if env is None:
        return None
    try:
        value = int(env)
        if value < 1:
            raise ValueError
    except ValueError:
        raise RosaError(f"ROSA_THREADS must be a positive integer, "
                        f"got {env!r}") from None
    return value


def cmd_bench(ns):
    try:
        threads = _resolve_threads(ns.threads)
        cfg = forksim.BenchConfig(
            log2_n=ns.log2_size,
            nnz_per_row=ns.nnz_per_row,
            forkers=ns.forkers,
            steps=ns.steps,
            seed=ns.seed,
            max_workers=threads,
        )
    except (ValueError, RosaError) as exc:
        print(f"rosa bench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        results = forksim.run_benchmark(cfg)
    except RosaError as exc:
        print(f"rosa bench: aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    forksim.write_results_csv(results, ns.out)
    print(f"{'forkers':>8} {'managed':>12} {'forks':>12} "
          f"{'seconds':>10} {'forks/s':>12}")
    for r in results:
        print(f"{r.forkers:>8} {r.processes_managed:>12} "
              f"{r.total_forks:>12} {r.elapsed_seconds:>10.3f} "
              f"{r.fork_rate_per_second:>12.6g}")
    print(f"wrote {ns.out}")
    if ns.plot:
        from .plotting import render_scaling_figure
        render_scaling_figure(results, ns.plot)
        print(f"wrote {ns.plot}")
    if ns.native_baseline:
        base = forksim.native_fork_baseline(max(cfg.forkers))
        print(f"native baseline: {base.total_forks} forks in "
              f"{base.elapsed_seconds:.3f}s "
              f"({base.fork_rate_per_second:.6g} forks/s)")
    return EXIT_OK


def cmd_kernel(ns):
    try:
        with open(ns.script, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as exc:
        print(f"rosa kernel: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        run_script(lines, emit=print)
    except ParseError as exc:
        print(f"rosa kernel: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScriptCommandError as exc:
        print(f"rosa kernel: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_convert(ns):
    try:
        if ns.semiring == "union.intersection":
            # Universe is implicit in the file: every element seen.
            elements = set()
            with open(ns.input, "r", encoding="utf-8") as f:
                for line in f:
                    fields = line.rstrip("\n").split("\t")
                    if len(fields) == 3:
                        elements.update(fields[2].split(","))
            s = preset(ns.semiring, universe=elements)
        else:
            s = preset(ns.semiring)
        a = array.load_tsv(ns.input, s)
    except OSError as exc:
        print(f"rosa convert: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RosaError as exc:
        print(f"rosa convert: {ns.input}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"nnz: {a.nnz()}")
    print(f"rows: {len(a.row_keys())}")
    print(f"cols: {len(a.col_keys())}")
    if ns.stats:
        counts = {}
        for (_, c), _v in a.items():
            counts[c] = counts.get(c, 0) + 1
        for c in a.col_keys():
            print(f"  {c}\t{counts[c]}")
    if ns.out:
        array.save_tsv(a, ns.out)
        print(f"wrote {ns.out}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "bench":
        return cmd_bench(ns)
    if ns.command == "kernel":
        return cmd_kernel(ns)
    return cmd_convert(ns)


if __name__ == "__main__":
    sys.exit(main())
