"""Command line driver: ``andor <command> ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage or parse error,
3 an acceptance check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections import Counter

from . import limitdist as ld
from .boolfn import BoolFn, decode
from .complexity import build_complexity_table
from .exprtree import (ParseError, height, parse, parse_shape, random_labelling, root_split,
                       saturation_level, serialize, size)
from .rng import StreamFactory, chunk_ranges, default_threads, parallel_map
from .treegen import (AlphaModel, BSTModel, LazyModel, NodeCapExceeded,
                      UnattainableSize, alpha_split_pmf, min_leaf_depth, sample_alpha)
from .trimming import report as trim_report

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("need positive integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="andor", description="Random and/or trees and the Boolean functions they compute.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed_required=True):
        sp.add_argument("--seed", type=int, required=seed_required, help="master seed")
        sp.add_argument("--threads", type=_positive, default=None,
                        help="worker processes (default: $ANDOR_THREADS or 1)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", "-o", default=None, help="output file (default: stdout)")

    def model_args(sp):
        sp.add_argument("--model", required=True, help="preset, e.g. catalan, bst, alpha:0.5, spine:catalan")
        sp.add_argument("--n", "--leaves", dest="n", type=_positive, default=None,
                        help="size (leaves, or nodes for assoc presets)")
        sp.add_argument("--height", type=int, default=None)
        sp.add_argument("--size-mode", choices=("leaves", "total_nodes"), default=None)

    s = sub.add_parser("sample", help="sample labelled trees or shape statistics")
    model_args(s)
    s.add_argument("--k", type=_positive, default=2)
    s.add_argument("--trials", type=_positive, default=1)
    s.add_argument("--stats", choices=("none", "size", "saturation", "split"), default="none")
    s.add_argument("--node-cap", type=_positive, default=10**6)
    common(s)

    t = sub.add_parser("trim", help="trim an expression and report sizes")
    t.add_argument("expr", help='expression such as "(x1&(x1|x2))"')
    t.add_argument("--k", type=_positive, default=None)
    t.add_argument("--format", choices=("json", "csv"), default="json")
    t.add_argument("--output", "-o", default=None)

    d = sub.add_parser("dist", help="distribution of the computed function")
    model_args(d)
    d.add_argument("--k", type=_positive, required=True)
    d.add_argument("--trials", type=_positive, default=10**4)
    d.add_argument("--exact", action="store_true", help="enumerate all labellings of a fixed shape")
    d.add_argument("--depth-cap", type=_positive, default=10**4)
    d.add_argument("--enum-cap", type=_positive, default=10**7)
    common(d, seed_required=False)

    c = sub.add_parser("scaling", help="log-log regression of P_k(f) on a spine")
    c.add_argument("--model", required=True)
    c.add_argument("--fn", required=True, help='function as "k:HEX", e.g. 1:2 for x1')
    c.add_argument("--ks", type=_int_list, required=True)
    c.add_argument("--trials", type=_positive, required=True)
    c.add_argument("--depth-cap", type=_positive, default=10**4)
    common(c)

    k = sub.add_parser("checks", help="run the acceptance suite")
    k.add_argument("--suite", choices=("acceptance",), default="acceptance")
    k.add_argument("--criteria", type=_int_list, default=None, help="subset, e.g. 1,5,11")
    common(k)

    x = sub.add_parser("complexity", help="table of L(f) for small k")
    x.add_argument("--k", type=_positive, required=True)
    x.add_argument("--max-size", type=_positive, default=6)
    x.add_argument("--format", choices=("json", "csv"), default="csv")
    x.add_argument("--output", "-o", default=None)
    return p


# ---------------------------------------------------------------- helpers

def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    try:
        return default_threads()
    except ValueError as e:
        raise UsageError(str(e)) from None


def _model(args):
    try:
        return ld.resolve_model(args.model, n=getattr(args, "n", None),
                                h=getattr(args, "height", None),
                                size_mode=getattr(args, "size_mode", None))
    except UnattainableSize:
        raise
    except (ValueError, OSError) as e:
        raise UsageError(f"model {args.model!r}: {e}") from None


def _shape_model(args):
    """A fixed shape for exact enumeration."""
    if args.model.startswith("shape:"):
        try:
            return parse_shape(args.model[len("shape:"):])
        except ParseError as e:
            raise UsageError(f"shape: {e}") from None
    if args.model == "balanced" and args.height is not None:
        from .treegen import balanced_binary
        return balanced_binary(args.height)
    raise UsageError("--exact needs --model shape:<text> or --model balanced --height H")


# ---------------------------------------------------------------- sample

def _sample_task(task):
    model, k, seed, lo, hi, stats, node_cap = task
    fac = StreamFactory(seed)
    out = []
    for i in range(lo, hi):
        rng = fac(i)
        if stats == "saturation":
            out.append(min_leaf_depth(model, rng))
            continue
        if stats == "split" and isinstance(model, AlphaModel):
            # grown by edge insertion, an independent route to the split law
            shape = sample_alpha(model.n, model.alpha, rng)
            out.append(size(shape[0]) if shape else 0)
            continue
        if stats == "split" and isinstance(model, BSTModel):
            kids = model.children(model.root_state(rng), rng)
            out.append(kids[0] if kids else 0)
            continue
        shape = model.sample_shape(rng, node_cap)
        if stats == "split":
            out.append(root_split(shape)[0] if shape else 0)
        elif stats == "size":
            out.append((size(shape), height(shape), saturation_level(shape)))
        else:
            out.append(serialize(random_labelling(shape, k, rng)))
    return out


def cmd_sample(args) -> int:
    model = _model(args)
    if not isinstance(model, LazyModel):
        raise UsageError("sample supports finite presets only")
    tasks = [(model, args.k, args.seed, lo, hi, args.stats, args.node_cap)
             for lo, hi in chunk_ranges(args.trials, 500)]
    vals = [v for chunk in parallel_map(_sample_task, tasks, _threads(args)) for v in chunk]
    if args.stats == "none":
        if args.format == "csv":
            _emit(args, "tree\n" + "".join(v + "\n" for v in vals))
        else:
            _emit(args, _dump({"model": model.name, "k": args.k, "seed": args.seed, "trees": vals}))
        return EXIT_OK
    if args.stats == "size":
        rows = [{"size": a, "height": b, "saturation": c} for a, b, c in vals]
        if args.format == "csv":
            _emit(args, "size,height,saturation\n" + "".join(f"{a},{b},{c}\n" for a, b, c in vals))
        else:
            _emit(args, _dump({"model": model.name, "seed": args.seed, "trees": rows}))
        return EXIT_OK
    if args.stats == "saturation":
        mean = sum(vals) / len(vals)
        n = getattr(model, "n", None)
        res = {"model": model.name, "seed": args.seed, "trials": len(vals), "mean": mean,
               "mean_over_log_n": mean / math.log(n) if n and n > 1 else None, "values": vals}
        if args.format == "csv":
            _emit(args, "saturation\n" + "".join(f"{v}\n" for v in vals))
        else:
            _emit(args, _dump(res))
        return EXIT_OK
    # split histogram, compared with the exact law for alpha trees
    hist = Counter(vals)
    n = getattr(model, "n", None)
    alpha = getattr(model, "alpha", None)
    rows = []
    tv = 0.0
    for j in range(1, (n or max(hist) + 1)):
        emp = hist.get(j, 0) / len(vals)
        row = {"left_size": j, "count": hist.get(j, 0), "empirical": emp}
        if alpha is not None and n is not None and n >= 2:
            q = alpha_split_pmf(n, alpha, j)
            row["expected"] = q
            tv += abs(emp - q) / 2
        rows.append(row)
    if args.format == "csv":
        keys = list(rows[0]) if rows else ["left_size", "count", "empirical"]
        lines = [",".join(keys)] + [",".join(repr(r[k]) for k in keys) for r in rows]
        _emit(args, "\n".join(lines) + "\n")
    else:
        res = {"model": model.name, "seed": args.seed, "trials": len(vals), "split": rows}
        if alpha is not None:
            res["total_variation"] = tv
        _emit(args, _dump(res))
    return EXIT_OK


# ---------------------------------------------------------------- other commands

def cmd_trim(args) -> int:
    try:
        tree = parse(args.expr)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    rep = trim_report(tree, args.k)
    if args.format == "csv":
        _emit(args, ",".join(rep) + "\n" + ",".join(str(v) for v in rep.values()) + "\n")
    else:
        _emit(args, _dump(rep))
    return EXIT_OK


def cmd_dist(args) -> int:
    if args.exact:
        shape = _shape_model(args)
        try:
            est = ld.exact_dist(shape, args.k, guard=args.enum_cap)
        except ld.CostGuardError as e:
            raise UsageError(str(e)) from None
    else:
        if args.seed is None:
            raise UsageError("--seed is required for Monte Carlo estimates")
        model = _model(args)
        est = ld.mc_dist(model, args.k, args.trials, args.seed, _threads(args), args.depth_cap)
    _emit(args, est.to_csv() if args.format == "csv" else _dump(est.to_json()))
    return EXIT_OK


def cmd_scaling(args) -> int:
    try:
        f = decode(args.fn)
    except ValueError as e:
        raise UsageError(f"--fn: {e}") from None
    if not args.model.startswith("spine:"):
        raise UsageError("scaling needs a spine preset")
    if min(args.ks) < f.arity:
        raise UsageError("every k must be at least the arity of --fn")
    model = _model(args)
    rep = ld.scaling_exponent(model, f, args.ks, args.trials, args.seed, _threads(args),
                              args.depth_cap)
    _emit(args, rep.to_csv() if args.format == "csv" else _dump(rep.to_json()))
    return EXIT_OK


def cmd_checks(args) -> int:
    from . import acceptance

    nums = args.criteria or sorted(acceptance.CRITERIA)
    bad = [n for n in nums if n not in acceptance.CRITERIA]
    if bad:
        raise UsageError(f"unknown criteria: {bad}")
    results = acceptance.run(nums, args.seed, _threads(args),
                             report=lambda line: print(line, file=sys.stderr))
    if args.format == "csv":
        _emit(args, "criterion,passed,title\n"
              + "".join(f"{r.number},{str(r.passed).lower()},{r.title}\n" for r in results))
    else:
        _emit(args, _dump([{"criterion": r.number, "title": r.title, "passed": r.passed,
                            "details": r.details} for r in results]))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def cmd_complexity(args) -> int:
    try:
        tab = build_complexity_table(args.k, args.max_size)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.format == "csv":
        _emit(args, tab.to_csv())
    else:
        rows = [{"fn": f.encode(), "L": tab.L(f), "witness": serialize(tab.witness(f))}
                for f in tab.functions()]
        _emit(args, _dump({"k": args.k, "max_size": args.max_size, "functions": rows}))
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "trim": cmd_trim, "dist": cmd_dist, "scaling": cmd_scaling,
            "checks": cmd_checks, "complexity": cmd_complexity}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"andor: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UnattainableSize, NodeCapExceeded) as e:
        print(f"andor: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (RuntimeError, ValueError, OSError) as e:
        print(f"andor: failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
