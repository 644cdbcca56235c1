"""Command-line entry point: single solves, alpha sweeps, polytope runs, exponent tables.

Exit codes: 0 success, 1 computational failure, 2 input error (with a JSON
error body on stdout).  Outputs carry no timestamps or timings, so equal
configurations give byte-identical files.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
from fractions import Fraction
import io
import json
import math
import sys
import time

from .classical import (
    optimal_classical_3party_binary,
    optimal_classical_exhaustive,
    optimal_classical_symmetric,
)
from .codes import (
    code_min_success,
    code_strategy_value,
    hamming_7_4,
    identity_code,
    load_code,
    repetition_code,
)
from .errors import BudgetError, DomainError, GameFormatError, ShapeError
from .exponent import exponent_table_csv, finite_n_exponent_table, optimize_exponent
from .game import bsc_channel, bsc_game, load_game
from .nosignal import optimal_ns
from .npa import build_1mn, dump_sdp, solve_sdp
from .polytope import (
    deterministic_vertex_count,
    dump_vertices,
    enumerate_vertices,
    filter_vertices,
    max_gap_binary,
    ns_polytope_hrep,
)
from .rational import FLOAT, RATIONAL, format_rational, parse_rational

SWEEP_COLUMNS = ("alpha", "n", "w_classical", "w_ns", "w_npa", "strategy", "error")
CODE_COLUMNS = ("alpha", "code", "n", "value", "min_success")
INPUT_ERRORS = (GameFormatError, DomainError, ShapeError, BudgetError, FileNotFoundError, ValueError)


class InputError(ValueError):
    pass


# -- argument helpers --------------------------------------------------------------

def parse_grid(text, scalar=RATIONAL):
    """``a:b:k`` -> ``k`` evenly spaced points from ``a`` to ``b`` inside ``[0, 1/2]``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"alpha grid {text!r} is not of the form a:b:k")
    try:
        lo, hi = parse_rational(parts[0]), parse_rational(parts[1])
        steps = int(parts[2])
    except (ValueError, ZeroDivisionError):
        raise InputError(f"alpha grid {text!r} has a malformed bound or count") from None
    if steps < 1:
        raise InputError("alpha grid needs at least one step")
    if not (0 <= lo <= Fraction(1, 2) and 0 <= hi <= Fraction(1, 2)):
        raise InputError("alpha grid bounds must lie in [0, 1/2]")
    if steps == 1:
        pts = [lo]
    else:
        pts = [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    return pts if scalar == RATIONAL else [float(p) for p in pts]


def parse_int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{text!r} is not a comma-separated list of integers") from None
    if not vals or min(vals) < 1:
        raise InputError("list entries must be positive integers")
    return vals


def _num(v):
    """Rationals as ``p/q`` strings, floats by repr."""
    if v is None:
        return None
    if isinstance(v, Fraction):
        return format_rational(v)
    return repr(float(v))


def _csv_num(v):
    if v is None:
        return ""
    return repr(float(v))


def _write(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


def _game_from_args(args):
    if args.game:
        g = load_game(args.game)
        if args.scalar == FLOAT:
            g = g.astype(FLOAT)
        return g, {"game": args.game}
    if args.alpha is None:
        raise InputError("give a game file or --alpha")
    alpha = parse_rational(args.alpha) if args.scalar == RATIONAL else float(args.alpha)
    g = bsc_game(alpha, args.copies, args.scalar, args.players, args.budget)
    return g, {"alpha": _num(alpha), "copies": args.copies, "players": args.players}


def _classical(g):
    try:
        return optimal_classical_symmetric(g)
    except (DomainError, ShapeError):
        if g.num_players == 3 and g.input_sizes == (2, 2, 2):
            return optimal_classical_3party_binary(g), None
        return optimal_classical_exhaustive(g)


# -- subcommands ---------------------------------------------------------------------

def cmd_solve(args):
    g, source = _game_from_args(args)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    bad = set(modes) - {"classical", "ns", "npa"}
    if bad:
        raise InputError(f"unknown modes {sorted(bad)}")
    report = {"source": source, "scalar": g.scalar, "shape": list(g.probs.shape), "results": {}}
    if "classical" in modes:
        val, strat = _classical(g)
        report["results"]["classical"] = {
            "value": _num(val),
            "float": float(val),
            "strategy": strat.label() if strat is not None else None,
        }
    if "ns" in modes:
        method = "exact" if g.scalar == RATIONAL else "float"
        res = optimal_ns(g, method=method, budget=args.budget, details=True)
        report["results"]["ns"] = {
            "value": _num(res.value),
            "float": float(res.value),
            "method": res.method,
            "lp_variables": res.num_variables,
            "lp_constraints": res.num_constraints,
        }
    if "npa" in modes:
        report["results"]["npa"] = _npa_report(g, args)
    _write(_json(report), args.out)
    return 0


def _npa_report(g, args):
    sdp = build_1mn(g)
    if args.dump_sdp:
        with open(args.dump_sdp, "w") as fh:
            dump_sdp(sdp, fh)
    res = solve_sdp(sdp, tol=args.tol)
    return {
        "bound": repr(res.bound),
        "objective": repr(res.objective),
        "margin": repr(res.margin),
        "primal_residual": repr(res.primal_residual),
        "constraint_residual": repr(res.constraint_residual),
        "psd_residual": repr(res.psd_residual),
        "iterations": res.iterations,
        "converged": res.converged,
        "dimension": sdp.dim,
        "method": "admm-1mn",
    }


def cmd_npa(args):
    g, source = _game_from_args(args)
    report = {"source": source, "scalar": g.scalar, "npa": _npa_report(g, args)}
    _write(_json(report), args.out)
    return 0 if report["npa"]["converged"] else 1


def _sweep_point(task):
    alpha, n, scalar, with_npa, budget = task
    row = {"alpha": alpha, "n": n, "w_classical": None, "w_ns": None, "w_npa": None,
           "strategy": "", "error": ""}
    try:
        g = bsc_game(alpha, n, scalar, 2, budget)
        if n <= 2:
            val, strat = optimal_classical_symmetric(g)
            row["w_classical"] = val
            row["strategy"] = strat.label()
        method = "exact" if scalar == RATIONAL else "float"
        row["w_ns"] = optimal_ns(g, method=method)[0]
        if with_npa and n <= 2:
            res = solve_sdp(build_1mn(g))
            row["w_npa"] = res.bound
            if not res.converged:
                row["error"] = f"npa residual {res.residual:.3g}"
    except (ArithmeticError, AssertionError, BudgetError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        for key in ("w_classical", "w_ns", "w_npa"):
            if row[key] is None:
                row[key] = math.nan
    return row


def cmd_sweep(args):
    alphas = parse_grid(args.alpha_grid, args.scalar)
    tasks = [(a, args.copies, args.scalar, args.npa, args.budget) for a in alphas]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_csv_num(r["alpha"]), r["n"], _csv_num(r["w_classical"]), _csv_num(r["w_ns"]),
                    _csv_num(r["w_npa"]), r["strategy"], r["error"]])
    _write(buf.getvalue(), args.out)
    return 1 if any(r["error"] for r in rows) else 0


def _enumerate(parties, outputs, inputs):
    h = ns_polytope_hrep((outputs,) * parties, (inputs,) * parties)
    t0 = time.time()
    v = enumerate_vertices(h, log=_log)
    _log(f"enumeration: {len(v)} vertices in {time.time() - t0:.1f}s")
    return v


def cmd_vertices(args):
    v = _enumerate(args.parties, args.outputs, args.inputs)
    if args.dump_vertices:
        dump_vertices(v, args.dump_vertices)
    report = {
        "parties": args.parties,
        "outputs": args.outputs,
        "inputs": args.inputs,
        "vertices": len(v),
        "deterministic": deterministic_vertex_count(v),
    }
    _write(_json(report), args.out)
    return 0


def cmd_gap3(args):
    t0 = time.time()
    v = _enumerate(3, 2, 2)
    if args.dump_vertices:
        dump_vertices(v, args.dump_vertices)
    rep = max_gap_binary(3, vertices=v, jobs=args.jobs, log=_log)
    no_det = filter_vertices(v, 2, 3, (2, 2, 2), drop_deterministic=True)
    report = {
        "vertices": rep.num_vertices,
        "deterministic_vertices": deterministic_vertex_count(v),
        "filtered": rep.num_filtered,
        "filtered_non_deterministic": len(no_det),
        "strategies": rep.num_strategies,
        "per_vertex_gap": [format_rational(x) for x in rep.per_vertex],
        "max_gap": format_rational(rep.gap),
        "worst_vertex": rep.worst_vertex,
        "worst_game": [format_rational(x) for x in rep.worst_game.flat()],
    }
    _write(_json(report), args.out)
    _log(f"gap3: max gap {report['max_gap']} over {rep.num_filtered} vertices, {time.time() - t0:.1f}s")
    return 0


def cmd_exponent(args):
    alphas = parse_grid(args.alpha_grid, FLOAT)
    n_list = parse_int_list(args.n_list)
    rows = finite_n_exponent_table(n_list, alphas)
    text = exponent_table_csv(rows)
    if args.optimize:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("alpha", "optimized", "q00", "q01", "q10", "q11"))
        for a in alphas:
            val, q = optimize_exponent(bsc_channel(a, FLOAT), seed=args.seed)
            w.writerow([repr(a), repr(val)] + [repr(float(v)) for v in q.ravel()])
        text += "\n" + buf.getvalue()
    _write(text, args.out)
    return 0


def _code_list(n, path):
    if path:
        c = load_code(path)
        return [(f"file:{path}", c)]
    codes = [("identity", identity_code(n))]
    if n % 2 == 1:
        codes.append(("repetition", repetition_code(n)))
    if n == 7:
        codes.append(("hamming74", hamming_7_4()))
    return codes


def cmd_codes(args):
    alphas = parse_grid(args.alpha_grid, args.scalar)
    codes = _code_list(args.copies, args.code)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CODE_COLUMNS)
    for a in alphas:
        ch = bsc_channel(a, args.scalar)
        const = Fraction(1, 2 ** args.copies) if args.scalar == RATIONAL else 0.5 ** args.copies
        w.writerow([_csv_num(a), "constant", args.copies, _csv_num(const), ""])
        for name, c in codes:
            val = code_strategy_value(c, ch, budget=args.budget)
            succ = code_min_success(c, ch, budget=args.budget, mc=args.mc, seed=args.seed)
            w.writerow([_csv_num(a), name, c.n, _csv_num(val), _csv_num(succ)])
    _write(buf.getvalue(), args.out)
    return 0


# -- parser ---------------------------------------------------------------------------

def _common(p, grid=None):
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--scalar", choices=(RATIONAL, FLOAT), default=RATIONAL)
    p.add_argument("--budget", type=int, default=2 ** 26, help="size cap for tables and LPs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    if grid is not None:
        p.add_argument("--alpha-grid", default=grid, help="a:b:k, k points from a to b")


def _game_args(p):
    p.add_argument("game", nargs="?", help="game JSON file")
    p.add_argument("--alpha", help="BSC flip probability (instead of a file)")
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--players", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-6, help="SDP residual tolerance")
    p.add_argument("--dump-sdp", help="write the moment SDP in sparse text form")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser():
    ap = _Parser(prog="lssd", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="classical / no-signalling / NPA values of one game")
    _common(p)
    _game_args(p)
    p.add_argument("--modes", default="classical,ns")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("npa", help="level 1+MN upper bound of one two-player game")
    _common(p)
    _game_args(p)
    p.set_defaults(func=cmd_npa, scalar=FLOAT)

    p = sub.add_parser("sweep", help="BSC values over an alpha grid (CSV)")
    _common(p, "0:1/2:21")
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--npa", action="store_true", help="add the NPA bound column (n <= 2)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("vertices", help="enumerate no-signalling polytope vertices")
    _common(p)
    p.add_argument("--parties", type=int, default=2)
    p.add_argument("--outputs", type=int, default=2)
    p.add_argument("--inputs", type=int, default=2)
    p.add_argument("--dump-vertices", help="write vertices as JSON")
    p.set_defaults(func=cmd_vertices)

    p = sub.add_parser("gap3", help="three-party binary no-signalling vs classical gap")
    _common(p)
    p.add_argument("--dump-vertices", help="write vertices as JSON")
    p.set_defaults(func=cmd_gap3)

    p = sub.add_parser("exponent", help="finite-n exponent table (CSV)")
    _common(p, "1/20:9/20:9")
    p.add_argument("--n-list", default="1,2,4,8")
    p.add_argument("--optimize", action="store_true", help="append the optimized single-letter exponent")
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("codes", help="code strategy values on the repeated BSC game (CSV)")
    _common(p, "0:1/2:11")
    p.add_argument("--copies", type=int, default=7, help="block length")
    p.add_argument("--code", help="code JSON file (default: built-in codes)")
    p.add_argument("--mc", action="store_true", help="Monte Carlo fallback above the budget")
    p.set_defaults(func=cmd_codes)
    return ap


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(_json({"error": type(exc).__name__, "message": str(exc)}), end="")
        return 2
    except (ArithmeticError, AssertionError) as exc:
        print(_json({"error": type(exc).__name__, "message": str(exc)}), end="")
        return 1


if __name__ == "__main__":
    sys.exit(main())
