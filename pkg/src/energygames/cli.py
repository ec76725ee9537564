"""Command-line front end.

Exit status: 0 when Player 0 wins / the answer is YES / the command succeeded,
1 when Player 1 wins / the answer is NO, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import objectives as O
from . import oracle, reductions, solvers, strategies, tradeoff
from .arena import ArenaError, Player, load_fixture, parse_arena, serialize_arena
from .evaluation import Lasso, ObjectiveValue, avg_energy_of_lasso, mean_payoff_of_lasso
from .solvers import format_certificate

JOBS_ENV = "ENERGYGAMES_JOBS"

OBJECTIVES = ("energy-l", "energy-lu", "avg-energy-l", "avg-energy-lu", "recharge",
              "avg-recharge", "mean-payoff", "parity3", "countdown")
SOLVABLE = tuple(x for x in OBJECTIVES if x != "avg-energy-l")
LASSO_OBJECTIVES = ("avg-energy-l", "avg-energy-lu", "avg-recharge", "mean-payoff")


class UsageError(Exception):
    pass


def write_atomic(path, data: bytes) -> None:
    """Write via a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_arena(ref: str):
    """An arena file, or a bundled fixture (``INTRO``, ``fixture:MEMLB``, ``CYCLE(3,1)``)."""
    if os.path.exists(ref):
        return parse_arena(Path(ref).read_bytes())
    name = ref[len("fixture:"):] if ref.startswith("fixture:") else ref
    try:
        return load_fixture(name)
    except KeyError:
        raise UsageError(f"no such arena file or fixture: {ref}") from None


def threshold(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational threshold: {text!r}") from None


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"objective {args.objective} needs {flags}")


def build_objective(args, a):
    kind = args.objective
    if kind == "energy-l":
        return O.EnergyL()
    if kind == "energy-lu":
        _need(args, "cap")
        return O.EnergyLU(args.cap)
    if kind == "avg-energy-l":
        _need(args, "threshold")
        return O.AvgEnergyL(args.threshold)
    if kind == "avg-energy-lu":
        _need(args, "cap", "threshold")
        return O.AvgEnergyLU(args.cap, args.threshold)
    if kind == "recharge":
        _need(args, "cap")
        return O.Recharge(args.cap)
    if kind == "avg-recharge":
        _need(args, "cap", "threshold")
        return O.AvgRecharge(args.cap, args.threshold)
    if kind == "mean-payoff":
        _need(args, "threshold")
        return O.MeanPayoff(args.threshold)
    if kind == "parity3":
        _need(args, "color_file")
        return O.Parity(O.parse_colors(Path(args.color_file).read_bytes(), a))
    if kind == "countdown":
        _need(args, "budget")
        return O.Countdown(args.budget)
    raise UsageError(f"unknown objective {kind}")


def _winner_code(p: Player) -> int:
    return 0 if p == Player.P0 else 1


def cmd_solve(args) -> int:
    a = load_arena(args.arena)
    obj = build_objective(args, a)
    value = None
    if isinstance(obj, O.EnergyL):
        res = solvers.solve_energy_l(a)
    elif isinstance(obj, O.EnergyLU):
        res = solvers.solve_energy_lu(a, obj.cap)
    elif isinstance(obj, O.Recharge):
        res = solvers.solve_recharge(a, obj.cap)
    elif isinstance(obj, O.AvgEnergyLU):
        res = reductions.solve_avg_energy_lu(a, obj.cap, obj.t)
        value = reductions.avg_energy_lu_value(a, obj.cap)
    elif isinstance(obj, O.AvgRecharge):
        res = reductions.solve_avg_recharge(a, obj.cap, obj.t)
        value = reductions.avg_recharge_value(a, obj.cap)
    elif isinstance(obj, O.MeanPayoff):
        res = solvers.solve_mean_payoff_threshold(a, obj.t)
        value = ObjectiveValue.finite(solvers.mean_payoff_value(a))
    elif isinstance(obj, O.Parity):
        res = solvers.solve_parity3(a, obj.colors)
    else:
        res = solvers.solve_countdown(a, obj.budget)
    print(f"winner={res.winner}")
    if value is not None:
        print(f"value={value}")
    if args.emit_strategy:
        if res.strategy is None:
            raise UsageError("the solver produced no strategy for this outcome")
        write_atomic(args.emit_strategy, strategies.serialize_strategy(res.strategy, a))
    if args.emit_certificate:
        write_atomic(args.emit_certificate, format_certificate(a, res.certificate).encode("utf-8"))
    return _winner_code(res.winner)


def _emit(args, a, strategy):
    if getattr(args, "emit_strategy", None) and strategy is not None:
        write_atomic(args.emit_strategy, strategies.serialize_strategy(strategy, a))


def cmd_exists_cap(args) -> int:
    a = load_arena(args.arena)
    res = reductions.exists_cap_recharge(a)
    if not res.found:
        print("result=NO")
        return 1
    print(f"result=YES cap={res.cap}")
    if args.minimal:
        print(f"minimal_cap={oracle.exists_cap_by_search(a, res.cap)}")
    _emit(args, a, res.strategy)
    return 0


def _exists_lu(args, label: str) -> int:
    a = load_arena(args.arena)
    res = reductions.exists_cap_energy_lu(a, args.cap_max)
    if not res.found:
        print(f"result=NO-UP-TO-BOUND cap_max={res.cap_max}")
        return 1
    if label == "threshold":
        print(f"result=YES threshold={res.threshold} cap={res.cap}")
    else:
        print(f"result=YES cap={res.cap}")
    _emit(args, a, res.strategy)
    return 0


def cmd_exists_cap_lu(args) -> int:
    return _exists_lu(args, "cap")


def cmd_exists_threshold(args) -> int:
    return _exists_lu(args, "threshold")


def cmd_verify(args) -> int:
    a = load_arena(args.arena)
    obj = build_objective(args, a)
    sigma = strategies.parse_strategy(Path(args.strategy).read_bytes(), a)
    verdict = strategies.verify_strategy(a, sigma, obj)
    print("ACCEPTED" if verdict.accepted else "REJECTED")
    if verdict.worst_value is not None:
        print(f"worst={verdict.worst_value}")
    if verdict.witness is not None:
        print(f"witness={verdict.witness.format(a)}")
    return 0 if verdict.accepted else 1


def default_jobs() -> int:
    env = os.environ.get(JOBS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _sweep_output(args, rows, key):
    data = tradeoff.to_csv(rows, key)
    if args.out:
        write_atomic(args.out, data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    if args.ascii_plot:
        sys.stdout.write(tradeoff.ascii_plot(rows, label=key))
    return 0


def cmd_sweep_cap(args) -> int:
    a = load_arena(args.arena)
    rows = tradeoff.sweep_capacity(a, args.cap_from, args.cap_to, args.jobs or default_jobs())
    return _sweep_output(args, rows, "cap")


def cmd_sweep_memory(args) -> int:
    a = load_arena(args.arena)
    rows = tradeoff.sweep_memory(a, args.cap, args.n_from, args.n_to, args.jobs or default_jobs(),
                                 args.limit)
    return _sweep_output(args, rows, "n")


def cmd_reduce(args) -> int:
    a = load_arena(args.arena)
    kind = args.kind
    if kind in ("avg-recharge-mp", "avg-energy-lu-mp"):
        if args.cap is None or args.threshold is None:
            raise UsageError(f"reduce --kind {kind} needs --cap and --threshold")
        fn = reductions.reduce_avg_recharge if kind == "avg-recharge-mp" else reductions.reduce_avg_energy_lu
        data = fn(a, args.cap, args.threshold).serialize(a)
    elif kind == "exists-cap-parity":
        trip = reductions.reduce_exists_cap_to_parity(a)
        data = serialize_arena(trip.arena, ["three-color parity game; colors in the color file"])
        colors = O.serialize_colors(trip.colors, trip.arena)
        if args.color_out:
            write_atomic(args.color_out, colors)
        else:
            data += b"".join(b"# " + line + b"\n" for line in colors.splitlines())
    elif kind in ("countdown-avg-recharge", "fig4"):
        if args.budget is None:
            raise UsageError(f"reduce --kind {kind} needs --budget")
        if kind == "fig4":
            g = reductions.build_fig4_gadget(a, args.budget)
            data = serialize_arena(g, ["avg-recharge t=0 for some capacity"])
        else:
            data = reductions.reduce_countdown_to_avg_recharge(a, args.budget).serialize(a)
    else:
        raise UsageError(f"unknown reduction {kind}")
    if args.out:
        write_atomic(args.out, data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return 0


def cmd_gen(args) -> int:
    if args.kind == "countdown":
        a = oracle.random_countdown(args.seed)
    elif args.kind == "recharge":
        a = oracle.random_recharge_arena(args.seed, args.vertices, weight=args.weight)
    else:
        a = oracle.random_arena(args.seed, args.vertices, weight=args.weight)
    data = serialize_arena(a, [f"generated kind={args.kind} seed={args.seed}"])
    if args.out:
        write_atomic(args.out, data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return 0


def cmd_eval_lasso(args) -> int:
    a = load_arena(args.arena)
    lasso = Lasso.parse(args.lasso, a)
    kind = args.objective
    if kind == "mean-payoff":
        value = ObjectiveValue.finite(mean_payoff_of_lasso(a, lasso))
    elif kind == "avg-energy-l":
        value = avg_energy_of_lasso(a, lasso)
    else:
        if args.cap is None:
            raise UsageError(f"objective {kind} needs --cap")
        if kind == "avg-recharge":
            value = avg_energy_of_lasso(a, lasso, recharge_cap=args.cap)
        else:
            value = avg_energy_of_lasso(a, lasso, upper=args.cap)
    print(f"value={value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="energygames", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def objective_flags(sp, choices):
        sp.add_argument("--objective", required=True, choices=choices)
        sp.add_argument("--cap", type=int)
        sp.add_argument("--threshold", type=threshold)
        sp.add_argument("--color-file")
        sp.add_argument("--budget", type=int)

    sp = sub.add_parser("solve", help="decide the winner of a game")
    objective_flags(sp, SOLVABLE)
    sp.add_argument("--emit-strategy")
    sp.add_argument("--emit-certificate")
    sp.add_argument("arena")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("exists-cap", help="is there a capacity winning the recharge game?")
    sp.add_argument("--minimal", action="store_true", help="also report the least capacity")
    sp.add_argument("--emit-strategy")
    sp.add_argument("arena")
    sp.set_defaults(func=cmd_exists_cap)

    for name, func in (("exists-cap-lu", cmd_exists_cap_lu), ("exists-threshold", cmd_exists_threshold)):
        sp = sub.add_parser(name, help="bounded search for an energy capacity / average threshold")
        sp.add_argument("--cap-max", type=int)
        sp.add_argument("--emit-strategy")
        sp.add_argument("arena")
        sp.set_defaults(func=func)

    sp = sub.add_parser("verify-strategy", help="check a strategy file against an objective")
    objective_flags(sp, OBJECTIVES)
    sp.add_argument("--strategy", required=True)
    sp.add_argument("arena")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep-cap", help="optimal average per capacity")
    sp.add_argument("--from", dest="cap_from", type=int, required=True)
    sp.add_argument("--to", dest="cap_to", type=int, required=True)
    sp.add_argument("--out")
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--ascii-plot", action="store_true")
    sp.add_argument("arena")
    sp.set_defaults(func=cmd_sweep_cap)

    sp = sub.add_parser("sweep-memory", help="best average per number of memory states")
    sp.add_argument("--cap", type=int, required=True)
    sp.add_argument("--from", dest="n_from", type=int, required=True)
    sp.add_argument("--to", dest="n_to", type=int, required=True)
    sp.add_argument("--limit", type=int, default=10 ** 7, help="enumeration step limit")
    sp.add_argument("--out")
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--ascii-plot", action="store_true")
    sp.add_argument("arena")
    sp.set_defaults(func=cmd_sweep_memory)

    sp = sub.add_parser("reduce", help="write a reduced game")
    sp.add_argument("--kind", required=True, choices=(
        "avg-recharge-mp", "avg-energy-lu-mp", "exists-cap-parity", "countdown-avg-recharge", "fig4"))
    sp.add_argument("--cap", type=int)
    sp.add_argument("--threshold", type=threshold)
    sp.add_argument("--budget", type=int)
    sp.add_argument("--out")
    sp.add_argument("--color-out")
    sp.add_argument("arena")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("gen", help="generate a random arena")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--kind", choices=("general", "recharge", "countdown"), default="general")
    sp.add_argument("--vertices", type=int, default=5)
    sp.add_argument("--weight", type=int, default=3)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("eval-lasso", help="long-run value of an ultimately periodic play")
    sp.add_argument("--lasso", required=True, help='"prefix: v0 ; cycle: v2 v0 v1"')
    sp.add_argument("--objective", choices=LASSO_OBJECTIVES, default="avg-energy-l")
    sp.add_argument("--cap", type=int)
    sp.add_argument("arena")
    sp.set_defaults(func=cmd_eval_lasso)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ArenaError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
