"""Command-line front end.

Exit codes: 0 converged / checks passed, 1 usage or I/O error,
2 iteration budget exceeded, 3 structural check failed.
"""

from __future__ import annotations

import argparse
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import io as mio
from .errors import MdpError
from .generator import GeneratorSpec, random_monotone_mdp
from .mdp import evaluate_expected_cost
from .solver import (
    Mode,
    SolverConfig,
    Status,
    long_run_reference,
    reference_cost,
    rho_sweep,
    solve,
)
from .dp import dp_solve
from .structure import check_monotone_assumptions

EXIT_OK, EXIT_ERROR, EXIT_BUDGET, EXIT_CHECK = 0, 1, 2, 3

_MODES = {"plain": Mode.PLAIN, "plain_admm": Mode.PLAIN, "regularized": Mode.REGULARIZED}


class UsageError(Exception):
    pass


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _lambda(s: str):
    return "auto" if s == "auto" else float(s)


def _float_list(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _int_list(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def _add_solver_flags(p: argparse.ArgumentParser, max_iter: int) -> None:
    p.add_argument("--lambda", dest="lam", type=_lambda, default="auto")
    p.add_argument("--i-admm", type=_positive_int, default=10)
    p.add_argument("--i-sg", type=_positive_int, default=5)
    p.add_argument("--max-iter", type=_positive_int, default=max_iter)
    p.add_argument("--eps-cost", type=float, default=0.01)
    p.add_argument("--eps-res", type=float, default=1e-4)
    p.add_argument("--boost-iter", type=int, default=0)


def _config(args, **kw) -> SolverConfig:
    return SolverConfig(
        lam=args.lam,
        i_admm=args.i_admm,
        i_sg=args.i_sg,
        max_iter=args.max_iter,
        eps_cost=args.eps_cost,
        eps_res=args.eps_res,
        boost_iter=args.boost_iter,
        **kw,
    )


def cmd_solve(args) -> int:
    model = mio.read_model(args.model)
    if args.mode not in _MODES:
        raise UsageError(f"--mode must be plain or regularized, got {args.mode!r}")
    config = _config(args, rho=args.rho, mode=_MODES[args.mode])

    ref = args.reference or ("long-run" if model.constraints else "dp")
    if ref == "dp":
        ref_cost = dp_solve(model)[1]
    elif ref == "long-run":
        ref_cost = long_run_reference(model, config)
    else:
        try:
            ref_cost = float(ref)
        except ValueError:
            raise UsageError(f"--reference must be dp, long-run or a number, got {ref!r}")
    config = replace(config, reference_cost=ref_cost)

    result = solve(model, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cost = evaluate_expected_cost(model, result.theta)
    mio.write_trace(result.trace, out / "trace.csv")
    mio.write_policy(result.theta, out / "policy.json", cost=cost)
    print(
        f"status={result.status.value} iterations={result.iterations} "
        f"cost={mio.fmt_real(cost)} reference={mio.fmt_real(ref_cost)}"
    )
    return EXIT_OK if result.status is Status.CONVERGED else EXIT_BUDGET


def cmd_check(args) -> int:
    model = mio.read_model(args.model)
    report = check_monotone_assumptions(model)
    print(report)
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_generate(args) -> int:
    try:
        spec = GeneratorSpec(args.x, args.u, args.n, args.seed, args.cost_scale)
    except ValueError as exc:
        raise UsageError(str(exc))
    model = random_monotone_mdp(spec)
    text = mio.dumps_model(model)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    return EXIT_OK


def _bench_cell(job):
    """Run the sweep for one instance; picklable for process pools."""
    seed, model, rhos, config = job
    if model is None:
        model = random_monotone_mdp(GeneratorSpec(*config["dims"], seed))
    cfg = config["solver"]
    if cfg.reference_cost is None:
        cfg = replace(cfg, reference_cost=reference_cost(model, cfg))
    rows = rho_sweep(model, rhos, cfg)
    return [(r.rho, seed, r.mode.value, r.iters_res, r.iters_cost) for r in rows]


def cmd_bench(args) -> int:
    if args.model and args.seeds:
        raise UsageError("--model and --seeds are mutually exclusive")
    if not args.model and not (args.seeds and args.x and args.u and args.n):
        raise UsageError("give --model, or --x --u --n with --seeds")
    rhos = _float_list(args.rhos)
    if not rhos or any(r <= 0 for r in rhos):
        raise UsageError("--rhos needs positive values")
    solver_cfg = _config(args)
    if args.model:
        jobs = [(None, mio.read_model(args.model), rhos, {"solver": solver_cfg})]
    else:
        cfg = {"solver": solver_cfg, "dims": (args.x, args.u, args.n)}
        jobs = [(s, None, rhos, cfg) for s in _int_list(args.seeds)]

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_cell, jobs))
    else:
        results = [_bench_cell(j) for j in jobs]
    rows = sorted(
        (row for res in results for row in res),
        key=lambda r: (r[0], -1 if r[1] is None else r[1], r[2]),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.csv").write_text(mio.dumps_bench(rows))

    for rho in rhos:
        line = [f"rho={mio.fmt_real(rho)}"]
        for mode in Mode:
            vals = [r[3] for r in rows if r[0] == rho and r[2] == mode.value]
            done = [v for v in vals if v is not None]
            med = statistics.median(done) if len(done) == len(vals) else "exceeded"
            line.append(f"{mode.value}: median iters_res={med}")
        print("  ".join(line))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monotone-mdp",
        description="Solve finite-horizon MDPs with monotone optimal policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run plain or regularized ADMM on a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", default="regularized")
    p.add_argument("--rho", type=float, default=5.0)
    _add_solver_flags(p, max_iter=1000)
    p.add_argument("--reference", default=None, help="dp, long-run or a number")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="check the monotone-structure conditions")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("generate", help="write a random model satisfying the conditions")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cost-scale", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output path, or - for stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="iterations-to-threshold over a rho sweep")
    p.add_argument("--model")
    p.add_argument("--x", type=int)
    p.add_argument("--u", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seeds")
    p.add_argument("--rhos", required=True)
    _add_solver_flags(p, max_iter=250)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (MdpError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
