"""Command line entry point.

    persistent-adjoint run <experiment> [--n --m --seed --eps --delta --iters --mode --out]
    persistent-adjoint report <trace.csv>
    persistent-adjoint gradcheck <experiment> [--n --m --seed]
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiments import EXPERIMENTS, ExperimentConfig, gradcheck, report, run_experiment
from .optimizer import TraceFormatError


def _parser():
    p = argparse.ArgumentParser(prog="persistent-adjoint", description=__doc__.splitlines()[0] or None)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment and write its trace")
    r.add_argument("experiment", choices=EXPERIMENTS)
    r.add_argument("--n", type=int, default=5, help="species / nodes per instance")
    r.add_argument("--m", type=int, default=10, help="number of instances")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--eps", type=float, default=0.4, help="step size (empirical mode)")
    r.add_argument("--delta", type=float, default=0.01, help="time-scale factor (empirical mode)")
    r.add_argument("--iters", type=int, default=None, help="outer iterations (default 50000; 1000 for scalar-certified)")
    r.add_argument("--mode", choices=("empirical", "certified"), default=None)
    r.add_argument("--alpha-c", type=float, default=0.4)
    r.add_argument("--alpha-eps", type=float, default=0.5)
    r.add_argument("--alpha-delta", type=float, default=0.5)
    r.add_argument("--stride", type=int, default=50, help="evaluate the objective every STRIDE iterations (0: never)")
    r.add_argument("--out", default=None, help="output directory (default runs/<experiment>-seed<seed>)")

    rep = sub.add_parser("report", help="summarise a trace CSV")
    rep.add_argument("trace")

    g = sub.add_parser("gradcheck", help="adjoint gradient vs central differences")
    g.add_argument("experiment", choices=EXPERIMENTS)
    g.add_argument("--n", type=int, default=5)
    g.add_argument("--m", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            iters = args.iters
            if iters is None:
                iters = 1000 if args.experiment == "scalar-certified" else 50_000
            cfg = ExperimentConfig(
                args.experiment, n=args.n, m=args.m, seed=args.seed, mode=args.mode,
                eps=args.eps, delta=args.delta, alpha_c=args.alpha_c, alpha_eps=args.alpha_eps,
                alpha_delta=args.alpha_delta, iters=iters, stride=args.stride, out=args.out,
            )
            s = run_experiment(cfg)
            print(f"{s['experiment']} seed={s['seed']} mode={s['mode']} eps={s['epsilon']:.6g} delta={s['delta']:.6g}")
            print(f"objective: {s['initial_objective']:.6g} -> {s['final_objective']:.6g}")
            print(f"final gradient estimate norm: {s['final_grad_norm']:.6g}")
            print(f"total inner steps: {s['total_inner_steps']}  wall time: {s['wall_time_s']:.1f}s")
        elif args.command == "report":
            print(report(args.trace))
        else:
            err = gradcheck(args.experiment, n=args.n, m=args.m, seed=args.seed)
            print(f"max relative adjoint-vs-FD gradient error: {err:.3e}")
    except (ValueError, OSError, ArithmeticError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: run failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
