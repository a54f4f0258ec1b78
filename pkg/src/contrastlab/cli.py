"""Command-line front end.

Every subcommand is deterministic given its flags; data files are written
atomically and followed by a ``<stem>.manifest.json`` listing them.
Exit codes: 0 success, 1 failed verification, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from contrastlab import __version__, suites
from contrastlab.analysis import variance_study
from contrastlab.game import (
    BilinearGame,
    CostKind,
    DynamicsConfig,
    GeneratorCostVariant,
    UpdateMode,
    cost_curve,
    diagnose_trajectory,
    simulate_dynamics,
)
from contrastlab.models import DistributionTable
from contrastlab.output import write_csv, write_json, write_manifest

COST_CURVE_HEADER = ["a", "f_minimax", "f_heuristic", "f_mle"]
DYNAMICS_HEADER = ["iteration", "value", "grad_norm_g", "grad_norm_c", "param_norm_g"]
VARIANCE_HEADER = ["variant", "n_samples", "per_sample_variance", "grad_error_norm"]


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _finish(args, primary, outputs, params):
    write_manifest(primary, args.command, params, args.seed, __version__, outputs)


def _emit_reports(args, reports, default_name):
    out = args.out or default_name
    write_json(out, reports)
    _finish(args, out, [out], {"trials": getattr(args, "trials", None),
                               "k_min": getattr(args, "k_min", None),
                               "k_max": getattr(args, "k_max", None)})
    print(json.dumps(reports, indent=2))
    items = reports if isinstance(reports, list) else [reports]
    return 0 if all(r["pass"] for r in items) else 1


def cmd_verify_sce(args):
    return _emit_reports(args, suites.sce_identity_suite(args.trials, args.k_min, args.k_max, args.seed),
                         "verify_sce.json")


def cmd_verify_gan_mle(args):
    return _emit_reports(args, suites.gan_mle_suite(args.trials, args.k_min, args.k_max, args.seed),
                         "verify_gan_mle.json")


def cmd_all_checks(args):
    return _emit_reports(args, suites.all_suites(args.seed), "all_checks.json")


def cmd_cost_curve(args):
    try:
        rows = cost_curve(args.min, args.max, args.points)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = args.out or "cost_curve.csv"
    write_csv(out, COST_CURVE_HEADER, rows)
    _finish(args, out, [out], {"min": args.min, "max": args.max, "points": args.points})
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_dynamics(args):
    eta_g = args.eta_g if args.eta_g is not None else args.eta
    eta_c = args.eta_c if args.eta_c is not None else args.eta
    if args.game == "bilinear":
        game, p_d = BilinearGame(), None
        init_g = args.init_g or [1.0]
        init_c = args.init_c or [0.0]
    else:
        try:
            p_d = DistributionTable(args.p_data)
        except ValueError as exc:
            raise UsageError(f"--p-data: {exc}")
        game = None
        init_g = args.init_g or [0.0] * len(p_d)
        init_c = args.init_c or [0.0] * len(p_d)
    try:
        cfg = DynamicsConfig(eta_g, eta_c, init_g, init_c, iterations=args.iters,
                             mode=UpdateMode(args.mode), disc_steps_per_gen_step=args.disc_steps,
                             cost=GeneratorCostVariant(CostKind(args.cost)))
        traj = simulate_dynamics(p_d, cfg, game=game)
    except ValueError as exc:
        raise UsageError(str(exc))
    report = diagnose_trajectory(traj, tol=args.tol)

    out = args.out or "trajectory.csv"
    rows = [(s.iteration, s.value, s.grad_norm_g, s.grad_norm_c, s.param_norm_g) for s in traj.snapshots]
    write_csv(out, DYNAMICS_HEADER, rows)
    last = traj.snapshots[-1]
    summary = {
        "game": args.game,
        "verdict": report.verdict.value,
        "final_value": report.final_value,
        "final_grad_norms": list(report.final_grad_norms),
        "oscillation_score": report.oscillation_score,
        "final_theta_g": last.theta_g.logits.tolist(),
        "final_disc": last.disc.logit_table.tolist(),
        "final_radius_sq": last.joint_norm ** 2,
        "iterations_completed": last.iteration,
        "truncated": traj.diverged,
    }
    report_path = Path(out).with_name(f"{Path(out).stem}.report.json")
    write_json(report_path, summary)
    params = {"game": args.game, "mode": args.mode, "eta_g": eta_g, "eta_c": eta_c,
              "disc_steps": args.disc_steps, "iters": args.iters, "cost": args.cost,
              "tol": args.tol, "p_data": None if p_d is None else p_d.probs.tolist(),
              "init_g": list(init_g), "init_c": list(init_c)}
    _finish(args, out, [out, report_path], params)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_variance(args):
    try:
        rows = variance_study(args.n, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = args.out or "variance.csv"
    write_csv(out, VARIANCE_HEADER,
              [(r.variant.label, r.n_samples, r.per_sample_variance, r.grad_error_norm) for r in rows])
    _finish(args, out, [out], {"n": list(args.n)})
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contrastlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output file (default in the working directory)")
        p.set_defaults(func=func)
        return p

    for name, func, text in [
        ("verify-sce", cmd_verify_sce, "self-contrastive gradient equals half the likelihood gradient"),
        ("verify-gan-mle", cmd_verify_gan_mle, "likelihood-cost generator gradient recovers MLE"),
    ]:
        p = add(name, func, text)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--k-min", type=int, default=2)
        p.add_argument("--k-max", type=int, default=50)

    add("all-checks", cmd_all_checks, "run every verification suite")

    p = add("cost-curve", cmd_cost_curve, "generator cost of each variant against discriminator logit")
    p.add_argument("--min", type=float, default=-5.0)
    p.add_argument("--max", type=float, default=5.0)
    p.add_argument("--points", type=int, default=101)

    p = add("dynamics", cmd_dynamics, "simulate two-player gradient dynamics")
    p.add_argument("--game", choices=["tabular", "bilinear"], default="tabular")
    p.add_argument("--mode", choices=[m.value for m in UpdateMode], default="simultaneous")
    p.add_argument("--eta", type=float, default=0.1, help="step size for both players")
    p.add_argument("--eta-g", type=float, default=None)
    p.add_argument("--eta-c", type=float, default=None)
    p.add_argument("--disc-steps", type=int, default=1)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--cost", choices=[k.value for k in CostKind], default="minimax")
    p.add_argument("--p-data", type=_floats, default=[0.75, 0.25])
    p.add_argument("--init-g", type=_floats, default=None)
    p.add_argument("--init-c", type=_floats, default=None)
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("variance", cmd_variance, "Monte Carlo variance of the generator gradient estimators")
    p.add_argument("--n", type=_ints, default=[100, 1000, 10000, 100000])
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
