"""Command-line front end.

Subcommands:

* ``sweep``    — steady-state MSE sweep over P, writing CSV and SVG;
* ``oracle``   — run the independent oracle cross-checks;
* ``track``    — one steady-state run, printing the design summary;
* ``dump-sdp`` — print the debug dump of a design SDP instance.

Exit codes: 0 success, 1 usage/config error, 2 oracle failure,
3 solver non-convergence.
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import harness, sdp, vector_design
from .errors import ConfigurationError, SolverError
from .kalman import run_to_steady_state

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ORACLE = 2
EXIT_SOLVER = 3


def _load_config(args) -> harness.ExperimentConfig:
    if getattr(args, "config", None):
        cfg = harness.load_config(args.config)
    else:
        cfg = harness.ExperimentConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "p_grid", None):
        overrides["p_grid"] = [float(v) for v in args.p_grid.split(",")]
    if getattr(args, "policies", None):
        overrides["policies"] = tuple(v.strip() for v in args.policies.split(","))
    if getattr(args, "out_csv", None):
        overrides["out_csv"] = args.out_csv
    if getattr(args, "out_svg", None):
        overrides["out_svg"] = args.out_svg
    return replace(cfg, **overrides) if overrides else cfg


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    rows = harness.run_sweep(cfg)
    harness.emit_csv(rows, cfg.out_csv)
    harness.emit_svg(rows, cfg.out_svg)
    n_bad = sum(1 for r in rows if not r.converged)
    print(f"wrote {len(rows)} rows to {cfg.out_csv} and charts to {cfg.out_svg}")
    if n_bad:
        print(f"warning: {n_bad} unconverged runs (flagged in the CSV)")
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_oracle(args) -> int:
    cfg = _load_config(args)
    checks = harness.run_oracles(cfg)
    failed = False
    for c in checks:
        tag = "pass" if c.passed else "FAIL"
        print(f"{tag}  {c.name}: deviation {c.deviation:.3e} "
              f"(tolerance {c.tolerance:.1e})")
        failed = failed or not c.passed
    return EXIT_ORACLE if failed else EXIT_OK


def _cmd_track(args) -> int:
    cfg = _load_config(args)
    policy = args.policy
    mode = "vector" if policy in ("vec-minsum", "vec-minmax", "lower-bound") \
        else "scalar"
    model = harness.generate_system(cfg, mode)
    run = run_to_steady_state(model, policy, args.p,
                              tol=cfg.steady_tol, max_iters=cfg.max_iters)
    diag = np.real(np.diag(run.belief.m_post))
    print(f"policy       : {policy}")
    print(f"P            : {args.p}")
    print(f"converged    : {run.converged} after {run.steps} steps")
    print(f"sum MSE      : {float(np.sum(diag)):.8f}")
    print(f"max MSE      : {float(np.max(diag)):.8f}")
    r = run.result
    if hasattr(r, "a_star") and r is not None:
        a = np.asarray(r.a_star).reshape(-1)
        print(f"a*           : {np.array2string(a, precision=5)}")
    if hasattr(r, "objective_lower"):
        print(f"lower bound  : {r.objective_lower:.8f}")
        print(f"achieved     : {r.objective_achieved:.8f}")
    if hasattr(r, "t_star"):
        print(f"t*           : {r.t_star:.8f}")
        print(f"rank-one A*  : {r.rank_one}")
    if not run.converged:
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_dump_sdp(args) -> int:
    cfg = _load_config(args)
    model = harness.generate_system(cfg, "vector")
    m_pred = np.asarray(model.q, dtype=complex)  # one-step prediction from Q
    if args.which == "minsum":
        problem = vector_design.build_minsum_problem(m_pred, cfg.sigma_v_sq,
                                                     args.p)
    else:
        problem = vector_design.build_minmax_problem(m_pred, cfg.sigma_v_sq,
                                                     args.p)
    sys.stdout.write(sdp.dump_problem(problem))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reconfigkf",
        description="Reconfigurable-observation Kalman filtering experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, help="override the base seed")

    p_sweep = sub.add_parser("sweep", help="steady-state MSE sweep over P")
    common(p_sweep)
    p_sweep.add_argument("--p-grid", help="comma-separated P values")
    p_sweep.add_argument("--policies", help="comma-separated policy names")
    p_sweep.add_argument("--out-csv", help="CSV output path")
    p_sweep.add_argument("--out-svg", help="SVG output path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="run independent oracle checks")
    common(p_oracle)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_track = sub.add_parser("track", help="single steady-state run")
    common(p_track)
    p_track.add_argument("--policy", default="vec-minsum",
                         choices=["vec-minsum", "vec-minmax", "scalar-minsum",
                                  "scalar-minmax", "lower-bound"])
    p_track.add_argument("--p", type=float, default=2.0,
                         help="power budget P")
    p_track.set_defaults(func=_cmd_track)

    p_dump = sub.add_parser("dump-sdp", help="dump a design SDP instance")
    common(p_dump)
    p_dump.add_argument("--which", choices=["minsum", "minmax"],
                        default="minsum")
    p_dump.add_argument("--p", type=float, default=2.0)
    p_dump.set_defaults(func=_cmd_dump_sdp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
