"""Command-line front end: synth / run / sweep / privacy / bound.

Failures surface as a single machine-readable line on stderr —
`error {"type": ..., "message": ...}` — with a nonzero exit code, so
shell pipelines can branch on them without scraping tracebacks.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .centralized import (
    BoundInputs,
    consensus_reference,
    inner_bound,
    theorem3_bound,
)
from .errors import DzoaError
from .harness import (
    ExperimentConfig,
    calibrate_alpha0,
    config_from_file,
    config_to_yaml,
    default_config,
    run_experiment,
    sweep,
)
from .privacy import accountant_report
from .problem import dataset_to_csv, normalize_data, synthesize_data
from .topology import build_matrices, export_matrices


def _load_config(args) -> ExperimentConfig:
    cfg = config_from_file(args.config) if args.config else default_config()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seeds"] = (args.seed,)
    if getattr(args, "out_dir", None) is not None:
        overrides["out_dir"] = args.out_dir
    if getattr(args, "epsilon", None) is not None:
        overrides["epsilons"] = (args.epsilon,)
    if getattr(args, "delta", None) is not None:
        overrides["deltas"] = (args.delta,)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _cmd_synth(args) -> int:
    dataset, omega = synthesize_data(
        args.agents, args.samples, args.features, args.noise_std, args.seed
    )
    if not args.raw:
        dataset = normalize_data(dataset)
    dataset_to_csv(dataset, args.out)
    print(f"wrote {args.out} ({dataset.total_samples} rows, P={dataset.p})")
    if args.print_truth:
        print("omega " + json.dumps([float(v) for v in omega]))
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    if args.export_matrices:
        os.makedirs(cfg.out_dir, exist_ok=True)
        export_matrices(build_matrices(cfg.graph(), cfg.p), cfg.out_dir)
    result = run_experiment(cfg, trace_inner=args.trace_inner)
    print(f"wrote {len(result.trace_paths)} trace file(s) and {result.aggregate_path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    path = sweep(cfg)
    print(f"wrote {path}")
    return 0


def _cmd_privacy(args) -> int:
    cfg = _load_config(args)
    epsilon, delta = cfg.epsilons[0], cfg.deltas[0]
    graph = cfg.graph()
    nk_min = min(graph.degree(k) for k in graph.agents)
    alpha0 = cfg.alpha0
    if alpha0 is None:
        alpha0 = calibrate_alpha0(
            cfg.zo(1.0), epsilon, delta, cfg.c1, cfg.rho, nk_min,
            cfg.samples_per_agent,
        )
    report = accountant_report(
        graph, cfg.samples_per_agent, epsilon, delta, cfg.num_outer,
        cfg.zo(alpha0), cfg.c1, cfg.rho,
    )
    if args.json:
        print(json.dumps(dataclasses.asdict(report), sort_keys=True))
    else:
        print("\n".join(report.lines()))
    return 0


def _cmd_bound(args) -> int:
    cfg = _load_config(args)
    epsilon, delta = cfg.epsilons[0], cfg.deltas[0]
    seed = cfg.seeds[0]
    graph = cfg.graph()
    matrices = build_matrices(graph, cfg.p)
    dataset, _ = synthesize_data(cfg.num_agents, cfg.samples_per_agent, cfg.p,
                                 cfg.noise_std, seed)
    dataset = normalize_data(dataset)
    beta_c = consensus_reference(cfg.problem(), dataset, tol=cfg.oracle_tol)
    w_star = np.tile(beta_c, graph.num_agents)
    q0_term = 0.5 * cfg.rho * float(w_star @ matrices.l_plus @ w_star)
    nk_min = min(graph.degree(k) for k in graph.agents)
    alpha0 = cfg.alpha0
    if alpha0 is None:
        alpha0 = calibrate_alpha0(
            cfg.zo(1.0), epsilon, delta, cfg.c1, cfg.rho, nk_min,
            cfg.samples_per_agent, beta_c_norm=float(np.linalg.norm(beta_c)),
        )
    outer = theorem3_bound(BoundInputs(
        q0_minus_q_g_sq=q0_term,
        num_outer=cfg.num_outer,
        rho=cfg.rho,
        c1=cfg.c1,
        p=cfg.p,
        nk=nk_min,
        n_samples=cfg.samples_per_agent,
        epsilon=epsilon,
        delta=delta,
        lambda_max_lplus=matrices.lambda_max_lplus,
        lambda_min_nonzero_lminus=matrices.lambda_min_nonzero_lminus,
    ))
    inner = inner_bound(cfg.zo(alpha0))
    payload = {
        "epsilon": epsilon,
        "delta": delta,
        "seed": seed,
        "alpha0": alpha0,
        "outer_bound": outer,
        "inner_bound": inner,
        "q0_term": q0_term,
        "num_outer": cfg.num_outer,
    }
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"outer suboptimality bound at M={cfg.num_outer}: {outer:.6e}")
        print(f"  transient term ||q0 - q||_G^2 / M: {q0_term / cfg.num_outer:.6e}")
        print(f"  privacy floor: {outer - q0_term / cfg.num_outer:.6e}")
        print(f"inner expected-suboptimality bound (T={cfg.T}): {inner:.6e}")
    return 0


def _cmd_config(args) -> int:
    print(config_to_yaml(default_config()), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dzoa",
        description="Private decentralized zeroth-order consensus optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize a regression dataset CSV")
    synth.add_argument("--agents", type=int, default=5)
    synth.add_argument("--samples", type=int, default=20)
    synth.add_argument("--features", type=int, default=10)
    synth.add_argument("--noise-std", type=float, default=float(np.sqrt(0.1)))
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.add_argument("--raw", action="store_true",
                       help="skip feature normalization")
    synth.add_argument("--print-truth", action="store_true",
                       help="also print the generating coefficients")
    synth.set_defaults(fn=_cmd_synth)

    run = sub.add_parser("run", help="run the zeroth-order method over the grid")
    run.add_argument("--config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out-dir")
    run.add_argument("--epsilon", type=float)
    run.add_argument("--delta", type=float)
    run.add_argument("--trace-inner", action="store_true",
                     help="also write per-update inner-loop traces")
    run.add_argument("--export-matrices", action="store_true",
                     help="dump consensus matrices as CSVs for inspection")
    run.set_defaults(fn=_cmd_run)

    sw = sub.add_parser("sweep", help="privacy-accuracy sweep over both methods")
    sw.add_argument("--config")
    sw.add_argument("--out-dir")
    sw.set_defaults(fn=_cmd_sweep)

    priv = sub.add_parser("privacy", help="print the per-agent privacy account")
    priv.add_argument("--config")
    priv.add_argument("--epsilon", type=float)
    priv.add_argument("--delta", type=float)
    priv.add_argument("--json", action="store_true")
    priv.set_defaults(fn=_cmd_privacy)

    bound = sub.add_parser("bound", help="print convergence bounds for a config")
    bound.add_argument("--config")
    bound.add_argument("--epsilon", type=float)
    bound.add_argument("--delta", type=float)
    bound.add_argument("--seed", type=int)
    bound.add_argument("--json", action="store_true")
    bound.set_defaults(fn=_cmd_bound)

    conf = sub.add_parser("config", help="print the default config as YAML")
    conf.set_defaults(fn=_cmd_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DzoaError as exc:
        line = json.dumps(
            {"type": type(exc).__name__, "message": str(exc)}, sort_keys=True
        )
        print(f"error {line}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
