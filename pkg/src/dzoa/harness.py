"""Experiment orchestration: configuration, seeded runs, sweeps, CSV emission.

A run grid is (epsilon, delta, seed); every cell is an independent job
with its own data synthesis and RNG streams, so executing cells in any
order — or in a process pool — produces byte-identical outputs. Each run
writes one trace CSV (schema versioned by the `# dzoa-trace v1` header
line, with the full parameter set and accountant report embedded as a
JSON meta comment) and the orchestrators write aggregate CSVs on top.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import yaml

from .admm import OuterTrace, dual_update, exact_primal_oracle, exchange, messages_in
from .admm import run as run_dzoa
from .centralized import consensus_reference
from .errors import ConfigError, DzoaError, Infeasible, ZeroReference
from .privacy import _harmonic_sums, accountant_report, sigma_for, total_epsilon
from .problem import (
    Dataset,
    ErmProblem,
    eval_local_f,
    make_context,
    normalize_data,
    synthesize_data,
)
from .topology import DEFAULT_TOPOLOGY_EDGES, Graph, build_graph
from .zeroth_order import ESTIMATOR_CONSTANT, ZoConfig

TRACE_HEADER = "# dzoa-trace v1"
INNER_HEADER = "# dzoa-inner v1"
RUNS_HEADER = "# dzoa-runs v1"
SWEEP_HEADER = "# dzoa-sweep v1"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run grid needs; see default_config() for the defaults."""

    num_agents: int = 5
    edges: tuple[tuple[int, int], ...] = DEFAULT_TOPOLOGY_EDGES
    samples_per_agent: int = 20
    p: int = 10
    noise_std: float = float(np.sqrt(0.1))
    eta: float = 1.0
    rho: float = 4.0
    c1: float = 1.0
    u1: float = 1.0
    T: int = 100
    J: int = 30
    alpha0: float | None = None          # None: calibrate per (epsilon, delta, seed)
    R: float = 1.0
    # Default scale for the objective's Lipschitz constant. Only the ratio
    # alpha0/L reaches the inner step size (calibration cancels R), so L is
    # the one free dynamics knob; 2.5 keeps every calibrated operating point
    # in the default grid numerically stable with the best tracking measured
    # across L in [1, 5] (below ~2 the widest-step cells overflow).
    L: float = 2.5
    epsilons: tuple[float, ...] = (0.15, 0.95)
    deltas: tuple[float, ...] = (1e-3, 1e-6)
    num_outer: int = 200
    seeds: tuple[int, ...] = tuple(range(20))
    out_dir: str = "out"
    workers: int = 1
    oracle_tol: float = 1e-10

    def graph(self) -> Graph:
        return build_graph(self.num_agents, self.edges)

    def problem(self) -> ErmProblem:
        return ErmProblem(eta=self.eta, c1=self.c1, num_agents=self.num_agents)

    def zo(self, alpha0: float) -> ZoConfig:
        return ZoConfig(
            u1=self.u1, T=self.T, J=self.J, alpha0=alpha0, P=self.p,
            R_bound=self.R, L_lipschitz=self.L,
        )


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


_SECTION_KEYS = {
    "graph": {"num_agents", "edges"},
    "data": {"samples_per_agent", "p", "noise_std"},
    "problem": {"eta", "rho", "c1"},
    "zo": {"u1", "T", "J", "alpha0", "R", "L"},
    "privacy": {"epsilons", "deltas"},
    "run": {"num_outer", "seeds", "out_dir", "workers", "oracle_tol"},
}


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from a nested mapping, defaulting absent entries."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    unknown_sections = set(raw) - set(_SECTION_KEYS)
    if unknown_sections:
        raise ConfigError(f"unknown config sections: {sorted(unknown_sections)}")
    values: dict = {}
    for section, keys in _SECTION_KEYS.items():
        body = raw.get(section, {}) or {}
        if not isinstance(body, dict):
            raise ConfigError(f"section '{section}' must be a mapping")
        unknown = set(body) - keys
        if unknown:
            raise ConfigError(f"unknown keys in '{section}': {sorted(unknown)}")
        values.update(body)
    if "edges" in values:
        values["edges"] = tuple(tuple(int(v) for v in e) for e in values["edges"])
    for tup_key in ("epsilons", "deltas", "seeds"):
        if tup_key in values:
            values[tup_key] = tuple(values[tup_key])
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def config_from_file(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(raw or {})


def config_to_yaml(cfg: ExperimentConfig) -> str:
    nested = {
        "graph": {"num_agents": cfg.num_agents, "edges": [list(e) for e in cfg.edges]},
        "data": {
            "samples_per_agent": cfg.samples_per_agent,
            "p": cfg.p,
            "noise_std": cfg.noise_std,
        },
        "problem": {"eta": cfg.eta, "rho": cfg.rho, "c1": cfg.c1},
        "zo": {
            "u1": cfg.u1, "T": cfg.T, "J": cfg.J,
            "alpha0": cfg.alpha0, "R": cfg.R, "L": cfg.L,
        },
        "privacy": {"epsilons": list(cfg.epsilons), "deltas": list(cfg.deltas)},
        "run": {
            "num_outer": cfg.num_outer,
            "seeds": list(cfg.seeds),
            "out_dir": cfg.out_dir,
            "workers": cfg.workers,
            "oracle_tol": cfg.oracle_tol,
        },
    }
    return yaml.safe_dump(nested, sort_keys=True)


def calibrate_alpha0(
    zo: ZoConfig,
    epsilon: float,
    delta: float,
    c1: float,
    rho: float,
    nk: int,
    n_samples: int,
    beta_c_norm: float = 0.0,
    c: float = ESTIMATOR_CONSTANT,
) -> float:
    """Invert the intrinsic-epsilon relation for the step-size factor.

        alpha0^2 = (ln 2P / (c R^2)) *
            (2.1 c1^2 J P ln(1.25/delta) / (rho nk N_k eps)^2-style term
             + 4 ||beta_c||^2 / T) / (s1 (1 + ln P) + s2)

    so that epsilon_intrinsic at the result equals the target exactly.
    Calibrating with the minimum degree as nk makes every agent at least
    as private as the target.
    """
    if not (0.0 < epsilon <= 1.0):
        raise Infeasible(f"target epsilon must lie in (0, 1], got {epsilon}")
    if zo.R_bound is None:
        raise Infeasible("calibration needs a concrete R_bound")
    s1, s2 = _harmonic_sums(zo.T)
    numerator = (
        2.1 * c1**2 * zo.J * zo.P * np.log(1.25 / delta)
        / (rho**2 * nk**2 * n_samples**2 * epsilon**2)
        + 4.0 * beta_c_norm**2 / zo.T
    )
    alpha_sq = (
        np.log(2 * zo.P) / (c * zo.R_bound**2)
        * numerator / (s1 * (1.0 + np.log(zo.P)) + s2)
    )
    if alpha_sq <= 0.0:
        raise Infeasible(f"calibration produced alpha0^2 = {alpha_sq:.3e}")
    return float(np.sqrt(alpha_sq))


def noisy_admm_baseline(
    problem: ErmProblem,
    dataset: Dataset,
    graph: Graph,
    rho: float,
    num_outer: int,
    sigmas,
    seed: int,
    beta_c: np.ndarray | None = None,
    oracle_tol: float = 1e-10,
) -> OuterTrace:
    """Decentralized ADMM with explicit Gaussian perturbation of each update.

    The contrast class for the intrinsic mechanism: the primal step is the
    exact minimizer plus N(0, sigma_k^2 I_P) noise. sigmas is a scalar or
    one value per agent; zero gives exact decentralized ADMM. Round
    structure and seeding mirror the zeroth-order run.
    """
    from .admm import AgentState, consensus_residual  # local names, same round logic

    if np.isscalar(sigmas):
        sigma_map = {k: float(sigmas) for k in graph.agents}
    else:
        sigma_map = {k: float(s) for k, s in zip(graph.agents, sigmas)}
    if any(s < 0 for s in sigma_map.values()):
        raise ConfigError("baseline noise scales must be nonnegative")

    p = dataset.p
    states = {
        k: AgentState(agent=k, beta=np.zeros(p), gamma=np.zeros(p))
        for k in graph.agents
    }
    betas_trace = np.empty((num_outer, graph.num_agents, p))
    gammas_trace = np.empty((num_outer, graph.num_agents, p))
    residual_trace = np.empty(num_outer)
    error_trace = np.full(num_outer, np.nan)
    objective_trace = np.empty(num_outer)
    if beta_c is not None:
        beta_c = np.asarray(beta_c, dtype=float)
        ref_sq = float(beta_c @ beta_c)
        if ref_sq == 0.0:
            raise ZeroReference("reference solution is zero; normalized error undefined")

    messages = None
    warm: dict[int, np.ndarray] = {}
    for m in range(1, num_outer + 1):
        inboxes = exchange(states, graph)
        if messages is None:
            messages = messages_in(inboxes)
        for k in graph.agents:
            states[k].inbox = inboxes[k]
            states[k].gamma = dual_update(
                states[k], inboxes[k], rho, neighborhood=graph.neighbors(k)
            )
        new_betas = {}
        for k in graph.agents:
            neighbors = [inboxes[k][l] for l in sorted(graph.neighbors(k)) if l != k]
            ctx = make_context(states[k].gamma, states[k].beta, neighbors, rho)
            x_k, y_k = dataset.block(k)
            exact = exact_primal_oracle(
                problem, x_k, y_k, ctx, tol=oracle_tol, x0=warm.get(k)
            )
            warm[k] = exact
            rng = np.random.default_rng([seed, k, m])
            new_betas[k] = exact + rng.normal(0.0, sigma_map[k], p)
        for k in graph.agents:
            states[k].beta = new_betas[k]
            betas_trace[m - 1, k - 1] = states[k].beta
            gammas_trace[m - 1, k - 1] = states[k].gamma
        residual_trace[m - 1] = consensus_residual(new_betas, graph)
        objective_trace[m - 1] = sum(
            float(eval_local_f(problem, *dataset.block(k), states[k].beta))
            for k in graph.agents
        )
        if beta_c is not None:
            diffs = betas_trace[m - 1] - beta_c
            error_trace[m - 1] = float(np.sum(diffs * diffs)) / ref_sq

    meta = {
        "seed": seed,
        "rho": rho,
        "num_outer": num_outer,
        "messages_per_round": messages,
        "sigmas": [sigma_map[k] for k in graph.agents],
    }
    return OuterTrace(
        betas=betas_trace,
        gammas=gammas_trace,
        consensus_residual=residual_trace,
        normalized_error=error_trace,
        objective=objective_trace,
        meta=meta,
    )


def write_trace_csv(path: str, trace: OuterTrace, meta: dict) -> None:
    """Versioned per-run trace: one row per (m, agent)."""
    num_outer, k_count, p = trace.betas.shape
    beta_cols = ",".join(f"beta_{j}" for j in range(p))
    gamma_cols = ",".join(f"gamma_{j}" for j in range(p))
    lines = [
        TRACE_HEADER,
        "# meta " + json.dumps(meta, sort_keys=True),
        f"m,agent,{beta_cols},{gamma_cols},consensus_residual,normalized_error,objective",
    ]
    for m in range(num_outer):
        shared = (
            f"{float(trace.consensus_residual[m])!r},"
            f"{float(trace.normalized_error[m])!r},{float(trace.objective[m])!r}"
        )
        for k in range(k_count):
            beta = ",".join(repr(float(v)) for v in trace.betas[m, k])
            gamma = ",".join(repr(float(v)) for v in trace.gammas[m, k])
            lines.append(f"{m + 1},{k + 1},{beta},{gamma},{shared}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_inner_csv(path: str, trace: OuterTrace) -> None:
    lines = [INNER_HEADER, "m,agent,t,g_norm,f_value"]
    for m, agent, rows in trace.inner_traces:
        for t, g_norm, f_value in rows:
            lines.append(f"{m},{agent},{t},{float(g_norm)!r},{float(f_value)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path: str) -> tuple[dict, list[str], np.ndarray]:
    """(meta, column names, numeric matrix) for a `# dzoa-trace v1` file."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != TRACE_HEADER:
        raise ConfigError(f"{path}: missing '{TRACE_HEADER}' header")
    meta: dict = {}
    body_start = 1
    for i, ln in enumerate(lines[1:], start=1):
        if ln.startswith("# meta "):
            meta = json.loads(ln[len("# meta "):])
        elif not ln.startswith("#"):
            body_start = i
            break
    columns = lines[body_start].split(",")
    data = np.array(
        [[float(v) for v in ln.split(",")] for ln in lines[body_start + 1:] if ln],
        dtype=float,
    )
    return meta, columns, data


def final_normalized_error(path: str) -> float:
    _, columns, data = read_trace_csv(path)
    return float(data[-1, columns.index("normalized_error")])


def _trace_filename(method: str, epsilon: float, delta: float, seed: int) -> str:
    return f"{method}_eps{epsilon:g}_delta{delta:g}_seed{seed}.csv"


def _prepare_instance(cfg: ExperimentConfig, seed: int):
    """Synthesize, normalize, and solve the centralized reference for one seed."""
    dataset, _ = synthesize_data(
        cfg.num_agents, cfg.samples_per_agent, cfg.p, cfg.noise_std, seed
    )
    dataset = normalize_data(dataset)
    beta_c = consensus_reference(cfg.problem(), dataset, tol=cfg.oracle_tol)
    return dataset, beta_c


def _run_cell(cfg: ExperimentConfig, method: str, epsilon: float, delta: float,
              seed: int, trace_inner: bool = False) -> dict:
    """One (method, epsilon, delta, seed) job; writes the trace CSV."""
    run_id = f"{method} eps={epsilon:g} delta={delta:g} seed={seed}"
    try:
        graph = cfg.graph()
        problem = cfg.problem()
        dataset, beta_c = _prepare_instance(cfg, seed)
        bc_norm = float(np.linalg.norm(beta_c))
        nk_min = min(graph.degree(k) for k in graph.agents)
        if cfg.alpha0 is not None:
            alpha0 = cfg.alpha0
        else:
            alpha0 = calibrate_alpha0(
                cfg.zo(1.0), epsilon, delta, cfg.c1, cfg.rho,
                nk_min, cfg.samples_per_agent, beta_c_norm=bc_norm,
            )
        zo = cfg.zo(alpha0)
        report = accountant_report(
            graph, cfg.samples_per_agent, epsilon, delta, cfg.num_outer,
            zo, cfg.c1, cfg.rho, beta_c_norm=bc_norm,
        )
        if method == "dzoa":
            trace = run_dzoa(
                problem, dataset, graph, zo, cfg.rho, cfg.num_outer, seed,
                beta_c=beta_c, oracle_tol=cfg.oracle_tol,
                collect_inner_traces=trace_inner,
            )
        elif method == "baseline":
            sigmas = [
                sigma_for(epsilon, delta, cfg.c1, cfg.rho, graph.degree(k),
                          cfg.samples_per_agent)
                for k in graph.agents
            ]
            trace = noisy_admm_baseline(
                problem, dataset, graph, cfg.rho, cfg.num_outer, sigmas, seed,
                beta_c=beta_c, oracle_tol=cfg.oracle_tol,
            )
        else:
            raise ConfigError(f"unknown method '{method}'")
        meta = {
            "method": method,
            "epsilon": epsilon,
            "delta": delta,
            "seed": seed,
            "alpha0": alpha0,
            "beta_c_norm": bc_norm,
            "config": {
                "num_agents": cfg.num_agents,
                "edges": [list(e) for e in cfg.edges],
                "samples_per_agent": cfg.samples_per_agent,
                "p": cfg.p,
                "noise_std": cfg.noise_std,
                "eta": cfg.eta,
                "rho": cfg.rho,
                "c1": cfg.c1,
                "u1": cfg.u1,
                "T": cfg.T,
                "J": cfg.J,
                "R": cfg.R,
                "L": cfg.L,
                "num_outer": cfg.num_outer,
            },
            "accountant": dataclasses.asdict(report),
            "run_meta": {
                k: v for k, v in trace.meta.items() if k != "zo"
            },
        }
        os.makedirs(cfg.out_dir, exist_ok=True)
        filename = _trace_filename(method, epsilon, delta, seed)
        path = os.path.join(cfg.out_dir, filename)
        write_trace_csv(path, trace, meta)
        if trace_inner and trace.inner_traces:
            write_inner_csv(path.replace(".csv", "_inner.csv"), trace)
        return {
            "method": method,
            "epsilon": epsilon,
            "delta": delta,
            "seed": seed,
            "alpha0": alpha0,
            "trace_file": filename,
        }
    except DzoaError as exc:
        raise type(exc)(f"[{run_id}] {exc}") from exc


def _execute_cells(cfg: ExperimentConfig, cells: list[tuple], trace_inner: bool) -> list[dict]:
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(_run_cell, cfg, *cell, trace_inner) for cell in cells
            ]
            rows = [f.result() for f in futures]
    else:
        rows = [_run_cell(cfg, *cell, trace_inner) for cell in cells]
    return rows


@dataclass
class ExperimentResult:
    rows: list[dict]
    trace_paths: list[str]
    aggregate_path: str


def run_experiment(cfg: ExperimentConfig, trace_inner: bool = False) -> ExperimentResult:
    """Zeroth-order runs over the full (epsilon, delta, seed) grid.

    Writes one trace CSV per run and a per-run summary CSV (`runs.csv`)
    whose final-state columns are read back from the trace files, so the
    summary can never drift from the raw outputs.
    """
    cells = [
        ("dzoa", eps, delta, seed)
        for eps in cfg.epsilons for delta in cfg.deltas for seed in cfg.seeds
    ]
    rows = _execute_cells(cfg, cells, trace_inner)
    lines = [
        RUNS_HEADER,
        "method,epsilon,delta,seed,alpha0,final_error,final_residual,final_objective,trace_file",
    ]
    paths = []
    for row in rows:
        path = os.path.join(cfg.out_dir, row["trace_file"])
        paths.append(path)
        _, columns, data = read_trace_csv(path)
        final = data[-1]
        lines.append(
            f"{row['method']},{row['epsilon']!r},{row['delta']!r},{row['seed']},"
            f"{row['alpha0']!r},{float(final[columns.index('normalized_error')])!r},"
            f"{float(final[columns.index('consensus_residual')])!r},"
            f"{float(final[columns.index('objective')])!r},{row['trace_file']}"
        )
    aggregate = os.path.join(cfg.out_dir, "runs.csv")
    with open(aggregate, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return ExperimentResult(rows=rows, trace_paths=paths, aggregate_path=aggregate)


def sweep(cfg: ExperimentConfig) -> str:
    """Privacy-accuracy table over both methods; returns the sweep CSV path.

    Runs dzoa and the explicit-noise baseline on the full grid, then
    aggregates mean/stderr of the final normalized error per cell by
    reading the per-run trace files back.
    """
    cells = [
        (method, eps, delta, seed)
        for method in ("dzoa", "baseline")
        for eps in cfg.epsilons for delta in cfg.deltas for seed in cfg.seeds
    ]
    rows = _execute_cells(cfg, cells, trace_inner=False)
    lines = [
        SWEEP_HEADER,
        "method,epsilon,delta,epsilon_bar,mean_final_error,stderr_final_error,n_seeds",
    ]
    for method in ("dzoa", "baseline"):
        for eps in cfg.epsilons:
            for delta in cfg.deltas:
                errors = [
                    final_normalized_error(os.path.join(cfg.out_dir, r["trace_file"]))
                    for r in rows
                    if r["method"] == method and r["epsilon"] == eps and r["delta"] == delta
                ]
                arr = np.array(errors)
                mean = float(arr.mean())
                stderr = (
                    float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
                )
                eps_bar = total_epsilon(eps, delta, cfg.num_outer)
                lines.append(
                    f"{method},{eps!r},{delta!r},{eps_bar!r},{mean!r},{stderr!r},{len(arr)}"
                )
    path = os.path.join(cfg.out_dir, "sweep.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
