"""Ground truth and analytic bounds: centralized lasso, error metric, rates.

The distributed iterates are judged against the centralized solution

    beta_c = argmin ||X beta - y||^2 + eta ||beta||_1

(note: no 1/N on the quadratic), solved here by the shared accelerated
proximal-gradient routine with a brute-force grid verifier for tiny
instances. The bound calculators price the two layers of the method: the
outer recursion (1/M transient plus a constant privacy floor) and the
inner zeroth-order loop (sqrt(P/T) with a smoothing tail).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._prox import fista_l1
from .admm import run as run_dzoa
from .errors import DimensionMismatch, DomainError, ZeroReference
from .problem import Dataset, ErmProblem, eval_local_f, normalize_data, synthesize_data
from .topology import Graph, build_matrices
from .zeroth_order import ESTIMATOR_CONSTANT, ZoConfig


def solve_lasso_centralized(
    X: np.ndarray, y: np.ndarray, eta: float, tol: float = 1e-10, max_iter: int = 200_000
) -> np.ndarray:
    """Minimize ||X beta - y||^2 + eta ||beta||_1 to fixed-point residual tol."""
    if eta < 0:
        raise DomainError(f"eta must be nonnegative, got {eta}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    gram = 2.0 * (X.T @ X)
    cross = 2.0 * (X.T @ y)

    def grad(beta):
        return gram @ beta - cross

    lipschitz = max(float(np.linalg.eigvalsh(gram).max()), 1e-12)
    return fista_l1(grad, lipschitz, eta, np.zeros(X.shape[1]), tol, max_iter)


def brute_force_lasso(
    X: np.ndarray,
    y: np.ndarray,
    eta: float,
    box_half: float = 2.0,
    resolution: float = 1e-3,
) -> np.ndarray:
    """Exhaustive grid minimizer for P <= 2; the solver's independent check.

    Scans [-box_half, box_half]^P at the given resolution, one row slab at
    a time so memory stays flat.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p = X.shape[1]
    if p > 2:
        raise DimensionMismatch("brute force is only meant for P <= 2")
    axis = np.arange(-box_half, box_half + resolution / 2, resolution)
    gram = X.T @ X
    cross = X.T @ y
    y_sq = float(y @ y)
    if p == 1:
        vals = gram[0, 0] * axis**2 - 2.0 * cross[0] * axis + y_sq + eta * np.abs(axis)
        return np.array([axis[int(np.argmin(vals))]])
    best_val = np.inf
    best = np.zeros(2)
    b2 = axis
    b2_sq_term = gram[1, 1] * b2**2 - 2.0 * cross[1] * b2 + eta * np.abs(b2)
    for b1 in axis:
        vals = (
            gram[0, 0] * b1**2
            + 2.0 * gram[0, 1] * b1 * b2
            + b2_sq_term
            - 2.0 * cross[0] * b1
            + eta * abs(b1)
            + y_sq
        )
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val = float(vals[j])
            best = np.array([b1, b2[j]])
    return best


def consensus_reference(
    problem: ErmProblem,
    dataset: Dataset,
    tol: float = 1e-10,
    max_iter: int = 200_000,
) -> np.ndarray:
    """Minimizer of the network's summed objective, via the centralized solver.

    Each agent's data term carries a 1/N_k weight, so the stacked design is
    rescaled block-wise by 1/sqrt(N_k) first; the K slices of the eta/K
    regularizer recombine to a plain eta. The result is the point every
    exact consensus run drives the agents toward, and the reference for
    the normalized-error metric.
    """
    x_rows = []
    y_rows = []
    for k in range(1, dataset.num_agents + 1):
        x_k, y_k = dataset.block(k)
        scale = 1.0 / np.sqrt(x_k.shape[0])
        x_rows.append(x_k * scale)
        y_rows.append(y_k * scale)
    x_tilde = np.vstack(x_rows)
    y_tilde = np.concatenate(y_rows)
    return solve_lasso_centralized(x_tilde, y_tilde, problem.eta, tol=tol,
                                   max_iter=max_iter)


def normalized_error(betas, beta_c: np.ndarray) -> float:
    """sum_k ||beta_k - beta_c||^2 / ||beta_c||^2."""
    beta_c = np.asarray(beta_c, dtype=float)
    ref_sq = float(beta_c @ beta_c)
    if ref_sq == 0.0:
        raise ZeroReference("reference solution is zero; normalized error undefined")
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    diffs = betas - beta_c
    return float(np.sum(diffs * diffs)) / ref_sq


def consensus_objective(problem: ErmProblem, dataset: Dataset, betas) -> float:
    """f(w) = sum_k f_k(beta_k) at a stacked state (K, P)."""
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    return sum(
        float(eval_local_f(problem, *dataset.block(k), betas[k - 1]))
        for k in range(1, dataset.num_agents + 1)
    )


@dataclass(frozen=True)
class BoundInputs:
    """Constants entering the outer-recursion bound."""

    q0_minus_q_g_sq: float
    num_outer: int
    rho: float
    c1: float
    p: int
    nk: int
    n_samples: int
    epsilon: float
    delta: float
    lambda_max_lplus: float
    lambda_min_nonzero_lminus: float

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise DomainError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        positives = (
            self.num_outer, self.rho, self.c1, self.p, self.nk, self.n_samples,
            self.delta, self.lambda_max_lplus, self.lambda_min_nonzero_lminus,
        )
        if any(v <= 0 for v in positives) or self.q0_minus_q_g_sq < 0:
            raise DomainError("bound inputs must be positive")


def theorem3_bound(b: BoundInputs) -> float:
    """Transient term plus the constant privacy floor:

        ||q0 - q||_G^2 / M
        + 2.1 c1^2 P rho ln(1.25/delta) lambda_max^2(L+)
          / (2 rho^2 nk^2 N_k^2 eps^2 lambda_min(L-)).
    """
    floor = (
        2.1 * b.c1**2 * b.p * b.rho * np.log(1.25 / b.delta) * b.lambda_max_lplus**2
    ) / (
        2.0 * b.rho**2 * b.nk**2 * b.n_samples**2 * b.epsilon**2
        * b.lambda_min_nonzero_lminus
    )
    return float(b.q0_minus_q_g_sq / b.num_outer + floor)


def inner_bound(cfg: ZoConfig, t_steps: int | None = None) -> float:
    """Expected optimality gap of the averaged inner iterate after T steps:

        c * (R L sqrt(P) / sqrt(T)) *
            (max(alpha0, 1/alpha0) sqrt(ln 2P) + u1 ln(2T)/sqrt(T)),  c = 0.5.
    """
    t_steps = cfg.T if t_steps is None else t_steps
    if t_steps < 1:
        raise DomainError(f"need T >= 1, got {t_steps}")
    if cfg.R_bound is None:
        raise DomainError("R_bound unresolved; inner bound needs a concrete R")
    lead = (
        ESTIMATOR_CONSTANT
        * cfg.R_bound * cfg.L_lipschitz * np.sqrt(cfg.P) / np.sqrt(t_steps)
    )
    inside = max(cfg.alpha0, 1.0 / cfg.alpha0) * np.sqrt(np.log(2 * cfg.P)) + (
        cfg.u1 * np.log(2 * t_steps) / np.sqrt(t_steps)
    )
    return float(lead * inside)


@dataclass(frozen=True)
class GapRow:
    """One (M, seed) cell of the gap-vs-M experiment."""

    num_outer: int
    seed: int
    gap: float
    q0_term: float
    bound: float


def gap_vs_M_experiment(
    problem: ErmProblem,
    graph: Graph,
    zo: ZoConfig,
    rho: float,
    outer_counts,
    seeds,
    samples_per_agent: int,
    noise_std: float,
    epsilon: float,
    delta: float,
    oracle_tol: float = 1e-10,
) -> list[GapRow]:
    """Measure f(w_hat^(M)) - f(w*) against the outer-recursion bound.

    One run at max(outer_counts) per seed tracks the exact per-context
    minimizers; prefix averages then give every smaller M for free (the
    per-(agent, m) seeding makes this identical to separate runs). The
    bound uses the worst-case (minimum-degree) agent and the measured
    ||q0 - q||_G^2 = (rho/2) w*' L+ w* (zero start, r pinned at 0).
    """
    counts = sorted(set(int(m) for m in outer_counts))
    if counts[0] < 1:
        raise DomainError("outer_counts must be >= 1")
    matrices = build_matrices(graph, zo.P)
    nk_min = min(graph.degree(k) for k in graph.agents)
    rows: list[GapRow] = []
    for seed in seeds:
        dataset, _ = synthesize_data(
            graph.num_agents, samples_per_agent, zo.P, noise_std, seed
        )
        dataset = normalize_data(dataset)
        beta_c = consensus_reference(problem, dataset, tol=oracle_tol)
        w_star = np.tile(beta_c, graph.num_agents)
        q0_term = 0.5 * rho * float(w_star @ (matrices.l_plus @ w_star))
        f_star = consensus_objective(
            problem, dataset, np.tile(beta_c, (graph.num_agents, 1))
        )
        trace = run_dzoa(
            problem, dataset, graph, zo, rho, counts[-1], seed,
            beta_c=beta_c, track_exact=True, oracle_tol=oracle_tol,
        )
        prefix = np.cumsum(trace.exact_betas, axis=0)
        for m in counts:
            w_hat = prefix[m - 1] / m
            gap = consensus_objective(problem, dataset, w_hat) - f_star
            bound = theorem3_bound(BoundInputs(
                q0_minus_q_g_sq=q0_term,
                num_outer=m,
                rho=rho,
                c1=problem.c1,
                p=zo.P,
                nk=nk_min,
                n_samples=min(dataset.samples_per_agent),
                epsilon=epsilon,
                delta=delta,
                lambda_max_lplus=matrices.lambda_max_lplus,
                lambda_min_nonzero_lminus=matrices.lambda_min_nonzero_lminus,
            ))
            rows.append(GapRow(num_outer=m, seed=seed, gap=gap, q0_term=q0_term, bound=bound))
    return rows
