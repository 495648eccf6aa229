"""The distributed zeroth-order ADMM outer loop and its exact-update oracles.

Each outer iteration m is bulk-synchronous: agents share their previous
iterates, fold the disagreement into their duals, then independently run
the zeroth-order inner loop on their augmented objectives. The coupling
cardinality nk is the graph degree |N_k \\ {k}| — the convention under
which the per-agent updates reassemble exactly into the stacked recursion

    find w:  grad f(w) + gamma_prev + 2 rho H w = rho Lplus w_prev
    gamma  = gamma_prev + rho Lminus w

(the matrix form implemented by matrix_form_step, used as ground truth in
tests). The exact primal minimizer beta-breve is never used by the
distributed algorithm itself; it exists so tests and the accountant can
measure the intrinsic perturbation beta - beta-breve that the privacy
analysis rides on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ._prox import fista_l1
from .errors import DimensionMismatch, IncompleteInbox, ZeroReference
from .problem import (
    Dataset,
    ErmProblem,
    LocalAugmentedContext,
    eval_local_f,
    make_context,
    make_local_objective,
)
from .topology import ConsensusMatrices, Graph
from .zeroth_order import InnerLoopResult, ZoConfig, inner_loop, resolve_radius

NK_CONVENTION = "degree"  # |N_k \ {k}|; resolved against the matrix recursion


@dataclass
class AgentState:
    """One agent's local view: its iterate, dual, and current-round inbox."""

    agent: int
    beta: np.ndarray
    gamma: np.ndarray
    inbox: dict[int, np.ndarray] | None = None


def exchange(states: Mapping[int, AgentState], graph: Graph) -> dict[int, dict[int, np.ndarray]]:
    """One communication round: each agent receives beta_l for all l in N_k.

    Only neighbor-to-neighbor transfer is modeled; values are copied so an
    agent can never mutate another's state. The own iterate rides along
    (N_k includes k), so the per-round transfer count is
    sum_k (|N_k| - 1) = 2E.
    """
    inboxes: dict[int, dict[int, np.ndarray]] = {}
    for k in graph.agents:
        inboxes[k] = {l: states[l].beta.copy() for l in sorted(graph.neighbors(k))}
    return inboxes


def messages_in(inboxes: dict[int, dict[int, np.ndarray]]) -> int:
    """Number of actual transfers in a round (self-deliveries excluded)."""
    return sum(len(inbox) - 1 for inbox in inboxes.values())


def dual_update(
    state: AgentState,
    neighbor_betas: Mapping[int, np.ndarray],
    rho: float,
    neighborhood=None,
) -> np.ndarray:
    """gamma_k + rho * sum_{l in N_k} (beta_k - beta_l); the self term is zero.

    When `neighborhood` is given, the inbox must cover it.
    """
    expected = set(neighborhood) if neighborhood is not None else set(neighbor_betas)
    missing = expected - set(neighbor_betas)
    if missing:
        raise IncompleteInbox(
            f"agent {state.agent} missing messages from {sorted(missing)}"
        )
    total = np.zeros_like(state.beta)
    for l in sorted(expected):
        total = total + (state.beta - neighbor_betas[l])
    return state.gamma + rho * total


def primal_update(
    problem: ErmProblem,
    x_k: np.ndarray,
    y_k: np.ndarray,
    ctx: LocalAugmentedContext,
    zo: ZoConfig,
    rng: np.random.Generator,
    collect_trace: bool = False,
) -> InnerLoopResult:
    """Zeroth-order inner loop on agent k's augmented objective.

    No communication happens here; the context already holds everything
    the agent learned from the exchange.
    """
    objective = make_local_objective(problem, x_k, y_k, ctx)
    cfg = resolve_radius(zo, ctx.beta_prev_self)
    return inner_loop(objective, cfg, rng, collect_trace=collect_trace)


def exact_primal_oracle(
    problem: ErmProblem,
    x_k: np.ndarray,
    y_k: np.ndarray,
    ctx: LocalAugmentedContext,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """The exact augmented minimizer beta-breve (test/analysis oracle only).

    Minimizes F_k by accelerated proximal gradient on its smooth part plus
    the (eta/K) l1 term, to fixed-point residual <= tol. x0 warm-starts the
    solver (the minimizer is unique, so x0 affects cost, not the answer).
    """
    n_k, p = x_k.shape
    gram = (2.0 / n_k) * (x_k.T @ x_k)
    cross = (2.0 / n_k) * (x_k.T @ y_k)
    linear = ctx.gamma - ctx.rho * ctx.coupling()
    quad = 2.0 * ctx.rho * ctx.nk

    def grad(beta):
        return gram @ beta - cross + linear + quad * beta

    lipschitz = float(np.linalg.eigvalsh(gram).max()) + quad
    l1_weight = problem.eta / problem.num_agents
    start = np.zeros(p) if x0 is None else np.asarray(x0, dtype=float).copy()
    return fista_l1(grad, lipschitz, l1_weight, start, tol, max_iter)


def matrix_form_step(
    w_prev: np.ndarray,
    gamma_prev: np.ndarray,
    matrices: ConsensusMatrices,
    problem: ErmProblem,
    dataset: Dataset,
    rho: float,
    tol: float = 1e-12,
    max_iter: int = 200_000,
) -> tuple[np.ndarray, np.ndarray]:
    """One exact step of the stacked recursion: primal solve, then dual.

    Ground truth for the per-agent updates. The smooth gradient is
    assembled from the actual H and Lplus matrices and the dual step from
    Lminus, so agreement with the local route checks the block algebra
    rather than restating it.
    """
    p = matrices.p
    k_count = matrices.graph.num_agents
    dim = k_count * p
    if w_prev.shape != (dim,) or gamma_prev.shape != (dim,):
        raise DimensionMismatch(f"stacked state must have shape ({dim},)")
    if dataset.num_agents != k_count or dataset.p != p:
        raise DimensionMismatch("dataset does not match the matrices' dimensions")

    grams, crosses = [], []
    for k in range(1, k_count + 1):
        x_k, y_k = dataset.block(k)
        grams.append((2.0 / x_k.shape[0]) * (x_k.T @ x_k))
        crosses.append((2.0 / x_k.shape[0]) * (x_k.T @ y_k))
    coupling = rho * (matrices.l_plus @ w_prev)

    def grad(w):
        out = np.empty_like(w)
        for k in range(k_count):
            block = slice(k * p, (k + 1) * p)
            out[block] = grams[k] @ w[block] - crosses[k]
        return out + gamma_prev + 2.0 * rho * (matrices.h @ w) - coupling

    data_lipschitz = max(float(np.linalg.eigvalsh(g).max()) for g in grams)
    lipschitz = data_lipschitz + 2.0 * rho * float(np.linalg.eigvalsh(matrices.h).max())
    l1_weight = problem.eta / problem.num_agents
    w_exact = fista_l1(grad, lipschitz, l1_weight, np.zeros(dim), tol, max_iter)
    gamma_next = gamma_prev + rho * (matrices.l_minus @ w_exact)
    return w_exact, gamma_next


@dataclass
class OuterTrace:
    """Per-iteration record of a run; arrays are indexed by m-1.

    normalized_error is NaN-filled when no reference solution was given.
    exact_betas holds the per-context exact minimizers when tracking was
    requested (used by the analysis experiments, never by the algorithm).
    """

    betas: np.ndarray                 # (M, K, P)
    gammas: np.ndarray                # (M, K, P)
    consensus_residual: np.ndarray    # (M,)
    normalized_error: np.ndarray      # (M,)
    objective: np.ndarray             # (M,)
    meta: dict
    exact_betas: np.ndarray | None = None
    inner_traces: tuple = ()

    def __post_init__(self):
        m = self.betas.shape[0]
        lengths = {
            self.gammas.shape[0],
            self.consensus_residual.shape[0],
            self.normalized_error.shape[0],
            self.objective.shape[0],
        }
        if lengths != {m}:
            raise DimensionMismatch("trace arrays must all have length M")


def consensus_residual(betas: Mapping[int, np.ndarray], graph: Graph) -> float:
    """sum_k sum_{l in N_k} ||beta_k - beta_l||^2 (each edge counted twice)."""
    total = 0.0
    for k in graph.agents:
        for l in graph.neighbors(k):
            diff = betas[k] - betas[l]
            total += float(diff @ diff)
    return total


def run(
    problem: ErmProblem,
    dataset: Dataset,
    graph: Graph,
    zo: ZoConfig,
    rho: float,
    num_outer: int,
    seed: int,
    beta_c: np.ndarray | None = None,
    track_exact: bool = False,
    oracle_tol: float = 1e-10,
    collect_inner_traces: bool = False,
) -> OuterTrace:
    """Run D-ZOA for `num_outer` rounds from the all-zeros state.

    Round order follows the algorithm listing: share beta^(m-1), fold the
    disagreement into gamma, then run the inner loops. (The recursion in
    matrix form updates the primal first; the two orderings produce the
    same beta trajectory because the first dual increment from the zero
    state vanishes — the dual sequences are index-shifted copies.)

    Each agent's inner loop at round m draws from an independent stream
    seeded by (seed, agent, m), so results are reproducible and
    independent of agent scheduling; with track_exact the per-context
    minimizers land in exact_betas.
    """
    if num_outer < 1:
        raise DimensionMismatch(f"need at least one outer iteration, got {num_outer}")
    if dataset.num_agents != graph.num_agents or dataset.p != zo.P:
        raise DimensionMismatch("dataset, graph, and zo dimensions disagree")
    if problem.num_agents != graph.num_agents:
        raise DimensionMismatch("problem.num_agents does not match the graph")
    k_count = graph.num_agents
    p = dataset.p
    states = {
        k: AgentState(agent=k, beta=np.zeros(p), gamma=np.zeros(p))
        for k in graph.agents
    }

    betas_trace = np.empty((num_outer, k_count, p))
    gammas_trace = np.empty((num_outer, k_count, p))
    residual_trace = np.empty(num_outer)
    error_trace = np.full(num_outer, np.nan)
    objective_trace = np.empty(num_outer)
    exact_trace = np.empty((num_outer, k_count, p)) if track_exact else None
    inner_traces: list[tuple[int, int, tuple]] = []
    warm: dict[int, np.ndarray] = {}

    if beta_c is not None:
        beta_c = np.asarray(beta_c, dtype=float)
        ref_sq = float(beta_c @ beta_c)
        if ref_sq == 0.0:
            raise ZeroReference("reference solution is zero; normalized error undefined")

    messages_per_round = None
    for m in range(1, num_outer + 1):
        inboxes = exchange(states, graph)
        if messages_per_round is None:
            messages_per_round = messages_in(inboxes)
        for k in graph.agents:
            states[k].inbox = inboxes[k]
            states[k].gamma = dual_update(
                states[k], inboxes[k], rho, neighborhood=graph.neighbors(k)
            )
        new_betas: dict[int, np.ndarray] = {}
        for k in graph.agents:
            neighbors = [
                inboxes[k][l] for l in sorted(graph.neighbors(k)) if l != k
            ]
            ctx = make_context(states[k].gamma, states[k].beta, neighbors, rho)
            x_k, y_k = dataset.block(k)
            rng = np.random.default_rng([seed, k, m])
            result = primal_update(
                problem, x_k, y_k, ctx, zo, rng, collect_trace=collect_inner_traces
            )
            new_betas[k] = result.final
            if collect_inner_traces:
                inner_traces.append((m, k, result.trace))
            if track_exact:
                exact_trace[m - 1, k - 1] = exact_primal_oracle(
                    problem, x_k, y_k, ctx, tol=oracle_tol, x0=warm.get(k)
                )
                warm[k] = exact_trace[m - 1, k - 1]
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
        "nk_convention": NK_CONVENTION,
        "messages_per_round": messages_per_round,
        "zo": {
            "u1": zo.u1, "T": zo.T, "J": zo.J, "alpha0": zo.alpha0,
            "P": zo.P, "R_bound": zo.R_bound, "L_lipschitz": zo.L_lipschitz,
        },
    }
    return OuterTrace(
        betas=betas_trace,
        gammas=gammas_trace,
        consensus_residual=residual_trace,
        normalized_error=error_trace,
        objective=objective_trace,
        meta=meta,
        exact_betas=exact_trace,
        inner_traces=tuple(inner_traces),
    )
