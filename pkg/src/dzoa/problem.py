"""Regularized ERM problem: data synthesis, normalization, local objectives.

The global objective splits across agents as

    f(w) = sum_k f_k(beta_k),
    f_k(beta) = (1/N_k) ||X_k beta - y_k||^2 + (eta/K) ||beta||_1,

so that summing the local objectives at consensus recovers the centralized
lasso. The augmented local objective F_k adds the dual and quadratic
coupling terms whose stationarity condition gives the exact ADMM primal
update; the zeroth-order inner loop only ever sees its values.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GradientBoundExceeded, ZeroColumn

DATASET_HEADER = "# dzoa-dataset v1"


@dataclass
class Dataset:
    """Per-agent design blocks X_k (N_k x P) and responses y_k (N_k,)."""

    x_blocks: tuple[np.ndarray, ...]
    y_blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.x_blocks) != len(self.y_blocks):
            raise DimensionMismatch("X and y block counts differ")
        p = self.x_blocks[0].shape[1]
        for x, y in zip(self.x_blocks, self.y_blocks):
            if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
                raise DimensionMismatch("agent block shapes inconsistent")
            if x.shape[1] != p:
                raise DimensionMismatch("feature count differs across agents")

    @property
    def num_agents(self) -> int:
        return len(self.x_blocks)

    @property
    def p(self) -> int:
        return self.x_blocks[0].shape[1]

    @property
    def samples_per_agent(self) -> tuple[int, ...]:
        return tuple(x.shape[0] for x in self.x_blocks)

    @property
    def total_samples(self) -> int:
        return sum(self.samples_per_agent)

    def block(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(X_k, y_k) for agent k in 1..K."""
        return self.x_blocks[k - 1], self.y_blocks[k - 1]

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, y) stacked over agents, shape (N, P) and (N,)."""
        return np.vstack(self.x_blocks), np.concatenate(self.y_blocks)


def synthesize_data(
    num_agents: int,
    samples_per_agent: int,
    p: int,
    noise_std: float,
    seed: int,
) -> tuple[Dataset, np.ndarray]:
    """Draw a synthetic regression instance.

    X entries are i.i.d. standard normal; y = X omega + psi with
    omega ~ N(0, I_P) and psi ~ N(0, noise_std^2 I_N). Deterministic in
    `seed`. Returns (dataset, omega).
    """
    if num_agents < 1 or samples_per_agent < 1 or p < 1:
        raise DimensionMismatch("dimensions must be positive")
    rng = np.random.default_rng(seed)
    total = num_agents * samples_per_agent
    x = rng.standard_normal((total, p))
    omega = rng.standard_normal(p)
    psi = noise_std * rng.standard_normal(total)
    y = x @ omega + psi
    x_blocks = tuple(
        x[k * samples_per_agent : (k + 1) * samples_per_agent] for k in range(num_agents)
    )
    y_blocks = tuple(
        y[k * samples_per_agent : (k + 1) * samples_per_agent] for k in range(num_agents)
    )
    return Dataset(x_blocks=x_blocks, y_blocks=y_blocks), omega


def normalize_data(dataset: Dataset) -> Dataset:
    """Rescale the stacked design: columns to max entry 1, then rows to norm < 1.

    Column j is divided by its maximum entry; a column whose maximum is not
    positive cannot be scaled that way and raises ZeroColumn. Each row is then
    divided by max(1, ||row|| / (1 - 1e-9)), which leaves short rows alone and
    caps every row norm strictly below 1. Responses are untouched.
    """
    x, _ = dataset.stacked()
    col_max = x.max(axis=0)
    for j, m in enumerate(col_max):
        if m <= 0.0:
            if np.all(x[:, j] == 0.0):
                raise ZeroColumn(f"column {j} is identically zero")
            raise ZeroColumn(f"column {j} has non-positive maximum {m:.3e}")
    x = x / col_max
    row_norms = np.linalg.norm(x, axis=1)
    divisors = np.maximum(1.0, row_norms / (1.0 - 1e-9))
    x = x / divisors[:, None]

    counts = dataset.samples_per_agent
    offsets = np.concatenate(([0], np.cumsum(counts)))
    x_blocks = tuple(x[offsets[k] : offsets[k + 1]] for k in range(dataset.num_agents))
    return Dataset(x_blocks=x_blocks, y_blocks=dataset.y_blocks)


@dataclass(frozen=True)
class ErmProblem:
    """Least-squares loss with an l1 regularizer split across K agents.

    eta is the regularization weight of the *global* objective; each local
    objective carries eta/K. c1 is the configured per-sample gradient bound
    used by the privacy accounting (validated separately, never enforced
    silently).
    """

    eta: float
    c1: float
    num_agents: int
    loss: str = "squared"
    regularizer: str = "l1"

    def __post_init__(self):
        # eta = 0 is allowed so the exact solvers cover the pure
        # least-squares case; c1 has no meaningful zero.
        if self.eta < 0 or self.c1 <= 0 or self.num_agents < 1:
            raise DimensionMismatch("eta must be >= 0, c1 > 0, K >= 1")
        if self.loss != "squared" or self.regularizer != "l1":
            raise DimensionMismatch(
                f"unsupported problem kind ({self.loss}, {self.regularizer})"
            )


def eval_local_f(
    problem: ErmProblem, x_k: np.ndarray, y_k: np.ndarray, beta: np.ndarray
) -> np.ndarray | float:
    """f_k(beta) = (1/N_k)||X_k beta - y_k||^2 + (eta/K)||beta||_1.

    `beta` may be a single vector (P,) or a batch (..., P); the return
    matches the leading shape.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1] != x_k.shape[1]:
        raise DimensionMismatch(
            f"beta has {beta.shape[-1]} features, X_k has {x_k.shape[1]}"
        )
    residual = beta @ x_k.T - y_k
    loss = np.sum(residual * residual, axis=-1) / x_k.shape[0]
    reg = (problem.eta / problem.num_agents) * np.sum(np.abs(beta), axis=-1)
    out = loss + reg
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LocalAugmentedContext:
    """Everything agent k needs from round m-1 to form its augmented objective.

    beta_prev_neighbors holds the neighbors' previous iterates excluding the
    agent's own (the self iterate sits in beta_prev_self). nk is the coupling
    cardinality; under the matrix-consistent convention it equals the graph
    degree len(beta_prev_neighbors), but it stays an explicit field so the
    competing convention can be exercised by tests.
    """

    gamma: np.ndarray
    beta_prev_self: np.ndarray
    beta_prev_neighbors: tuple[np.ndarray, ...]
    rho: float
    nk: int

    def __post_init__(self):
        if self.nk < 1:
            raise DimensionMismatch(f"nk must be >= 1, got {self.nk}")
        if self.rho <= 0:
            raise DimensionMismatch(f"rho must be positive, got {self.rho}")
        p = self.gamma.shape[0]
        vectors = (self.beta_prev_self, *self.beta_prev_neighbors)
        if any(v.shape != (p,) for v in vectors):
            raise DimensionMismatch("context vectors must all have length P")

    def coupling(self) -> np.ndarray:
        """nk * beta_prev_self + sum of neighbor iterates."""
        total = self.nk * self.beta_prev_self
        for b in self.beta_prev_neighbors:
            total = total + b
        return total


def make_context(
    gamma: np.ndarray,
    beta_prev_self: np.ndarray,
    beta_prev_neighbors,
    rho: float,
) -> LocalAugmentedContext:
    """Context with nk set to the graph degree (the resolved convention)."""
    neighbors = tuple(np.asarray(b, dtype=float) for b in beta_prev_neighbors)
    return LocalAugmentedContext(
        gamma=np.asarray(gamma, dtype=float),
        beta_prev_self=np.asarray(beta_prev_self, dtype=float),
        beta_prev_neighbors=neighbors,
        rho=float(rho),
        nk=len(neighbors),
    )


def eval_local_augmented(
    problem: ErmProblem,
    x_k: np.ndarray,
    y_k: np.ndarray,
    ctx: LocalAugmentedContext,
    beta: np.ndarray,
) -> np.ndarray | float:
    """F_k(beta) = f_k(beta) + beta'gamma + rho*nk*||beta||^2 - rho*beta'coupling.

    Batched like eval_local_f.
    """
    beta = np.asarray(beta, dtype=float)
    base = eval_local_f(problem, x_k, y_k, beta)
    linear = beta @ (ctx.gamma - ctx.rho * ctx.coupling())
    quad = ctx.rho * ctx.nk * np.sum(beta * beta, axis=-1)
    out = base + linear + quad
    return float(out) if np.ndim(out) == 0 else out


def make_local_objective(
    problem: ErmProblem, x_k: np.ndarray, y_k: np.ndarray, ctx: LocalAugmentedContext
):
    """Value oracle for F_k with the data terms precomputed.

    Returns a callable mapping (..., P) points to (...) values, agreeing
    with eval_local_augmented to rounding. The inner loop evaluates tens of
    thousands of points per outer iteration, so the least-squares part is
    expanded through the Gram matrix once instead of touching X_k each call.
    """
    n_k = x_k.shape[0]
    gram = (x_k.T @ x_k) / n_k
    cross = (x_k.T @ y_k) / n_k
    y_sq = float(y_k @ y_k) / n_k
    reg_weight = problem.eta / problem.num_agents
    linear = ctx.gamma - ctx.rho * ctx.coupling() - 2.0 * cross
    quad_diag = ctx.rho * ctx.nk

    def objective(beta: np.ndarray):
        beta = np.asarray(beta, dtype=float)
        quad = np.einsum("...i,ij,...j->...", beta, gram, beta)
        value = (
            quad
            + quad_diag * np.sum(beta * beta, axis=-1)
            + beta @ linear
            + reg_weight * np.sum(np.abs(beta), axis=-1)
            + y_sq
        )
        return float(value) if value.ndim == 0 else value

    return objective


@dataclass(frozen=True)
class GradientBoundReport:
    """Measured per-sample loss-gradient bound versus the configured c1."""

    c1: float
    max_norm: float
    agent: int
    sample_index: int
    violated: bool


def gradient_bound_report(
    dataset: Dataset, betas: np.ndarray, c1: float
) -> GradientBoundReport:
    """Measure max ||2 x (x'beta - y)|| over all samples and query points.

    betas: array (B, P) of points to probe (e.g. a unit-ball sample or an
    iterate trajectory). The report records the worst sample; nothing is
    clipped.
    """
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    worst = -1.0
    worst_agent, worst_sample = 0, 0
    for k in range(1, dataset.num_agents + 1):
        x_k, y_k = dataset.block(k)
        residual = betas @ x_k.T - y_k          # (B, N_k)
        sample_norms = np.linalg.norm(x_k, axis=1)
        norms = 2.0 * np.abs(residual) * sample_norms
        flat = int(np.argmax(norms))
        local_max = float(norms.flat[flat])
        if local_max > worst:
            worst = local_max
            worst_agent = k
            worst_sample = flat % x_k.shape[0]
    return GradientBoundReport(
        c1=float(c1),
        max_norm=worst,
        agent=worst_agent,
        sample_index=worst_sample,
        violated=worst > c1,
    )


def assert_gradient_bound(dataset: Dataset, betas: np.ndarray, c1: float) -> GradientBoundReport:
    """gradient_bound_report, raising GradientBoundExceeded on violation."""
    report = gradient_bound_report(dataset, betas, c1)
    if report.violated:
        raise GradientBoundExceeded(
            f"per-sample gradient norm {report.max_norm:.6g} exceeds c1={c1} "
            f"(agent {report.agent}, sample {report.sample_index})",
            report=report,
        )
    return report


def certified_c1(dataset: Dataset, betas: np.ndarray, margin: float = 0.1) -> float:
    """A c1 that covers the probed points: measured max inflated by margin."""
    if margin < 0:
        raise DimensionMismatch(f"margin must be nonnegative, got {margin}")
    report = gradient_bound_report(dataset, betas, c1=np.inf)
    return report.max_norm * (1.0 + margin)


def dataset_to_csv(dataset: Dataset, path: str | None = None) -> str:
    """Serialize row-major with a K / N_k / P header; write to path if given."""
    buf = io.StringIO()
    counts = ",".join(str(n) for n in dataset.samples_per_agent)
    buf.write(f"{DATASET_HEADER}\n")
    buf.write(f"# K={dataset.num_agents} P={dataset.p} N={counts}\n")
    cols = ",".join(f"x_{j}" for j in range(dataset.p))
    buf.write(f"agent,y,{cols}\n")
    for k in range(1, dataset.num_agents + 1):
        x_k, y_k = dataset.block(k)
        for i in range(x_k.shape[0]):
            row = ",".join(repr(float(v)) for v in x_k[i])
            buf.write(f"{k},{float(y_k[i])!r},{row}\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def dataset_from_csv(path: str) -> Dataset:
    """Inverse of dataset_to_csv; reads the file at path."""
    with open(path) as fh:
        text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != DATASET_HEADER:
        raise DimensionMismatch(f"expected '{DATASET_HEADER}' header")
    data_lines = [ln for ln in lines if not ln.startswith("#")]
    header = data_lines[0].split(",")
    p = len(header) - 2
    by_agent: dict[int, list[tuple[float, list[float]]]] = {}
    for ln in data_lines[1:]:
        parts = ln.split(",")
        agent = int(parts[0])
        by_agent.setdefault(agent, []).append(
            (float(parts[1]), [float(v) for v in parts[2 : 2 + p]])
        )
    agents = sorted(by_agent)
    x_blocks = tuple(
        np.array([row for _, row in by_agent[k]], dtype=float) for k in agents
    )
    y_blocks = tuple(
        np.array([y for y, _ in by_agent[k]], dtype=float) for k in agents
    )
    return Dataset(x_blocks=x_blocks, y_blocks=y_blocks)
