"""Intrinsic differential-privacy accounting for the zeroth-order ADMM.

The inner loop's sampling randomness makes each published iterate a
Gaussian perturbation of the exact primal update, so privacy comes for
free once that perturbation is large enough. This module prices it:
the l2 sensitivity of the exact update, the noise scale a target
(epsilon, delta) demands, the variance the inner loop actually provides
(upper bound), the epsilon that variance purchases, and the composed
budget over many outer iterations. All logarithms are natural.

Conventions baked in: epsilon in (0, 1], delta in (0, 0.01]; the
variance bound's harmonic sums run t = 1..T; the estimator constant c
defaults to 0.5 (Gaussian direction sampling).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CheckFailed, DomainError, NegativeBound
from .topology import Graph
from .zeroth_order import ESTIMATOR_CONSTANT, ZoConfig


def _validate_epsilon_delta(epsilon: float, delta: float) -> None:
    if not (0.0 < epsilon <= 1.0):
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not (0.0 < delta <= 0.01):
        raise DomainError(f"delta must lie in (0, 0.01], got {delta}")


@dataclass(frozen=True)
class PrivacyParams:
    """A per-agent privacy operating point."""

    epsilon: float
    delta: float
    sigma_k: float
    delta2_k: float

    def __post_init__(self):
        _validate_epsilon_delta(self.epsilon, self.delta)
        if self.sigma_k <= 0 or self.delta2_k <= 0:
            raise DomainError("sigma_k and delta2_k must be positive")


def l2_sensitivity(c1: float, rho: float, nk: int, n_samples: int) -> float:
    """Worst-case exact-update shift from replacing one sample: c1/(rho*nk*N_k)."""
    if c1 <= 0 or rho <= 0 or nk < 1 or n_samples < 1:
        raise DomainError("sensitivity inputs must be positive")
    return c1 / (rho * nk * n_samples)


def sigma_for(
    epsilon: float, delta: float, c1: float, rho: float, nk: int, n_samples: int
) -> float:
    """Noise scale guaranteeing (epsilon, delta) for one exact update."""
    _validate_epsilon_delta(epsilon, delta)
    delta2 = l2_sensitivity(c1, rho, nk, n_samples)
    return delta2 * np.sqrt(2.1 * np.log(1.25 / delta)) / epsilon


def _harmonic_sums(t_steps: int) -> tuple[float, float]:
    t = np.arange(1, t_steps + 1, dtype=float)
    return float(np.sum(1.0 / t)), float(np.sum(t ** -1.5))


def variance_upper_bound(
    cfg: ZoConfig,
    c: float = ESTIMATOR_CONSTANT,
    beta_c_norm: float = 0.0,
) -> float:
    """Per-coordinate variance the inner loop injects, upper bound.

        (c * alpha0^2 * R^2 / (J * P * ln 2P)) * (s1*(1 + ln P) + s2)
            - 4 ||beta_c||^2 / (T * J * P),

    s1 = sum 1/t, s2 = sum t^-1.5 over t = 1..T. A non-positive value
    means the parameters are mutually inconsistent and is reported as
    NegativeBound, never clamped.
    """
    if cfg.T < 1:
        raise DomainError(f"variance bound needs T >= 1, got {cfg.T}")
    if cfg.R_bound is None:
        raise DomainError("R_bound unresolved; variance bound needs a concrete R")
    if c <= 0:
        raise DomainError(f"estimator constant must be positive, got {c}")
    s1, s2 = _harmonic_sums(cfg.T)
    lead = (
        c * cfg.alpha0**2 * cfg.R_bound**2 / (cfg.J * cfg.P * np.log(2 * cfg.P))
    ) * (s1 * (1.0 + np.log(cfg.P)) + s2)
    value = lead - 4.0 * beta_c_norm**2 / (cfg.T * cfg.J * cfg.P)
    if value <= 0.0:
        raise NegativeBound(
            f"variance bound {value:.3e} <= 0; alpha0/R too small against ||beta_c||"
        )
    return float(value)


def epsilon_intrinsic(
    cfg: ZoConfig,
    delta: float,
    c1: float,
    rho: float,
    nk: int,
    n_samples: int,
    c: float = ESTIMATOR_CONSTANT,
    beta_c_norm: float = 0.0,
) -> float:
    """The epsilon already purchased by the inner loop's own randomness.

    Computed as delta2 * sqrt(2.1 * ln(1.25/delta) / variance_upper_bound),
    which makes sigma_for(epsilon_intrinsic, ...) == sqrt(variance bound)
    exactly — the accountant's consistency identity. The result can exceed
    1, meaning the loop is too quiet for any validated epsilon.
    """
    if not (0.0 < delta <= 0.01):
        raise DomainError(f"delta must lie in (0, 0.01], got {delta}")
    bound = variance_upper_bound(cfg, c=c, beta_c_norm=beta_c_norm)
    delta2 = l2_sensitivity(c1, rho, nk, n_samples)
    return float(delta2 * np.sqrt(2.1 * np.log(1.25 / delta) / bound))


def total_epsilon(epsilon: float, delta: float, num_outer: int) -> float:
    """Composed budget over num_outer iterations (moments-accountant form)."""
    _validate_epsilon_delta(epsilon, delta)
    if num_outer < 1:
        raise DomainError(f"need num_outer >= 1, got {num_outer}")
    return float(
        epsilon * np.sqrt(num_outer * np.log(1.0 / delta) / (1.05 * np.log(1.25 / delta)))
    )


@dataclass(frozen=True)
class CheckReport:
    """Outcome of the Monte-Carlo privacy-loss check."""

    exceedance: float
    stderr: float
    trials: int
    epsilon: float
    delta: float
    sigma: float
    shift: float
    passed: bool


def empirical_privacy_check(
    sigma_k: float,
    delta2_k: float,
    epsilon: float,
    delta: float,
    trials: int = 100_000,
    seed: int = 0,
) -> CheckReport:
    """Sample the scalar Gaussian privacy loss and test Pr[loss > eps] <= delta.

    For a shift of magnitude delta2_k between neighboring outputs, the
    privacy loss at noise xi ~ N(0, sigma^2) is
    |2 xi delta2 + delta2^2| / (2 sigma^2). The estimated exceedance must
    stay within delta + 3 Monte-Carlo standard errors, else CheckFailed
    (carrying the report) is raised.
    """
    if trials < 100_000:
        raise DomainError(f"need at least 1e5 trials, got {trials}")
    _validate_epsilon_delta(epsilon, delta)
    if delta2_k < 0:
        raise DomainError("shift magnitude cannot be negative")
    if delta2_k == 0.0:
        return CheckReport(0.0, 0.0, trials, epsilon, delta, sigma_k, 0.0, True)
    if sigma_k <= 0:
        raise DomainError("sigma_k must be positive for a nonzero shift")

    rng = np.random.default_rng(seed)
    exceeded = 0
    remaining = trials
    chunk = 1_000_000
    denom = 2.0 * sigma_k**2
    while remaining > 0:
        n = min(chunk, remaining)
        xi = rng.normal(0.0, sigma_k, n)
        loss = np.abs(2.0 * xi * delta2_k + delta2_k**2) / denom
        exceeded += int(np.count_nonzero(loss > epsilon))
        remaining -= n
    p_hat = exceeded / trials
    stderr = float(np.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials))
    passed = p_hat <= delta + 3.0 * stderr
    report = CheckReport(
        exceedance=p_hat,
        stderr=stderr,
        trials=trials,
        epsilon=epsilon,
        delta=delta,
        sigma=sigma_k,
        shift=delta2_k,
        passed=passed,
    )
    if not passed:
        raise CheckFailed(
            f"measured exceedance {p_hat:.3e} > delta {delta:.1e} + 3*stderr {stderr:.1e}",
            report=report,
        )
    return report


@dataclass(frozen=True)
class AgentAccount:
    """Per-agent accounting row."""

    agent: int
    nk: int
    n_samples: int
    delta2: float
    sigma: float
    epsilon_intrinsic: float


@dataclass(frozen=True)
class AccountantReport:
    """Network privacy accounting at a target (epsilon, delta).

    worst_epsilon is the largest per-agent intrinsic epsilon (the least
    private agent — always the one with the smallest degree); epsilon_total
    composes the *target* epsilon over num_outer iterations.
    """

    epsilon: float
    delta: float
    num_outer: int
    variance_bound: float
    epsilon_total: float
    agents: tuple[AgentAccount, ...]
    worst_agent: int
    worst_epsilon: float

    def lines(self) -> list[str]:
        """Aligned text rendering for the CLI."""
        out = [
            f"target epsilon={self.epsilon:g} delta={self.delta:g} "
            f"over M={self.num_outer} iterations",
            f"variance upper bound per coordinate: {self.variance_bound:.6e}",
            f"composed budget epsilon_bar: {self.epsilon_total:.6f}",
            f"{'agent':>5} {'nk':>3} {'N_k':>5} {'delta2':>12} {'sigma':>12} {'eps_intrinsic':>14}",
        ]
        for a in self.agents:
            out.append(
                f"{a.agent:>5} {a.nk:>3} {a.n_samples:>5} {a.delta2:>12.6e} "
                f"{a.sigma:>12.6e} {a.epsilon_intrinsic:>14.6e}"
            )
        out.append(
            f"network worst case: agent {self.worst_agent} "
            f"with intrinsic epsilon {self.worst_epsilon:.6e}"
        )
        return out


def accountant_report(
    graph: Graph,
    samples_per_agent,
    epsilon: float,
    delta: float,
    num_outer: int,
    zo: ZoConfig,
    c1: float,
    rho: float,
    c: float = ESTIMATOR_CONSTANT,
    beta_c_norm: float = 0.0,
) -> AccountantReport:
    """Assemble the per-agent accounts and the composed budget."""
    _validate_epsilon_delta(epsilon, delta)
    counts = (
        list(samples_per_agent)
        if not isinstance(samples_per_agent, int)
        else [samples_per_agent] * graph.num_agents
    )
    if len(counts) != graph.num_agents:
        raise DomainError("samples_per_agent must give one count per agent")
    bound = variance_upper_bound(zo, c=c, beta_c_norm=beta_c_norm)
    rows = []
    for k in graph.agents:
        nk = graph.degree(k)
        n_k = counts[k - 1]
        rows.append(
            AgentAccount(
                agent=k,
                nk=nk,
                n_samples=n_k,
                delta2=l2_sensitivity(c1, rho, nk, n_k),
                sigma=sigma_for(epsilon, delta, c1, rho, nk, n_k),
                epsilon_intrinsic=epsilon_intrinsic(
                    zo, delta, c1, rho, nk, n_k, c=c, beta_c_norm=beta_c_norm
                ),
            )
        )
    worst = max(rows, key=lambda r: r.epsilon_intrinsic)
    return AccountantReport(
        epsilon=epsilon,
        delta=delta,
        num_outer=num_outer,
        variance_bound=bound,
        epsilon_total=total_epsilon(epsilon, delta, num_outer),
        agents=tuple(rows),
        worst_agent=worst.agent,
        worst_epsilon=worst.epsilon_intrinsic,
    )
