"""Two-point gradient estimation and the stochastic mirror-descent inner loop.

The primal step of the outer ADMM recursion is solved with function values
only: at iteration t the estimator probes the objective at two nearby
points along Gaussian directions and forms

    g = (1/u2t) * [F(w + u1t*nu1 + u2t*nu2) - F(w + u1t*nu1)] * nu2,

averaged over J independent direction pairs. Smoothing radii shrink as
u1t = u1/t and u2t = u1/(P t)^2, and the step size decays like 1/sqrt(t).
The estimator's sampling randomness is what the privacy analysis feeds on,
so the draw order (nu1 batch, then nu2 batch, per iteration) is part of the
determinism contract.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, NonFiniteIterate

logger = logging.getLogger(__name__)

#: Estimator constant for Gaussian direction sampling; shared by the
#: variance bound, the inner-loop guarantee, and step-size calibration.
ESTIMATOR_CONSTANT = 0.5


@dataclass(frozen=True)
class ZoConfig:
    """Inner-loop parameters.

    R_bound may be None, meaning "resolve from the current outer iterate"
    (see resolve_radius); every computation that needs R requires it to be
    resolved first. L_lipschitz defaults to 1, appropriate for normalized
    data.
    """

    u1: float
    T: int
    J: int
    alpha0: float
    P: int
    R_bound: float | None = 1.0
    L_lipschitz: float = 1.0

    def __post_init__(self):
        if self.u1 <= 0:
            raise DomainError(f"u1 must be positive, got {self.u1}")
        if self.T < 0 or self.J < 1 or self.P < 1:
            raise DomainError(f"bad loop sizes T={self.T}, J={self.J}, P={self.P}")
        if self.alpha0 <= 0 or self.L_lipschitz <= 0:
            raise DomainError("alpha0 and L_lipschitz must be positive")
        if self.R_bound is not None and self.R_bound <= 0:
            raise DomainError(f"R_bound must be positive, got {self.R_bound}")


def resolve_radius(cfg: ZoConfig, beta_prev: np.ndarray) -> ZoConfig:
    """Fill an unresolved R_bound as max(1, ||beta_prev|| + 1)."""
    if cfg.R_bound is not None:
        return cfg
    radius = max(1.0, float(np.linalg.norm(beta_prev)) + 1.0)
    return replace(cfg, R_bound=radius)


def smoothing_radii(cfg: ZoConfig, t: int) -> tuple[float, float]:
    """(u1t, u2t) at iteration t >= 1, with u2t clamped to u1t/2.

    The raw schedule u2t = u1/(P t)^2 already satisfies u2t <= u1t/2
    whenever P^2 t >= 2; the only violating case (P=1, t=1) is clamped and
    logged so the two-point expansion stays in its valid regime.
    """
    if t < 1:
        raise DomainError(f"iteration index must be >= 1, got {t}")
    u1t = cfg.u1 / t
    raw = cfg.u1 / (cfg.P * t) ** 2
    cap = u1t / 2.0
    if raw > cap:
        logger.warning(
            "clamping u2t from %.3e to u1t/2 = %.3e at t=%d, P=%d",
            raw, cap, t, cfg.P,
        )
        return u1t, cap
    return u1t, raw


def step_size(t: int, cfg: ZoConfig) -> float:
    """alpha_t = alpha0 * R / (L * sqrt(t * P * ln(2P)))."""
    if t < 1:
        raise DomainError(f"iteration index must be >= 1, got {t}")
    if cfg.R_bound is None:
        raise DomainError("R_bound unresolved; call resolve_radius first")
    return cfg.alpha0 * cfg.R_bound / (
        cfg.L_lipschitz * np.sqrt(t * cfg.P * np.log(2 * cfg.P))
    )


@dataclass(frozen=True)
class GradientSample:
    """One two-point estimate along (nu1, nu2)."""

    g: np.ndarray
    nu1: np.ndarray
    nu2: np.ndarray


def two_point_estimate(f, w, u1t: float, u2t: float, nu1, nu2) -> np.ndarray:
    """Single two-point gradient estimate; exactly two oracle calls."""
    if u1t <= 0 or u2t <= 0:
        raise DomainError("smoothing radii must be positive")
    w = np.asarray(w, dtype=float)
    base = w + u1t * np.asarray(nu1, dtype=float)
    nu2 = np.asarray(nu2, dtype=float)
    shifted_value = f(base + u2t * nu2)
    base_value = f(base)
    return ((shifted_value - base_value) / u2t) * nu2


def averaged_gradient(f, w, t: int, cfg: ZoConfig, rng: np.random.Generator) -> GradientSample:
    """Mean of J two-point estimates at iteration t.

    Draws nu1 then nu2, each (J, P) standard normal, and issues the 2J
    oracle evaluations as one batched call of shape (2J, P). The returned
    sample carries the mean estimate in g and the draws that produced it.
    """
    u1t, u2t = smoothing_radii(cfg, t)
    w = np.asarray(w, dtype=float)
    nu1 = rng.standard_normal((cfg.J, cfg.P))
    nu2 = rng.standard_normal((cfg.J, cfg.P))
    base = w + u1t * nu1
    points = np.concatenate([base + u2t * nu2, base], axis=0)
    values = np.asarray(f(points), dtype=float)
    diffs = (values[: cfg.J] - values[cfg.J :]) / u2t
    return GradientSample(g=(diffs[:, None] * nu2).mean(axis=0), nu1=nu1, nu2=nu2)


@dataclass(frozen=True)
class InnerLoopResult:
    """Final iterate beta^(T), running average, optional per-iteration trace."""

    final: np.ndarray
    average: np.ndarray
    trace: tuple[tuple[int, float, float], ...] = ()


def inner_loop(
    f,
    cfg: ZoConfig,
    rng: np.random.Generator,
    collect_trace: bool = False,
) -> InnerLoopResult:
    """Run T zeroth-order updates from beta^(0) = 0.

    beta^(t) = beta^(t-1) - alpha_t * g^(t). Returns the final iterate (the
    value the outer loop adopts), the running average (1/T) sum_t beta^(t)
    (the quantity the convergence guarantee speaks about), and, when
    collect_trace is set, rows (t, ||g||, F(beta^(t))). Tracing costs one
    extra oracle evaluation per iteration; the loop itself uses exactly 2J
    value queries per iteration and never a gradient.
    """
    if cfg.R_bound is None:
        raise DomainError("R_bound unresolved; call resolve_radius first")
    beta = np.zeros(cfg.P)
    if cfg.T == 0:
        return InnerLoopResult(final=beta, average=beta.copy())
    accum = np.zeros(cfg.P)
    trace: list[tuple[int, float, float]] = []
    for t in range(1, cfg.T + 1):
        g = averaged_gradient(f, beta, t, cfg, rng).g
        beta = beta - step_size(t, cfg) * g
        if not np.all(np.isfinite(beta)):
            raise NonFiniteIterate(
                f"iterate non-finite at inner t={t}; check L_lipschitz/alpha0 scaling"
            )
        accum += beta
        if collect_trace:
            trace.append((t, float(np.linalg.norm(g)), float(f(beta))))
    return InnerLoopResult(
        final=beta, average=accum / cfg.T, trace=tuple(trace)
    )


def estimate_lipschitz(
    f, p: int, rng: np.random.Generator, num_pairs: int = 256, radius: float = 1.0
) -> float:
    """Diagnostic-only empirical Lipschitz constant over random pairs in a ball."""
    a = rng.standard_normal((num_pairs, p))
    b = rng.standard_normal((num_pairs, p))
    a *= radius / np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-12)
    b *= radius / np.maximum(np.linalg.norm(b, axis=1, keepdims=True), 1e-12)
    gaps = np.abs(np.asarray(f(a)) - np.asarray(f(b)))
    dists = np.maximum(np.linalg.norm(a - b, axis=1), 1e-12)
    return float(np.max(gaps / dists))
