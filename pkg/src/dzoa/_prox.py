"""Accelerated proximal-gradient solver for smooth + l1 composites.

One solver backs every exact minimization in the package: the centralized
lasso, the per-agent exact primal update, and the stacked matrix-form
update. Convergence is declared on the proximal fixed-point residual

    ||x - prox_{tau*h}(x - tau * grad(x))|| / tau <= tol,

which is zero exactly at minimizers of g + h.
"""

from __future__ import annotations

import numpy as np

from .errors import NoConvergence


def soft_threshold(v: np.ndarray, thresh: float) -> np.ndarray:
    """Proximal operator of thresh*||.||_1."""
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def fista_l1(
    grad,
    lipschitz: float,
    l1_weight: float,
    x0: np.ndarray,
    tol: float,
    max_iter: int = 200_000,
) -> np.ndarray:
    """Minimize g(x) + l1_weight*||x||_1 given grad = nabla g.

    Nesterov acceleration with gradient-based restarts. Raises
    NoConvergence if the residual has not reached tol after max_iter
    proximal steps.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    tau = 1.0 / lipschitz
    x = np.asarray(x0, dtype=float).copy()
    z = x.copy()
    momentum = 1.0
    for _ in range(max_iter):
        x_next = soft_threshold(z - tau * grad(z), tau * l1_weight)
        residual = np.linalg.norm(x - soft_threshold(x - tau * grad(x), tau * l1_weight)) / tau
        if residual <= tol:
            return x
        if np.dot(z - x_next, x_next - x) > 0.0:
            # momentum is pointing uphill; restart
            momentum = 1.0
            z = x_next.copy()
        else:
            momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum**2))
            z = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x)
            momentum = momentum_next
        x = x_next
    residual = np.linalg.norm(x - soft_threshold(x - tau * grad(x), tau * l1_weight)) / tau
    if residual <= tol:
        return x
    raise NoConvergence(
        f"proximal solver residual {residual:.3e} > tol {tol:.1e} after {max_iter} iterations"
    )
