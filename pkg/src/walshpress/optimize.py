"""Adam gradient descent with best-cost tracking and patience-based step halving."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericIntegrityError


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_iters: int = 500
    patience: int = 40
    cost_tolerance: float = 1e-8
    seed: int = 0
    init_scale: float = 0.1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")


@dataclass
class OptimizerState:
    first_moments: np.ndarray
    second_moments: np.ndarray
    step_count: int
    best_cost: float
    best_params: np.ndarray
    learning_rate: float
    stall_count: int = 0

    @classmethod
    def initial(cls, params: np.ndarray, config: OptimizerConfig) -> "OptimizerState":
        p = np.asarray(params, dtype=float)
        return cls(
            first_moments=np.zeros_like(p),
            second_moments=np.zeros_like(p),
            step_count=0,
            best_cost=np.inf,
            best_params=p.copy(),
            learning_rate=config.learning_rate,
        )


def adam_step(
    state: OptimizerState,
    params: np.ndarray,
    grads: np.ndarray,
    config: OptimizerConfig,
    cost: float | None = None,
) -> tuple[OptimizerState, np.ndarray]:
    """One bias-corrected Adam update. `cost` is the value at `params` (pre-step);
    passing it maintains the best-so-far snapshot and the patience counter."""
    grads = np.asarray(grads, dtype=float)
    if grads.shape != params.shape:
        raise ValueError("gradient/parameter shape mismatch")
    if not np.all(np.isfinite(grads)):
        raise NumericIntegrityError(f"non-finite gradient at step {state.step_count}: {grads}")

    best_cost, best_params = state.best_cost, state.best_params
    stall, lr = state.stall_count, state.learning_rate
    if cost is not None:
        if cost < best_cost:
            best_cost, best_params = float(cost), params.copy()
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                lr *= 0.5
                stall = 0

    t = state.step_count + 1
    m = config.beta1 * state.first_moments + (1 - config.beta1) * grads
    v = config.beta2 * state.second_moments + (1 - config.beta2) * grads**2
    m_hat = m / (1 - config.beta1**t)
    v_hat = v / (1 - config.beta2**t)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + config.epsilon)

    new_state = OptimizerState(
        first_moments=m,
        second_moments=v,
        step_count=t,
        best_cost=best_cost,
        best_params=best_params,
        learning_rate=lr,
        stall_count=stall,
    )
    return new_state, new_params


def minimize(cost_fn, grad_fn, x0: np.ndarray, config: OptimizerConfig):
    """Run the Adam loop; returns (best_params, best_cost, history, converged).

    history rows are (iteration, cost, best_cost); best_cost is non-increasing.
    """
    params = np.asarray(x0, dtype=float).copy()
    state = OptimizerState.initial(params, config)
    history = []
    converged = False
    for it in range(config.max_iters):
        cost = float(cost_fn(params))
        prospective_best = min(cost, state.best_cost)
        history.append((it, cost, prospective_best))
        if prospective_best <= config.cost_tolerance:
            if cost < state.best_cost:
                state.best_cost, state.best_params = cost, params.copy()
            converged = True
            break
        grads = grad_fn(params)
        state, params = adam_step(state, params, grads, config, cost=cost)
    return state.best_params, state.best_cost, history, converged
