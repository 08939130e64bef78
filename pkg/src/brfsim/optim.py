"""Optimizers (Adam, RAdam, RMSprop) and the linear learning-rate schedule.

Standard update rules with the usual defaults (beta1=0.9, beta2=0.999,
eps=1e-8; RMSprop smoothing alpha=0.99). RAdam follows the published
rectification: the variance term is used only once its estimated degrees
of freedom rho_t exceed 4, otherwise the step is the bias-corrected
momentum alone. Updates mutate the weight arrays in place and return
(weights, state) for chaining; trajectories are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = ["OPTIMIZER_KINDS", "OptimizerState", "make_optimizer", "optimizer_step", "lr_schedule_linear"]

OPTIMIZER_KINDS = ("adam", "radam", "rmsprop")


@dataclass
class OptimizerState:
    kind: str
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    alpha: float = 0.99  # rmsprop smoothing
    slots: dict = field(default_factory=dict)  # name -> {"m": ..., "v": ...}


def make_optimizer(kind: str, weights, **hyper) -> OptimizerState:
    """Allocate zeroed moment accumulators shaped like every trainable tensor."""
    if kind not in OPTIMIZER_KINDS:
        raise ConfigError(f"unknown optimizer {kind!r}")
    state = OptimizerState(kind=kind, **hyper)
    for name, arr in weights.trainable().items():
        if kind == "rmsprop":
            state.slots[name] = {"v": np.zeros_like(arr)}
        else:
            state.slots[name] = {"m": np.zeros_like(arr), "v": np.zeros_like(arr)}
    return state


def optimizer_step(weights, grads, state: OptimizerState, lr: float):
    """Apply one update at learning rate ``lr``. Shapes must match the
    accumulators; weight arrays are updated in place."""
    g_by_name = grads.trainable()
    state.step += 1
    t = state.step
    b1, b2, eps = state.beta1, state.beta2, state.eps
    if state.kind == "radam":
        rho_inf = 2.0 / (1.0 - b2) - 1.0
        rho_t = rho_inf - 2.0 * t * b2**t / (1.0 - b2**t)
        if rho_t > 4.0:
            rect = np.sqrt(
                ((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t)
            )
        else:
            rect = None
    for name, w in weights.trainable().items():
        g = g_by_name[name]
        if g.shape != w.shape:
            raise ConfigError(f"gradient shape {g.shape} != weight shape {w.shape} for {name}")
        slot = state.slots[name]
        if state.kind == "rmsprop":
            v = slot["v"]
            v *= state.alpha
            v += (1.0 - state.alpha) * g * g
            w -= lr * g / (np.sqrt(v) + eps)
            continue
        m, v = slot["m"], slot["v"]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**t)
        if state.kind == "adam":
            v_hat = v / (1.0 - b2**t)
            w -= lr * m_hat / (np.sqrt(v_hat) + eps)
        else:  # radam
            if rect is not None:
                v_hat = np.sqrt(v / (1.0 - b2**t))
                w -= lr * rect * m_hat / (v_hat + eps)
            else:
                w -= lr * m_hat
    return weights, state


def lr_schedule_linear(base_lr: float, epoch: int, total_epochs: int, end_factor: float = 0.0) -> float:
    """Linear interpolation from base_lr (epoch 0) to base_lr*end_factor
    (epoch == total_epochs)."""
    if epoch < 0 or (total_epochs and epoch > total_epochs):
        raise ConfigError(f"epoch {epoch} outside [0, {total_epochs}]")
    if total_epochs <= 0:
        return base_lr
    frac = epoch / total_epochs
    return base_lr * (1.0 + (end_factor - 1.0) * frac)
