"""Adam with bias correction, learning-rate schedules, global-norm clipping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError
from .tensor import Tensor


@dataclass
class AdamState:
    """Per-parameter first/second moments and the shared step counter."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls(
            m=[np.zeros_like(p.values) for p in params],
            v=[np.zeros_like(p.values) for p in params],
        )


def adam_step(params, grads, state: AdamState, lr: float) -> None:
    """One bias-corrected Adam update, in place on the parameter values."""
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for i, (p, g) in enumerate(zip(params, grads)):
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient for parameter {p.name or i!r}")
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        m_hat = state.m[i] / (1.0 - b1**t)
        v_hat = state.v[i] / (1.0 - b2**t)
        p.values -= lr * m_hat / (np.sqrt(v_hat) + state.eps)


def lr_schedule(base: float, epoch: int, policy: str = "fixed", gamma: float = 0.95) -> float:
    """Fixed rate, or base * gamma^epoch under step decay."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    if policy == "fixed":
        return base
    if policy == "step_decay":
        if not 0.0 < gamma <= 1.0:
            raise ValueError(f"decay gamma must be in (0, 1], got {gamma}")
        return base * gamma**epoch
    raise ValueError(f"unknown schedule policy {policy!r}")


def clip_global_norm(grads, max_norm: float = 5.0) -> float:
    """Scale gradients in place so their joint L2 norm is at most max_norm."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if total > max_norm > 0.0:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total
