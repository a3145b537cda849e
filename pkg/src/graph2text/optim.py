"""Adam updates, learning-rate schedules, and the finite-difference checker."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .tensor import Parameter, Tensor


@dataclass
class OptimizerState:
    """Per-parameter Adam moments plus the shared step count."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: Sequence[Parameter], lr: float = 1e-3, beta1: float = 0.9,
                   beta2: float = 0.999, eps: float = 1e-8) -> "OptimizerState":
        state = cls(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
        for p in params:
            state.m[p.name] = np.zeros_like(p.data)
            state.v[p.name] = np.zeros_like(p.data)
        return state


def adam_step(params: Sequence[Parameter], state: OptimizerState, lr: float | None = None) -> None:
    """One Adam update with bias correction; gradients must be populated."""
    rate = state.lr if lr is None else lr
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p in params:
        if p.name not in state.m:
            raise KeyError(f"optimizer state not initialized for parameter {p.name!r}")
        g = p.gradient
        m = state.m[p.name]
        v = state.v[p.name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        update = (m / c1) / (np.sqrt(v / c2) + state.eps)
        p.tensor.data = p.tensor.data - rate * update


def constant_schedule(lr: float) -> Callable[[int], float]:
    return lambda step: lr


def inverse_sqrt_schedule(lr: float, warmup: int) -> Callable[[int], float]:
    """Linear warmup to `lr`, then decay proportional to 1/sqrt(step)."""
    warmup = max(1, warmup)

    def at(step: int) -> float:
        step = max(1, step)
        return lr * min(step / warmup, math.sqrt(warmup / step))

    return at


def grad_check(f: Callable[[], Tensor], params: Sequence[Parameter], eps: float = 1e-5) -> float:
    """Max relative error between backprop and central finite differences.

    f must rebuild the scalar loss from the current parameter values and
    be deterministic. Meant for 64-bit mode with small parameter counts.
    """
    if eps <= 0:
        raise ValueError("degenerate step: eps must be positive")
    for p in params:
        p.zero_grad()
    loss = f()
    loss.backward()
    analytic = {p.name: p.gradient.copy() for p in params}
    worst = 0.0
    for p in params:
        flat = p.tensor.data.reshape(-1)
        ana = analytic[p.name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = f().item()
            flat[i] = orig - eps
            down = f().item()
            flat[i] = orig
            numeric = (up - down) / (2.0 * eps)
            denom = max(abs(ana[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(ana[i] - numeric) / denom)
    for p in params:
        p.zero_grad()
    return worst
