"""The five update rules: Enhanced NIRMAL, NIRMAL, Adam, SGD with momentum, Nesterov.

Each ``*_step`` function takes ``(state, params, grad, hp)`` and returns
``(new_params, breakdown)``. ``breakdown`` is a :class:`StepBreakdown` for
the NIRMAL family when requested and ``None`` otherwise. Weight decay
(``grad + hp.weight_decay * params``) is applied before every rule.

State is committed only after a step has produced finite values, so an
overflow leaves the state as it was before the call.

Notes on the NIRMAL family
--------------------------
The moment buffers carry no bias correction, so the camel term is large
early on (``v_1 = (1 - beta) g**2``). The damping factor ``r / t**alpha``
is not clamped either: with the defaults it exceeds ``mu`` for ``t <= 4``,
making the effective momentum coefficient ``mu - xi_t`` negative in the
first few steps.
"""
from __future__ import annotations

from typing import Callable, Optional, Tuple

import numpy as np

from .core import (
    HyperParams,
    OptimizerState,
    StepBreakdown,
    check_finite,
    prepare,
    register,
)


def damping(t: int, hp: HyperParams) -> float:
    """Damping factor ``r / t**alpha`` at 1-indexed step ``t``."""
    if t < 1:
        raise ValueError(f"damping is defined for t >= 1, got {t}")
    return hp.r_damp / t ** hp.alpha_damp


def _nirmal(state: OptimizerState, params, grad, hp: HyperParams, damped: bool, breakdown: bool):
    params, g = prepare(state, params, grad, hp)
    t = state.t + 1

    m_prev = state.m
    m = hp.mu * m_prev + (1.0 - hp.mu) * g
    if damped:
        m = m - damping(t, hp) * m_prev
    check_finite(m, "m")
    v = hp.beta * state.v + (1.0 - hp.beta) * g * g
    check_finite(v, "v")

    # one standard normal per coordinate per step, drawn even when kappa == 0
    # so the noise stream does not depend on kappa
    z = state.rng.standard_normal(params.shape[0])

    eta = hp.eta
    wazir = -eta * g
    elephant = -eta * m
    knight = eta * hp.kappa * z
    camel = -eta * hp.gamma * m / np.sqrt(v + hp.epsilon)
    horse = -eta * hp.lam * np.tanh(m)
    w = hp.weights
    total = w[0] * wazir + w[1] * elephant + w[2] * knight + w[3] * camel + w[4] * horse
    check_finite(total, "update")

    new = params + total
    check_finite(new, "params")
    state.m, state.v, state.t = m, v, t
    info = StepBreakdown(wazir, elephant, knight, camel, horse, total) if breakdown else None
    return new, info


@register("enhanced-nirmal")
def enhanced_nirmal_step(
    state: OptimizerState, params, grad, hp: HyperParams, breakdown: bool = False
) -> Tuple[np.ndarray, Optional[StepBreakdown]]:
    """NIRMAL step whose momentum is damped by ``r / t**alpha`` times the previous momentum."""
    return _nirmal(state, params, grad, hp, damped=True, breakdown=breakdown)


@register("nirmal")
def nirmal_step(
    state: OptimizerState, params, grad, hp: HyperParams, breakdown: bool = False
) -> Tuple[np.ndarray, Optional[StepBreakdown]]:
    """Original NIRMAL step: five weighted components, undamped momentum."""
    return _nirmal(state, params, grad, hp, damped=False, breakdown=breakdown)


@register("adam")
def adam_step(state: OptimizerState, params, grad, hp: HyperParams, breakdown: bool = False):
    """Adam with bias correction; the denominator is ``sqrt(v_hat) + epsilon``."""
    params, g = prepare(state, params, grad, hp)
    t = state.t + 1
    m = hp.beta1 * state.m + (1.0 - hp.beta1) * g
    v = hp.beta2 * state.v + (1.0 - hp.beta2) * g * g
    check_finite(m, "m")
    check_finite(v, "v")
    m_hat = m / (1.0 - hp.beta1 ** t)
    v_hat = v / (1.0 - hp.beta2 ** t)
    new = params - hp.eta * m_hat / (np.sqrt(v_hat) + hp.epsilon)
    check_finite(new, "params")
    state.m, state.v, state.t = m, v, t
    return new, None


@register("sgd-momentum")
def sgd_momentum_step(state: OptimizerState, params, grad, hp: HyperParams, breakdown: bool = False):
    params, g = prepare(state, params, grad, hp)
    velocity = hp.mu * state.velocity + hp.eta * g
    check_finite(velocity, "velocity")
    new = params - velocity
    check_finite(new, "params")
    state.velocity, state.t = velocity, state.t + 1
    return new, None


@register("nesterov")
def nesterov_step(state: OptimizerState, params, grad, hp: HyperParams, breakdown: bool = False):
    """Nesterov momentum in the one-gradient-per-step form.

    ``velocity = mu * velocity + eta * g`` followed by
    ``params -= mu * velocity + eta * g``, with ``g`` taken at the current
    params. The iterates are the look-ahead points of the classical form
    (see :func:`nesterov_lookahead_step`).
    """
    params, g = prepare(state, params, grad, hp)
    velocity = hp.mu * state.velocity + hp.eta * g
    check_finite(velocity, "velocity")
    new = params - (hp.mu * velocity + hp.eta * g)
    check_finite(new, "params")
    state.velocity, state.t = velocity, state.t + 1
    return new, None


def nesterov_lookahead_step(
    state: OptimizerState,
    params,
    grad_fn: Callable[[np.ndarray], np.ndarray],
    hp: HyperParams,
) -> np.ndarray:
    """Classical Nesterov step evaluating the gradient at ``params - mu * velocity``.

    Needs a gradient callable, so it only works with analytic objectives.
    For testing the one-gradient form; the harness never uses it.
    """
    params = np.asarray(params, dtype=np.float64)
    state.ensure(params.shape[0])
    ahead = params - hp.mu * state.velocity
    g = np.asarray(grad_fn(ahead), dtype=np.float64)
    if hp.weight_decay:
        g = g + hp.weight_decay * ahead
    check_finite(g, "gradient")
    state.velocity = hp.mu * state.velocity + hp.eta * g
    state.t += 1
    return params - state.velocity
