"""Shared types, hyperparameter defaults and the step dispatch used by every optimizer.

Parameters and gradients are flat ``float64`` numpy arrays. Optimizer state
buffers are allocated lazily on the first step so a fresh
:class:`OptimizerState` can be handed to any problem size.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

OPTIMIZER_NAMES = ("enhanced-nirmal", "nirmal", "adam", "sgd-momentum", "nesterov")

COMPONENTS = ("wazir", "elephant", "knight", "camel", "horse")


class DimensionError(ValueError):
    """Parameter, gradient or state buffers disagree in length."""


class NonFiniteError(FloatingPointError):
    """A NaN or Inf showed up in an input or an intermediate result.

    ``stage`` names where it happened (``"gradient"``, ``"m"``, ...) and
    ``index`` is the first offending coordinate.
    """

    def __init__(self, stage: str, index: int):
        self.stage = stage
        self.index = int(index)
        super().__init__(f"non-finite value in {stage} at index {self.index}")


@dataclass(frozen=True)
class HyperParams:
    """Every scalar knob used by the five update rules.

    ``alpha_damp`` (damping exponent) and ``weight_decay`` are kept apart on
    purpose: CIFAR-style configurations use both at once.
    """

    eta: float = 1e-3
    mu: float = 0.9
    beta: float = 0.999
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    kappa: float = 0.01
    gamma: float = 1.5
    lam: float = 0.5
    alpha_damp: float = 0.5
    r_damp: float = 2.0
    weight_decay: float = 0.0
    w_wazir: float = 0.3
    w_elephant: float = 0.25
    w_knight: float = 0.1
    w_camel: float = 0.2
    w_horse: float = 0.15

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        for name in ("mu", "beta", "beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {value}")
        if not self.alpha_damp > 0:
            raise ValueError(f"alpha_damp must be > 0, got {self.alpha_damp}")
        if not self.r_damp >= 0:
            raise ValueError(f"r_damp must be >= 0, got {self.r_damp}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        weights = self.weights
        for name, value in zip(COMPONENTS, weights):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"w_{name} must lie in [0, 1], got {value}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"component weights must sum to 1, got {sum(weights)!r}")

    @property
    def weights(self) -> Tuple[float, float, float, float, float]:
        return (self.w_wazir, self.w_elephant, self.w_knight, self.w_camel, self.w_horse)

    def replace(self, **changes) -> "HyperParams":
        return dataclasses.replace(self, **changes)

    @classmethod
    def for_optimizer(cls, name: str, **overrides) -> "HyperParams":
        """Published defaults for ``name``; SGD with momentum uses eta=0.01."""
        if name not in OPTIMIZER_NAMES:
            raise KeyError(f"unknown optimizer {name!r}; expected one of {OPTIMIZER_NAMES}")
        base = {"eta": 1e-2} if name == "sgd-momentum" else {}
        base.update(overrides)
        return cls(**base)


@dataclass
class OptimizerState:
    """Mutable per-run buffers.

    ``t`` counts completed steps; a step increments it before use, so the
    first step sees ``t == 1``. ``rng`` feeds the knight noise and is the
    only source of randomness in any update rule.
    """

    m: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    velocity: Optional[np.ndarray] = None
    t: int = 0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))

    @classmethod
    def fresh(cls, seed: int = 0) -> "OptimizerState":
        return cls(rng=np.random.default_rng(np.random.PCG64(seed)))

    @property
    def dim(self) -> Optional[int]:
        for buf in (self.m, self.v, self.velocity):
            if buf is not None:
                return buf.shape[0]
        return None

    def ensure(self, dim: int) -> None:
        """Allocate zero buffers on first use, else check their size."""
        current = self.dim
        if current is None:
            self.m = np.zeros(dim)
            self.v = np.zeros(dim)
            self.velocity = np.zeros(dim)
        elif current != dim:
            raise DimensionError(f"state tracks {current} parameters, got {dim}")


@dataclass
class StepBreakdown:
    """Per-component deltas of one NIRMAL-family step, before weighting."""

    wazir: np.ndarray
    elephant: np.ndarray
    knight: np.ndarray
    camel: np.ndarray
    horse: np.ndarray
    total: np.ndarray

    def components(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in COMPONENTS}


def as_param_vector(values, name: str = "params") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def check_finite(arr: np.ndarray, stage: str) -> None:
    ok = np.isfinite(arr)
    if not ok.all():
        raise NonFiniteError(stage, np.flatnonzero(~ok)[0])


def prepare(state: OptimizerState, params, grad, hp: HyperParams) -> Tuple[np.ndarray, np.ndarray]:
    """Validate inputs, size the state and apply weight decay to the gradient.

    Returns ``(params, grad)`` as fresh float64 arrays; the caller's arrays
    are never written to.
    """
    params = as_param_vector(params)
    grad = as_param_vector(grad, "grad")
    if params.shape != grad.shape:
        raise DimensionError(f"params has {params.shape[0]} entries, grad has {grad.shape[0]}")
    check_finite(grad, "gradient")
    state.ensure(params.shape[0])
    if hp.weight_decay:
        grad = grad + hp.weight_decay * params
        check_finite(grad, "weight decay")
    return params, grad


StepFn = Callable[..., Tuple[np.ndarray, Optional[StepBreakdown]]]

_REGISTRY: Dict[str, StepFn] = {}


def register(name: str) -> Callable[[StepFn], StepFn]:
    def deco(fn: StepFn) -> StepFn:
        _REGISTRY[name] = fn
        return fn

    return deco


def get_step(name: str) -> StepFn:
    # importing populates the registry
    from . import optimizers  # noqa: F401

    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown optimizer {name!r}; expected one of {OPTIMIZER_NAMES}") from None


def step(
    name: str,
    state: OptimizerState,
    params,
    grad,
    hp: Optional[HyperParams] = None,
    breakdown: bool = False,
) -> Tuple[np.ndarray, Optional[StepBreakdown]]:
    """Apply one step of optimizer ``name``.

    Returns the new parameters and, for the NIRMAL family with
    ``breakdown=True``, the per-component deltas (``None`` otherwise).
    """
    if hp is None:
        hp = HyperParams.for_optimizer(name)
    return get_step(name)(state, params, grad, hp, breakdown=breakdown)


class Optimizer:
    """Stateful wrapper binding one update rule, its hyperparameters and a seeded state.

    >>> opt = Optimizer("adam")
    >>> theta = opt.step(np.array([0.5]), np.array([1.0]))
    """

    def __init__(self, name: str, hp: Optional[HyperParams] = None, seed: int = 0):
        self.name = name
        self.hp = hp if hp is not None else HyperParams.for_optimizer(name)
        self.state = OptimizerState.fresh(seed)
        self._fn = get_step(name)
        self.last_breakdown: Optional[StepBreakdown] = None

    def step(self, params, grad, breakdown: bool = False) -> np.ndarray:
        new, self.last_breakdown = self._fn(self.state, params, grad, self.hp, breakdown=breakdown)
        return new

    def __repr__(self):
        return f"Optimizer({self.name!r}, t={self.state.t})"
