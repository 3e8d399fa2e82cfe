"""Analytic test functions with closed-form gradients and a finite-difference checker."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .core import NonFiniteError, as_param_vector


@dataclass(frozen=True)
class Objective:
    """A differentiable function ``x -> (value, gradient)`` of fixed dimension.

    ``minimizer``/``minimum`` hold the known optimum when there is one.
    ``x0`` is the conventional starting point used by the harness.
    """

    name: str
    dim: int
    fn: Callable[[np.ndarray], Tuple[float, np.ndarray]]
    minimizer: Optional[np.ndarray] = None
    minimum: Optional[float] = None
    x0: Optional[np.ndarray] = None

    def __call__(self, x) -> Tuple[float, np.ndarray]:
        x = as_param_vector(x, "point")
        if x.shape[0] != self.dim:
            raise ValueError(f"{self.name} expects dimension {self.dim}, got {x.shape[0]}")
        value, grad = self.fn(x)
        return float(value), grad

    def value(self, x) -> float:
        return self(x)[0]

    def grad(self, x) -> np.ndarray:
        return self(x)[1]


def quadratic(dim: int, condition_number: float = 1.0) -> Objective:
    """``0.5 * sum(c_i * x_i**2)`` with ``c`` log-spaced on ``[1, condition_number]``.

    The starting point is the unit-norm vector ``ones / sqrt(dim)``.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if not condition_number >= 1:
        raise ValueError(f"condition_number must be >= 1, got {condition_number}")
    c = np.logspace(0.0, np.log10(condition_number), dim)

    def fn(x):
        cx = c * x
        return 0.5 * np.dot(x, cx), cx

    return Objective(
        name=f"quadratic(dim={dim}, cond={condition_number:g})",
        dim=dim,
        fn=fn,
        minimizer=np.zeros(dim),
        minimum=0.0,
        x0=np.full(dim, 1.0 / np.sqrt(dim)),
    )


def rosenbrock(dim: int = 2) -> Objective:
    """Chained Rosenbrock, ``sum 100 (x_{i+1} - x_i**2)**2 + (1 - x_i)**2``.

    Minimum 0 at all-ones; starts from the classic ``(-1.2, 1, -1.2, 1, ...)``.
    """
    if dim < 2:
        raise ValueError(f"rosenbrock needs dim >= 2, got {dim}")

    def fn(x):
        head, tail = x[:-1], x[1:]
        resid = tail - head ** 2
        value = np.sum(100.0 * resid ** 2 + (1.0 - head) ** 2)
        grad = np.zeros_like(x)
        grad[:-1] = -400.0 * head * resid - 2.0 * (1.0 - head)
        grad[1:] += 200.0 * resid
        return value, grad

    x0 = np.ones(dim)
    x0[::2] = -1.2
    return Objective(
        name=f"rosenbrock(dim={dim})",
        dim=dim,
        fn=fn,
        minimizer=np.ones(dim),
        minimum=0.0,
        x0=x0,
    )


def fd_gradient(f: Callable[[np.ndarray], float], point, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    if not h > 0:
        raise ValueError(f"finite-difference step must be > 0, got {h}")
    x = as_param_vector(point, "point").copy()
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        orig = x[i]
        x[i] = orig + h
        f_plus = f(x)
        x[i] = orig - h
        f_minus = f(x)
        x[i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteError("finite difference", i)
        out[i] = (f_plus - f_minus) / (2.0 * h)
    return out


def fd_check(obj, point, h: float = 1e-6) -> float:
    """Worst per-coordinate relative error between analytic and central-difference gradients.

    ``obj`` is anything callable as ``obj(x) -> (value, grad)``. The relative
    error uses ``max(1, |analytic_i|)`` as denominator.
    """
    if not h > 0:
        raise ValueError(f"finite-difference step must be > 0, got {h}")
    x = as_param_vector(point, "point")
    value, analytic = obj(x)
    analytic = np.asarray(analytic, dtype=np.float64)
    if not np.isfinite(value):
        raise NonFiniteError("objective value", 0)
    if not np.isfinite(analytic).all():
        raise NonFiniteError("analytic gradient", np.flatnonzero(~np.isfinite(analytic))[0])
    numeric = fd_gradient(lambda y: obj(y)[0], x, h)
    err = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))
    return float(err.max())
