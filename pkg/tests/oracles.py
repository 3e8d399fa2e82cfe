"""Pure-Python scalar reference recurrences, written independently of the package code."""
import math

DEFAULTS = dict(eta=1e-3, mu=0.9, beta=0.999, eps=1e-8, gamma=1.5, lam=0.5, alpha=0.5, r=2.0,
                w=(0.3, 0.25, 0.1, 0.2, 0.15))


def nirmal_scalar(theta, grads, damped, noise=None, kappa=0.0, **kw):
    """Returns a list of (theta, m, v, total) after each step."""
    p = dict(DEFAULTS, **kw)
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, 1):
        z = noise[t - 1] if noise is not None else 0.0
        xi = p["r"] / t ** p["alpha"] if damped else 0.0
        m_new = p["mu"] * m + (1 - p["mu"]) * g - xi * m
        m = m_new
        v = p["beta"] * v + (1 - p["beta"]) * g * g
        parts = (
            -p["eta"] * g,
            -p["eta"] * m,
            p["eta"] * kappa * z,
            -p["eta"] * p["gamma"] * m / math.sqrt(v + p["eps"]),
            -p["eta"] * p["lam"] * math.tanh(m),
        )
        total = sum(wi * d for wi, d in zip(p["w"], parts))
        theta = theta + total
        out.append((theta, m, v, total))
    return out


def adam_scalar(theta, grads, eta=1e-3, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, 1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        theta = theta - eta * mh / (math.sqrt(vh) + eps)
        out.append(theta)
    return out


def sgd_momentum_scalar(theta, grads, eta=0.01, mu=0.9):
    vel = 0.0
    out = []
    for g in grads:
        vel = mu * vel + eta * g
        theta = theta - vel
        out.append((theta, vel))
    return out


def quadratic_steps_to_norm(step_kind, curvatures, x0, tol, max_steps, **kw):
    """First step count at which the separable quadratic iterate has norm < tol.

    Each coordinate follows its own scalar recurrence with gradient c * x.
    """
    state = [dict(x=x0, m=0.0, v=0.0, vel=0.0) for _ in curvatures]
    for t in range(1, max_steps + 1):
        for c, s in zip(curvatures, state):
            g = c * s["x"]
            if step_kind == "adam":
                eta, b1, b2, eps = kw.get("eta", 1e-3), 0.9, 0.999, 1e-8
                s["m"] = b1 * s["m"] + (1 - b1) * g
                s["v"] = b2 * s["v"] + (1 - b2) * g * g
                s["x"] -= eta * (s["m"] / (1 - b1 ** t)) / (math.sqrt(s["v"] / (1 - b2 ** t)) + eps)
            else:
                s["vel"] = 0.9 * s["vel"] + kw.get("eta", 0.01) * g
                s["x"] -= s["vel"]
        if math.sqrt(sum(s["x"] ** 2 for s in state)) < tol:
            return t
    return None
