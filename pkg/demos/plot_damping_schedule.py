"""
Damped versus undamped momentum
===============================

Enhanced NIRMAL subtracts ``r / t**alpha`` times the previous momentum at
every step. With r=2 and alpha=0.5 that factor is larger than mu=0.9 for
the first four steps, so early momentum is actively reversed before the
damping fades.
"""
import numpy as np

from nirmal import HyperParams, OptimizerState, enhanced_nirmal_step, nirmal_step
from nirmal.optimizers import damping

hp = HyperParams(kappa=0.0)
steps = 40

print(" t   xi_t    mu - xi_t")
for t in range(1, 9):
    print(f"{t:2d}  {damping(t, hp):.4f}  {hp.mu - damping(t, hp): .4f}")

# %%
# Feed both variants the same constant gradient and track the momentum buffer.
m_plain, m_damped = [], []
plain, damped = OptimizerState.fresh(), OptimizerState.fresh()
p = q = np.array([0.5])
for _ in range(steps):
    p, _ = nirmal_step(plain, p, np.ones(1), hp)
    q, _ = enhanced_nirmal_step(damped, q, np.ones(1), hp)
    m_plain.append(plain.m[0])
    m_damped.append(damped.m[0])

print("\nstep   m (NIRMAL)   m (Enhanced)")
for t in (1, 2, 3, 5, 10, 20, 40):
    print(f"{t:4d}   {m_plain[t - 1]:.6f}     {m_damped[t - 1]:.6f}")

# %%
# Plot, if matplotlib is around.
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    ts = np.arange(1, steps + 1)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(ts, m_plain, label="NIRMAL")
    ax.plot(ts, m_damped, label="Enhanced NIRMAL")
    ax.set_xlabel("step")
    ax.set_ylabel("momentum buffer m")
    ax.legend()
    fig.tight_layout()
    fig.savefig("damping_momentum.png", dpi=120)
    print("\nwrote damping_momentum.png")
