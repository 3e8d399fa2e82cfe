"""
Anatomy of one Enhanced NIRMAL step
===================================

A scalar parameter at 0.5 receives a gradient of 1.0. We switch the noise
off (kappa=0) so the numbers are reproducible by hand, then look at the five
component deltas and how the weights combine them.
"""
import numpy as np

from nirmal import HyperParams, OptimizerState, enhanced_nirmal_step

hp = HyperParams(kappa=0.0)
state = OptimizerState.fresh(seed=0)

theta, parts = enhanced_nirmal_step(state, np.array([0.5]), np.array([1.0]), hp, breakdown=True)

print(f"m_1 = {state.m[0]:.6g}   v_1 = {state.v[0]:.6g}")
for (name, delta), w in zip(parts.components().items(), hp.weights):
    print(f"{name:>9}: delta = {delta[0]: .6e}   weight {w:.2f}   contribution {w * delta[0]: .6e}")
print(f"    total: {parts.total[0]: .6e}")
print(f"theta_1 = {theta[0]:.6f}")

# %%
# The camel term dominates: without bias correction v_1 is only
# (1 - beta) g^2 = 1e-3, so m / sqrt(v) is about 3.16 on the first step.

# %%
# With the default kappa the knight term adds Gaussian jitter of size
# eta * kappa = 1e-5 per coordinate, scaled by its weight of 0.1.
noisy = OptimizerState.fresh(seed=0)
theta_noisy, parts = enhanced_nirmal_step(noisy, np.array([0.5]), np.array([1.0]), HyperParams(), breakdown=True)
print(f"knight delta with kappa=0.01: {parts.knight[0]: .3e}")
