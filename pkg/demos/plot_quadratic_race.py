"""
Five optimizers on analytic test functions
==========================================

An ill-conditioned quadratic and the 2-d Rosenbrock valley, each optimizer
at its published defaults. Runs are deterministic in the seed.
"""
import numpy as np

from nirmal.core import OPTIMIZER_NAMES
from nirmal.harness import RunConfig, run

for task, extra in (("quadratic", dict(dim=10, condition=10.0)), ("rosenbrock", dict(dim=2))):
    print(f"\n{task}")
    for name in OPTIMIZER_NAMES:
        rec = run(RunConfig(optimizer=name, task=task, epochs=10, steps_per_epoch=200, seed=0, **extra))
        norm = np.linalg.norm(np.asarray(rec.final_point) - (0 if task == "quadratic" else 1))
        print(f"  {name:<16} f = {rec.final['train_loss']:.3e}   |x - x*| = {norm:.3e}   ({rec.status})")

# %%
# The same thing through the comparison helper, which sorts rows into a fixed
# optimizer order and can run them on a thread pool.
from nirmal.harness import compare, format_table  # noqa: E402

rows, _ = compare([RunConfig(optimizer=n, task="quadratic", epochs=5) for n in OPTIMIZER_NAMES], workers=5)
print()
print(format_table(rows))
