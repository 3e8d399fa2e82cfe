"""
Logistic regression on an MNIST subset
======================================

Trains each optimizer for 10 epochs (batch 64) on 1000 class-balanced
training images and evaluates on 500 test images after every epoch. Point
``NIRMAL_MNIST_DIR`` at a directory holding the four uncompressed MNIST IDX
files (or build a stand-in with ``make_mnist_sample.py``).
"""
import os
import sys
from pathlib import Path

from nirmal.core import OPTIMIZER_NAMES
from nirmal.data import mnist_available
from nirmal.harness import RunConfig, format_table, run

data_dir = os.environ.get("NIRMAL_MNIST_DIR", "data/mnist")
if not mnist_available(data_dir):
    sys.exit(f"no MNIST IDX files in {data_dir}; set NIRMAL_MNIST_DIR")

out = Path("mnist_runs")
records = {}
for name in OPTIMIZER_NAMES:
    records[name] = run(RunConfig(optimizer=name, task="logreg", data_dir=data_dir, subset=1000,
                                  seed=0, out=str(out / name)))

rows = [{"optimizer": n, "accuracy": r.final["accuracy"], "loss": r.final["test_loss"], "f1": r.final["f1"]}
        for n, r in records.items()]
print(format_table(rows))
print(f"\nper-run trajectory.csv / epochs.csv / record.json under {out}/")

# %%
# Test accuracy per epoch, one line per optimizer.
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit(0)

fig, ax = plt.subplots(figsize=(6, 4))
for name, rec in records.items():
    ax.plot([e["epoch"] for e in rec.epochs], [100 * e["accuracy"] for e in rec.epochs], marker="o", label=name)
ax.set_xlabel("epoch")
ax.set_ylabel("test accuracy (%)")
ax.legend()
fig.tight_layout()
fig.savefig(out / "test_accuracy.png", dpi=120)
print(f"wrote {out / 'test_accuracy.png'}")
