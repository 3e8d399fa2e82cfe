"""
Build MNIST-format IDX files from mlxtend's bundled 5000-digit sample
=====================================================================

For machines without the official MNIST download. Writes 4000 training and
1000 disjoint test images (class balanced) in the standard file names, so
``NIRMAL_MNIST_DIR`` can point at the result. Needs ``pip install mlxtend``.

    python demos/make_mnist_sample.py data/mnist
"""
import sys
from pathlib import Path

import numpy as np
from mlxtend.data import mnist_data

from nirmal.data import MNIST_FILES, subset_indices, write_idx

out = Path(sys.argv[1] if len(sys.argv) > 1 else "data/mnist")
out.mkdir(parents=True, exist_ok=True)

X, y = mnist_data()
images = X.astype(np.uint8).reshape(-1, 28, 28)
labels = y.astype(np.uint8)
train = subset_indices(labels, 10, 400, seed=0)
test = np.setdiff1d(np.arange(len(labels)), train)

for split, idx in (("train", train), ("test", test)):
    img_name, lab_name = MNIST_FILES[split]
    write_idx(out / img_name, images[idx])
    write_idx(out / lab_name, labels[idx])
    print(f"{split}: {len(idx)} images -> {out / img_name}")
