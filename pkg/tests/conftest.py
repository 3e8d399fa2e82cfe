import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nirmal.data import Dataset, subset_indices, write_idx  # noqa: E402

MNIST_CANDIDATES = [os.environ.get("NIRMAL_MNIST_DIR"), "data/mnist", "data/MNIST/raw", "~/.cache/mnist"]


def find_mnist_dir():
    from nirmal.data import mnist_available

    for cand in MNIST_CANDIDATES:
        if cand and mnist_available(Path(cand).expanduser()):
            return Path(cand).expanduser()
    return None


def mnist_sample_from_mlxtend(out):
    """mlxtend's 5000 real MNIST digits as 4000 train / 1000 test IDX files, or None."""
    try:
        from mlxtend.data import mnist_data
    except ImportError:
        return None
    X, y = mnist_data()
    images = X.astype(np.uint8).reshape(-1, 28, 28)
    labels = y.astype(np.uint8)
    train = subset_indices(labels, 10, 400, seed=0)
    test = np.setdiff1d(np.arange(labels.shape[0]), train)
    write_idx(out / "train-images-idx3-ubyte", images[train])
    write_idx(out / "train-labels-idx1-ubyte", labels[train])
    write_idx(out / "t10k-images-idx3-ubyte", images[test])
    write_idx(out / "t10k-labels-idx1-ubyte", labels[test])
    return out


@pytest.fixture(scope="session")
def full_mnist_dir():
    path = find_mnist_dir()
    if path is None:
        pytest.skip("official MNIST IDX files not found; set NIRMAL_MNIST_DIR")
    return path


@pytest.fixture(scope="session")
def mnist_dir(tmp_path_factory):
    """Official MNIST files if present, else the mlxtend sample of real MNIST digits."""
    path = find_mnist_dir()
    if path is None:
        path = mnist_sample_from_mlxtend(tmp_path_factory.mktemp("mnist_sample"))
    if path is None:
        pytest.skip("MNIST IDX files not found; set NIRMAL_MNIST_DIR to a directory with the "
                    "four uncompressed files (train-images-idx3-ubyte, ...) or install mlxtend")
    return path


@pytest.fixture(scope="session")
def digits_idx_dir(tmp_path_factory):
    """sklearn's 8x8 digits written out in MNIST file layout, disjoint train/test files."""
    from sklearn.datasets import load_digits

    d = load_digits()
    images = np.rint(d.images * 255.0 / 16.0).astype(np.uint8)
    labels = d.target.astype(np.uint8)
    train_idx = subset_indices(labels, 10, 120, seed=0)
    test_idx = subset_indices(labels, 10, 50, seed=1, exclude=train_idx)
    out = tmp_path_factory.mktemp("digits")
    write_idx(out / "train-images-idx3-ubyte", images[train_idx])
    write_idx(out / "train-labels-idx1-ubyte", labels[train_idx])
    write_idx(out / "t10k-images-idx3-ubyte", images[test_idx])
    write_idx(out / "t10k-labels-idx1-ubyte", labels[test_idx])
    return out


@pytest.fixture
def tiny_dataset():
    rng = np.random.default_rng(7)
    x = rng.uniform(0, 1, size=(12, 5))
    y = np.arange(12) % 3
    return Dataset(x, y, 3)


_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = (marker.args[0], marker.args[1])
    if call.when == "setup" and call.excinfo is not None:
        status = "SKIP" if call.excinfo.errisinstance(pytest.skip.Exception) else "FAIL"
        _CRITERIA[key] = status
    elif call.when == "call":
        if call.excinfo is None:
            _CRITERIA.setdefault(key, "PASS")
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            _CRITERIA[key] = "SKIP"
        else:
            _CRITERIA[key] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, desc), status in sorted(_CRITERIA.items(), key=lambda kv: int(kv[0][0])):
        terminalreporter.write_line(f"[{status}] criterion {num}: {desc}")
