"""Training-loop harness: run one optimizer on one task, or compare several.

A run is fully determined by its :class:`RunConfig`. Three independent
random streams are spawned from ``seed``: model initialisation, epoch
shuffling and the optimizer's knight noise.

Output files
------------
``trajectory.csv``
    ``step,loss`` with one row per optimizer step; ``loss`` is the batch
    loss (model tasks) or objective value (analytic tasks) *before* the step.
``epochs.csv``
    ``epoch,train_loss,test_loss,accuracy,f1``; accuracy and f1 are empty
    for analytic tasks. Row 0 holds the metrics of the initial parameters.
``record.json``
    The full :class:`RunRecord` (config snapshot, status, per-epoch
    metrics, final metrics, duration, and for analytic tasks the final
    point).
``compare`` tables are CSV with columns ``optimizer,accuracy,loss,f1``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import data as data_mod
from . import metrics
from .core import OPTIMIZER_NAMES, HyperParams, NonFiniteError, Optimizer
from .data import Dataset
from .models import Arch, Model, epoch_batches, init_params, loss_and_grad
from .objectives import Objective, quadratic, rosenbrock

log = logging.getLogger(__name__)

TASKS = ("quadratic", "rosenbrock", "logreg", "mlp")
MODEL_TASKS = ("logreg", "mlp")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """One benchmark run.

    ``subset`` is the number of training samples drawn class-balanced from
    the training file; the test subset is half that, drawn from the test
    file. ``subset=None`` uses both files in full. Analytic tasks run
    ``epochs * steps_per_epoch`` full-gradient steps.
    """

    optimizer: str = "enhanced-nirmal"
    task: str = "logreg"
    hyperparams: Dict[str, float] = field(default_factory=dict)
    epochs: int = 10
    batch_size: int = 64
    seed: int = 0
    weight_decay: float = 0.0
    data_dir: Optional[str] = None
    subset: Optional[int] = 1000
    dim: int = 10
    condition: float = 10.0
    steps_per_epoch: int = 200
    hidden: int = 64
    label: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        if self.optimizer not in OPTIMIZER_NAMES:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}; choose from {', '.join(OPTIMIZER_NAMES)}")
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; choose from {', '.join(TASKS)}")
        if self.epochs < 1 or self.batch_size < 1 or self.steps_per_epoch < 1:
            raise ConfigError("epochs, batch_size and steps_per_epoch must all be >= 1")
        if self.subset is not None and self.subset < 1:
            raise ConfigError(f"subset must be >= 1 or None, got {self.subset}")
        if "weight_decay" in self.hyperparams:
            raise ConfigError("set weight decay with the weight_decay field, not in hyperparams")
        object.__setattr__(self, "hyperparams", dict(self.hyperparams))
        try:
            self.hp()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad hyperparameters {self.hyperparams}: {exc}") from None

    def hp(self) -> HyperParams:
        return HyperParams.for_optimizer(self.optimizer, weight_decay=self.weight_decay, **self.hyperparams)

    @property
    def name(self) -> str:
        return self.label or self.optimizer

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass
class RunRecord:
    config: Dict[str, Any]
    status: str
    steps: List[float]
    epochs: List[Dict[str, Optional[float]]]
    initial: Dict[str, Optional[float]]
    duration_s: float = 0.0
    diverged_at_step: Optional[int] = None
    message: Optional[str] = None
    final_point: Optional[List[float]] = None

    @property
    def final(self) -> Dict[str, Optional[float]]:
        return self.epochs[-1] if self.epochs else self.initial

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        d = dataclasses.asdict(self)
        d["final"] = self.final
        if not include_timing:
            d.pop("duration_s")
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "loss"])
        for i, loss in enumerate(self.steps, 1):
            w.writerow([i, repr(loss)])
        return buf.getvalue()

    def epochs_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["epoch", "train_loss", "test_loss", "accuracy", "f1"]
        w.writerow(cols)
        for row in [self.initial] + self.epochs:
            w.writerow(["" if row.get(c) is None else repr(row[c]) for c in cols])
        return buf.getvalue()

    def save(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trajectory.csv").write_text(self.trajectory_csv())
        (out / "epochs.csv").write_text(self.epochs_csv())
        (out / "record.json").write_text(self.to_json())
        return out


def read_trajectory_csv(path) -> List[float]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["loss"]) for r in rows]


def _streams(seed: int):
    init, shuffle, noise = np.random.SeedSequence(seed).spawn(3)
    return (
        int(init.generate_state(1)[0]),
        np.random.default_rng(shuffle),
        int(noise.generate_state(1)[0]),
    )


def build_objective(config: RunConfig) -> Objective:
    if config.task == "quadratic":
        return quadratic(config.dim, config.condition)
    return rosenbrock(config.dim)


def load_task_data(config: RunConfig) -> Tuple[Dataset, Dataset]:
    """Train and test datasets for a model task, from the MNIST-format files in ``data_dir``."""
    if config.data_dir is None:
        raise FileNotFoundError(f"task {config.task!r} needs data_dir pointing at MNIST IDX files")
    train = data_mod.load_mnist(config.data_dir, "train")
    test = data_mod.load_mnist(config.data_dir, "test")
    if config.subset is not None:
        k = train.n_classes
        train = data_mod.subset(train, max(1, config.subset // k), config.seed)
        test = data_mod.subset(test, max(1, config.subset // 2 // k), config.seed + 1)
    return train, test


def _finite_or_none(x):
    return None if x is None else float(x)


def _run_objective(config: RunConfig, opt: Optimizer) -> RunRecord:
    obj = build_objective(config)
    theta = obj.x0.copy()
    value, grad = obj(theta)
    initial = {"epoch": 0, "train_loss": value, "test_loss": value, "accuracy": None, "f1": None}
    steps: List[float] = []
    epochs: List[Dict[str, Optional[float]]] = []
    status, where, message = "ok", None, None
    for epoch in range(1, config.epochs + 1):
        for _ in range(config.steps_per_epoch):
            if not math.isfinite(value) or not np.isfinite(grad).all():
                status, where, message = "diverged", len(steps) + 1, "non-finite objective"
                break
            steps.append(value)
            try:
                theta = opt.step(theta, grad)
            except NonFiniteError as exc:
                status, where, message = "diverged", len(steps), str(exc)
                break
            value, grad = obj(theta)
        if status != "ok":
            break
        if not math.isfinite(value):
            status, where, message = "diverged", len(steps), "non-finite objective"
            break
        epochs.append({"epoch": epoch, "train_loss": value, "test_loss": value, "accuracy": None, "f1": None})
    point = [float(x) for x in theta] if np.isfinite(theta).all() else None
    return RunRecord(config.to_dict(), status, steps, epochs, initial,
                     diverged_at_step=where, message=message, final_point=point)


def _run_model(config: RunConfig, opt: Optimizer, init_seed: int, shuffle_rng, train: Dataset,
               test: Dataset) -> RunRecord:
    hidden = config.hidden if config.task == "mlp" else None
    arch = Arch(train.n_features, train.n_classes, hidden)
    model = Model(arch, init_params(arch, init_seed))

    def epoch_metrics(epoch):
        ev = metrics.evaluate(model, test)
        return {
            "epoch": epoch,
            "train_loss": metrics.mean_loss(model, train),
            "test_loss": ev["loss"],
            "accuracy": ev["accuracy"],
            "f1": ev["f1"],
        }

    initial = epoch_metrics(0)
    steps: List[float] = []
    epochs = []
    status, where, message = "ok", None, None
    x_all, y_all = train.features, train.labels
    for epoch in range(1, config.epochs + 1):
        for idx in epoch_batches(len(train), config.batch_size, shuffle_rng):
            loss, grad = loss_and_grad(arch, model.params, x_all[idx], y_all[idx])
            if not math.isfinite(loss):
                status, where, message = "diverged", len(steps) + 1, "non-finite training loss"
                break
            steps.append(loss)
            try:
                model.params = opt.step(model.params, grad)
            except NonFiniteError as exc:
                status, where, message = "diverged", len(steps), str(exc)
                break
        if status != "ok":
            break
        row = epoch_metrics(epoch)
        if not all(math.isfinite(v) for k, v in row.items() if k != "epoch"):
            status, where, message = "diverged", len(steps), "non-finite evaluation metrics"
            break
        epochs.append(row)
        log.info("%s epoch %d: %s", config.name, epoch, row)
    return RunRecord(config.to_dict(), status, steps, epochs, initial,
                     diverged_at_step=where, message=message)


def run(config: RunConfig, train: Optional[Dataset] = None, test: Optional[Dataset] = None) -> RunRecord:
    """Execute one run.

    Model tasks read MNIST-format files from ``config.data_dir`` unless
    ``train``/``test`` datasets are passed in directly. A non-finite loss or
    update ends the run early with ``status == "diverged"``; it does not
    raise. When ``config.out`` is set the record files are written there.
    """
    init_seed, shuffle_rng, noise_seed = _streams(config.seed)
    opt = Optimizer(config.optimizer, config.hp(), seed=noise_seed)
    if config.task in MODEL_TASKS and (train is None or test is None):
        train, test = load_task_data(config)
    start = time.perf_counter()
    # overflow is expected when a run diverges; it is caught and recorded
    with np.errstate(over="ignore", invalid="ignore"):
        if config.task in MODEL_TASKS:
            record = _run_model(config, opt, init_seed, shuffle_rng, train, test)
        else:
            record = _run_objective(config, opt)
    record.duration_s = time.perf_counter() - start
    if record.diverged:
        log.warning("%s diverged at step %s: %s", config.name, record.diverged_at_step, record.message)
    if config.out:
        record.save(config.out)
    return record


TABLE_COLUMNS = ("optimizer", "accuracy", "loss", "f1")

_COMPARABLE_EXEMPT = {"optimizer", "hyperparams", "weight_decay", "label", "out"}


def _check_comparable(configs: Sequence[RunConfig]) -> None:
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configs")
    ref = configs[0].to_dict()
    for cfg in configs[1:]:
        d = cfg.to_dict()
        diff = sorted(k for k in ref if k not in _COMPARABLE_EXEMPT and ref[k] != d[k])
        if diff:
            raise ConfigError(f"configs may differ only in optimizer/hyperparameters; {cfg.name} differs in {diff}")
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate run names {names}; set label to tell them apart")


def _row_key(cfg: RunConfig):
    return (OPTIMIZER_NAMES.index(cfg.optimizer), cfg.name, json.dumps(cfg.hyperparams, sort_keys=True))


def compare(configs: Sequence[RunConfig], workers: int = 1, train: Optional[Dataset] = None,
            test: Optional[Dataset] = None) -> Tuple[List[Dict[str, Any]], List[RunRecord]]:
    """Run every config and tabulate final accuracy, loss and weighted F1.

    Rows come back in a fixed optimizer order regardless of input order.
    Runs share no state, so ``workers > 1`` runs them on a thread pool.
    """
    configs = list(configs)
    _check_comparable(configs)
    ordered = sorted(configs, key=_row_key)
    if configs[0].task in MODEL_TASKS and (train is None or test is None):
        train, test = load_task_data(ordered[0])

    def one(cfg):
        return run(cfg, train, test)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, ordered))
    else:
        records = [one(c) for c in ordered]
    rows = []
    for cfg, rec in zip(ordered, records):
        fin = rec.final
        rows.append({
            "optimizer": cfg.name,
            "accuracy": _finite_or_none(fin.get("accuracy")),
            "loss": _finite_or_none(fin.get("test_loss")),
            "f1": _finite_or_none(fin.get("f1")),
        })
    return rows, records


def table_csv(rows: Sequence[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in rows:
        w.writerow([row["optimizer"]] + ["" if row[c] is None else repr(row[c]) for c in TABLE_COLUMNS[1:]])
    return buf.getvalue()


def parse_table_csv(text: str) -> List[Dict[str, Any]]:
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append({c: (r[c] if c == "optimizer" else (float(r[c]) if r[c] != "" else None))
                     for c in TABLE_COLUMNS})
    return rows


def format_table(rows: Sequence[Dict[str, Any]]) -> str:
    """Plain-text rendering in the layout of a results table."""
    def fmt(v, spec):
        width = int(spec.split(".")[0])
        return f"{'-':>{width}}" if v is None else format(v, spec)

    lines = [f"{'optimizer':<18} {'accuracy (%)':>12} {'loss':>10} {'f1':>10}"]
    for r in rows:
        acc = None if r["accuracy"] is None else 100 * r["accuracy"]
        lines.append(f"{r['optimizer']:<18} {fmt(acc, '12.2f')} {fmt(r['loss'], '10.6f')} {fmt(r['f1'], '10.6f')}")
    return "\n".join(lines)


def load_compare_config(path) -> List[RunConfig]:
    """Read a JSON run list: either ``[{...}, ...]`` or ``{"defaults": {...}, "runs": [{...}, ...]}``."""
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, list):
        defaults, runs = {}, doc
    elif isinstance(doc, dict) and "runs" in doc:
        defaults, runs = doc.get("defaults", {}), doc["runs"]
        extra = set(doc) - {"defaults", "runs"}
        if extra:
            raise ConfigError(f"unknown top-level keys in {path}: {sorted(extra)}")
    else:
        raise ConfigError(f"{path}: expected a list of runs or an object with a 'runs' list")
    return [RunConfig.from_dict({**defaults, **r}) for r in runs]
