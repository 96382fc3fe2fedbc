"""Training loops: supervised, adversarial domain adaptation, k-fold CV.

Splits are always made at the granularity of the clean source image, so
a slice and its corrupted variants can never straddle the train/test
boundary. All shuffling and initialization flows from explicit seeds;
with a fixed BLAS thread count, repeated runs are bit-identical.
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .artifacts import LabeledSample
from .data_io import minmax_normalize, resize_bilinear
from .metrics import MetricsReport, evaluate_scores
from .models import Model
from .nn import Adam, softmax_cross_entropy


@dataclass
class ArrayDataset:
    """Normalized images plus labels, grouped by their clean source image."""
    images: np.ndarray           # (N, H, W) float32, already normalized
    labels: np.ndarray           # (N,) int64
    groups: np.ndarray           # (N,) source-image keys
    domains: np.ndarray          # (N,) int64, 0 = source / 1 = target

    def __post_init__(self):
        n = self.images.shape[0]
        if not (len(self.labels) == len(self.groups) == len(self.domains) == n):
            raise ValueError("dataset arrays must share their first dimension")

    def __len__(self):
        return self.images.shape[0]

    def subset(self, idx):
        return ArrayDataset(self.images[idx], self.labels[idx],
                            self.groups[idx], self.domains[idx])


def dataset_from_samples(samples: List[LabeledSample],
                         input_hw=(90, 90)) -> ArrayDataset:
    """Resize/normalize labeled samples into training arrays."""
    if not samples:
        raise ValueError("no samples")
    h, w = input_hw
    images = np.empty((len(samples), h, w), np.float32)
    for i, s in enumerate(samples):
        img = s.image
        if img.shape != (h, w):
            img = resize_bilinear(img, h, w)
        images[i] = minmax_normalize(img)
    labels = np.array([s.class_id for s in samples], np.int64)
    groups = np.array([s.source_id for s in samples])
    domains = np.array([s.domain for s in samples], np.int64)
    return ArrayDataset(images, labels, groups, domains)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 25
    batch_size: int = 128
    lr: float = 1e-3
    train_fraction: float = 0.75   # 0.25 for the weakly supervised protocol
    seed: int = 0
    mode: str = "supervised"       # supervised | weak | dann
    grl_lambda: Optional[float] = None   # None = annealed schedule
    grl_gamma: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train fraction must be in (0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")
        if self.mode not in ("supervised", "weak", "dann"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class TrainHistory:
    label_loss: List[float] = field(default_factory=list)
    domain_loss: Optional[List[float]] = None
    epoch_seconds: List[float] = field(default_factory=list)
    val_accuracy: List[float] = field(default_factory=list)

    def to_records(self):
        out = []
        for e in range(len(self.label_loss)):
            rec = {"epoch": e,
                   "label_loss": self.label_loss[e],
                   "epoch_seconds": self.epoch_seconds[e],
                   "val_accuracy": self.val_accuracy[e]}
            if self.domain_loss is not None:
                rec["domain_loss"] = self.domain_loss[e]
            out.append(rec)
        return out


def split_by_group(dataset: ArrayDataset, train_fraction, seed):
    """Deterministic train/test index split over unique source images.

    Exactly round(train_fraction * n_groups) groups land in the train
    side (clamped so neither side is empty).
    """
    groups = np.unique(dataset.groups)
    if len(groups) < 2:
        raise ValueError("need at least two source images to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(groups))
    n_train = int(round(train_fraction * len(groups)))
    n_train = min(max(n_train, 1), len(groups) - 1)
    train_groups = set(groups[perm[:n_train]])
    mask = np.array([g in train_groups for g in dataset.groups])
    return np.flatnonzero(mask), np.flatnonzero(~mask)


def evaluate(model: Model, dataset: ArrayDataset, idx=None) -> MetricsReport:
    idx = np.arange(len(dataset)) if idx is None else np.asarray(idx)
    scores = model.predict_proba(dataset.images[idx])
    return evaluate_scores(scores, dataset.labels[idx],
                           n_classes=model.config.n_classes)


def _accuracy(model, images, labels):
    scores = model.predict_proba(images)
    return float((scores.argmax(axis=1) == labels).mean())


# per-epoch validation probes are capped to bound their cost on large runs
_VAL_CAP = 512


def _val_probe(dataset, test_idx, seed):
    if len(test_idx) <= _VAL_CAP:
        return test_idx
    rng = np.random.default_rng(seed)
    return test_idx[rng.choice(len(test_idx), _VAL_CAP, replace=False)]


def grl_lambda(progress, gamma=10.0):
    """Annealed reversal strength: 0 at the start, saturating toward 1."""
    return 2.0 / (1.0 + np.exp(-gamma * progress)) - 1.0


def train_supervised(model: Model, dataset: ArrayDataset, cfg: TrainConfig,
                     split=None):
    """Train the label path; returns (model, history).

    The dataset is split by source image according to cfg.train_fraction
    (pass an explicit (train_idx, test_idx) pair to reuse a split);
    validation accuracy is recorded on the held-out side each epoch.
    """
    if len(np.unique(dataset.labels)) < 2:
        raise ValueError("dataset must contain at least two classes")
    train_idx, test_idx = (split if split is not None else
                           split_by_group(dataset, cfg.train_fraction, cfg.seed))
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise ValueError("degenerate split: empty train or test side")
    x_train = model.prepare(dataset.images[train_idx])
    y_train = dataset.labels[train_idx]
    rng = np.random.default_rng(cfg.seed)
    opt = Adam(model.parameters(), lr=cfg.lr)
    history = TrainHistory()
    probe = _val_probe(dataset, test_idx, cfg.seed)
    n = len(train_idx)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        x_ep, y_ep = x_train[order], y_train[order]
        losses = []
        t0 = time.perf_counter()
        for s in range(0, n, cfg.batch_size):
            xb = x_ep[s:s + cfg.batch_size]
            model.zero_grads()
            logits = model.forward_logits(xb, training=True)
            loss, dlogits = softmax_cross_entropy(logits, y_ep[s:s + cfg.batch_size])
            model.backward_features(model.backward_label(dlogits))
            opt.step(model.gradients())
            losses.append(loss)
        history.epoch_seconds.append(time.perf_counter() - t0)
        history.label_loss.append(float(np.mean(losses)))
        history.val_accuracy.append(
            _accuracy(model, dataset.images[probe], dataset.labels[probe]))
    return model, history


def train_dann(model: Model, source: ArrayDataset, target: ArrayDataset,
               cfg: TrainConfig, source_split=None):
    """Adversarial adaptation: label loss on source, domain loss on both.

    Every step takes half a batch from the labeled source train split and
    half from the unlabeled target set; the domain head sees all of it
    through the gradient-reversal layer whose strength follows the
    annealed schedule (or cfg.grl_lambda when fixed). Returns
    (model, history) with both losses recorded.
    """
    if model.domain_head is None:
        raise ValueError("model was built without a domain head")
    if len(target) == 0:
        raise ValueError("empty target set")
    if len(np.unique(source.labels)) < 2:
        raise ValueError("source must contain at least two classes")
    train_idx, test_idx = (source_split if source_split is not None else
                           split_by_group(source, cfg.train_fraction, cfg.seed))
    half = max(cfg.batch_size // 2, 1)
    x_src = model.prepare(source.images[train_idx])
    y_src = source.labels[train_idx]
    x_tgt = model.prepare(target.images)
    rng = np.random.default_rng(cfg.seed)
    opt = Adam(model.parameters(), lr=cfg.lr)
    history = TrainHistory(domain_loss=[])
    steps_per_epoch = max(1, int(np.ceil(len(train_idx) / half)))
    total_steps = steps_per_epoch * cfg.epochs
    step = 0
    probe = _val_probe(source, test_idx, cfg.seed)
    tgt_order = rng.permutation(len(x_tgt))
    tgt_pos = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(len(train_idx))
        label_losses, domain_losses = [], []
        t0 = time.perf_counter()
        for s in range(0, len(order), half):
            src_batch = order[s:s + half]
            n_src = len(src_batch)
            take = []
            while len(take) < half:
                if tgt_pos == len(tgt_order):
                    tgt_order = rng.permutation(len(x_tgt))
                    tgt_pos = 0
                take.append(tgt_order[tgt_pos])
                tgt_pos += 1
            tgt_batch = np.array(take)
            model.grl.lam = (cfg.grl_lambda if cfg.grl_lambda is not None
                             else grl_lambda(step / max(total_steps - 1, 1),
                                             cfg.grl_gamma))
            x = np.concatenate([x_src[src_batch], x_tgt[tgt_batch]], axis=0)
            d = np.concatenate([np.zeros(n_src, np.int64),
                                np.ones(len(tgt_batch), np.int64)])
            model.zero_grads()
            feats = model.forward_features(x, training=True)
            label_logits = model.forward_label(feats[:n_src], training=True)
            label_loss, dlabel = softmax_cross_entropy(label_logits,
                                                       y_src[src_batch])
            domain_logits = model.forward_domain(feats, training=True)
            domain_loss, ddomain = softmax_cross_entropy(domain_logits, d)
            dfeat = model.backward_domain(ddomain)
            dfeat[:n_src] += model.backward_label(dlabel)
            model.backward_features(dfeat)
            opt.step(model.gradients())
            label_losses.append(label_loss)
            domain_losses.append(domain_loss)
            step += 1
        history.epoch_seconds.append(time.perf_counter() - t0)
        history.label_loss.append(float(np.mean(label_losses)))
        history.domain_loss.append(float(np.mean(domain_losses)))
        history.val_accuracy.append(
            _accuracy(model, source.images[probe], source.labels[probe]))
    return model, history


def cross_validate(dataset: ArrayDataset, cfg: TrainConfig, k, model_builder):
    """Group-level k-fold CV; returns (per-fold reports, {metric: (mean, std)}).

    Groups are shuffled by cfg.seed and dealt round-robin into k folds,
    which keeps classes stratified because every source image contributes
    one sample per class.
    """
    if k < 2:
        raise ValueError("k-fold cross-validation needs k >= 2")
    groups = np.unique(dataset.groups)
    if k > len(groups):
        raise ValueError(f"k={k} exceeds the {len(groups)} source images")
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(groups))
    fold_of = {groups[g]: i % k for i, g in enumerate(order)}
    sample_fold = np.array([fold_of[g] for g in dataset.groups])
    reports = []
    for fold in range(k):
        test_idx = np.flatnonzero(sample_fold == fold)
        train_idx = np.flatnonzero(sample_fold != fold)
        model = model_builder(cfg.seed + fold)
        model, _ = train_supervised(model, dataset, cfg,
                                    split=(train_idx, test_idx))
        reports.append(evaluate(model, dataset, test_idx))
    agg = {}
    for name in ("accuracy", "precision_micro", "recall_micro",
                 "f_measure_micro", "precision_macro", "recall_macro",
                 "f_measure_macro"):
        vals = [getattr(r, name) for r in reports]
        agg[name] = (float(np.mean(vals)), float(np.std(vals)))
    aucs = [r.auc_macro for r in reports if r.auc_macro is not None]
    if aucs:
        agg["auc_macro"] = (float(np.mean(aucs)), float(np.std(aucs)))
    return reports, agg


def domain_adaptation_benchmark(source: ArrayDataset, target: ArrayDataset,
                                cfg: TrainConfig, seeds, model_builder):
    """Three-mode protocol: source-only floor, adaptation, target ceiling.

    For each seed: (1) supervised training on the source train split,
    evaluated on the held-out target test side (lower bound); (2)
    adversarial adaptation using the target adapt side without labels,
    same evaluation (proposed); (3) supervised training on the labeled
    target adapt side (upper bound). Gap coverage is
    (proposed - lower) / (upper - lower) * 100.
    """
    rows = []
    for seed in seeds:
        run_cfg = TrainConfig(
            epochs=cfg.epochs, batch_size=cfg.batch_size, lr=cfg.lr,
            train_fraction=cfg.train_fraction, seed=seed, mode="dann",
            grl_lambda=cfg.grl_lambda, grl_gamma=cfg.grl_gamma)
        tgt_adapt_idx, tgt_test_idx = split_by_group(
            target, run_cfg.train_fraction, seed)
        src_split = split_by_group(source, run_cfg.train_fraction, seed)
        tgt_test = target.subset(tgt_test_idx)

        lower_model = model_builder(seed, with_domain_head=False)
        train_supervised(lower_model, source, run_cfg, split=src_split)
        lower = _accuracy(lower_model, tgt_test.images, tgt_test.labels)

        dann_model = model_builder(seed, with_domain_head=True)
        train_dann(dann_model, source, target.subset(tgt_adapt_idx),
                   run_cfg, source_split=src_split)
        proposed = _accuracy(dann_model, tgt_test.images, tgt_test.labels)

        upper_model = model_builder(seed, with_domain_head=False)
        train_supervised(upper_model, target, run_cfg,
                         split=(tgt_adapt_idx, tgt_test_idx))
        upper = _accuracy(upper_model, tgt_test.images, tgt_test.labels)

        coverage = (100.0 * (proposed - lower) / (upper - lower)
                    if upper > lower else None)
        rows.append({"seed": seed, "source_only": lower, "proposed": proposed,
                     "train_on_target": upper, "gap_coverage": coverage})
    return rows


def format_gap_coverage(rows):
    """Tables 4/5-style lines: mode accuracies with coverage in parentheses."""
    lines = []
    for r in rows:
        cov = ("n/a" if r["gap_coverage"] is None
               else f"{r['gap_coverage']:+.2f}%")
        lines.append(
            f"seed {r['seed']}: source only {100 * r['source_only']:.2f}  "
            f"proposed {100 * r['proposed']:.2f} ({cov})  "
            f"train on target {100 * r['train_on_target']:.2f}")
    return "\n".join(lines)
