"""Spatial and frequency classifier assembly.

Both models end in a 512-feature vector feeding a 5-class label head.
The spatial model is a four-conv CNN over normalized image slices, with
an optional domain head behind a gradient-reversal layer for adversarial
domain adaptation. The frequency model ingests the slice's spectrum (or
raw k-space directly) and extracts features with two stages of per-bin
complex filters, so no inverse transform is ever needed.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import nn
from .artifacts import N_CLASSES
from .data_io import minmax_normalize, resize_bilinear

FEATURE_DIM = 512


@dataclass(frozen=True)
class SpatialModelConfig:
    input_hw: tuple = (90, 90)
    conv_channels: tuple = (8, 8, 16, 16)   # pairs: pool+dropout after each
    kernel: int = 3
    feature_dim: int = FEATURE_DIM
    hidden: int = 128
    n_classes: int = N_CLASSES
    domain_hidden: tuple = (256, 64)
    with_domain_head: bool = False
    pool_dropout: float = 0.25
    head_dropout: float = 0.5
    dtype: str = "float32"
    seed: int = 0

    def __post_init__(self):
        if self.feature_dim != FEATURE_DIM:
            raise ValueError(f"feature width is fixed at {FEATURE_DIM}")
        if len(self.conv_channels) != 4:
            raise ValueError("expected four conv layers")
        if min(self.input_hw) < 4:
            raise ValueError("input too small for two pooling stages")


@dataclass(frozen=True)
class FrequencyModelConfig:
    input_hw: tuple = (90, 90)
    stage_channels: tuple = (3, 3)    # two pointwise stages: 1->3, 3->3
    crop_hw: tuple = (48, 48)         # spectral pool output
    feature_dim: int = FEATURE_DIM
    hidden: int = 128
    n_classes: int = N_CLASSES
    dropout: float = 0.25
    head_dropout: float = 0.5
    dtype: str = "complex64"
    seed: int = 0

    def __post_init__(self):
        if self.feature_dim != FEATURE_DIM:
            raise ValueError(f"feature width is fixed at {FEATURE_DIM}")
        if len(self.stage_channels) != 2:
            raise ValueError("the pointwise stage count is fixed at two")
        if (self.crop_hw[0] > self.input_hw[0]
                or self.crop_hw[1] > self.input_hw[1]):
            raise ValueError("spectral crop cannot exceed the input size")


def _label_head(rng, dtype, feature_dim, hidden, n_classes, drop):
    return [
        nn.Dropout(drop),
        nn.Dense(feature_dim, hidden, rng=rng, dtype=dtype),
        nn.ReLU(),
        nn.Dense(hidden, n_classes, rng=rng, dtype=dtype),
    ]


class Model:
    """A feature extractor plus label head and optional domain head."""

    def __init__(self, domain, config, feature_layers, label_head,
                 domain_head=None, rng=None):
        self.domain = domain
        self.config = config
        self.feature_layers = feature_layers
        self.label_head = label_head
        self.domain_head = domain_head
        self.rng = np.random.default_rng() if rng is None else rng
        self.grl = domain_head[0] if domain_head else None
        for layer in self._all_layers():
            if isinstance(layer, nn.Dropout):
                layer.rng = self.rng
        if feature_layers:
            feature_layers[0].needs_input_grad = False

    def _all_layers(self):
        out = list(self.feature_layers) + list(self.label_head)
        if self.domain_head:
            out += list(self.domain_head)
        return out

    def parameters(self):
        out = []
        for layer in self._all_layers():
            out.extend(layer.params)
        return out

    def gradients(self):
        out = []
        for layer in self._all_layers():
            out.extend(layer.grads)
        return out

    def zero_grads(self):
        for layer in self._all_layers():
            layer.zero_grads()

    def n_parameters(self):
        return int(sum(p.size * (2 if np.iscomplexobj(p) else 1)
                       for p in self.parameters()))

    # -- forward / backward plumbing -------------------------------------

    def prepare(self, batch):
        """Map a (B, H, W) real or complex batch to the network input.

        Real batches are taken as already-normalized images; the
        frequency model transforms them to spectra. Complex batches are
        raw k-space and are only legal for the frequency model. Spectra
        are scaled per sample by their peak magnitude so both entry
        points see the identical, bounded representation.
        """
        batch = np.asarray(batch)
        if batch.ndim == 2:
            batch = batch[None]
        h, w = self.config.input_hw
        if batch.shape[1:] != (h, w):
            raise ValueError(
                f"expected (B,{h},{w}) input, got {batch.shape}")
        if self.domain == "spatial":
            if np.iscomplexobj(batch):
                raise ValueError("spatial model takes real images, not k-space")
            dt = np.dtype(self.config.dtype)
            return np.ascontiguousarray(batch[..., None].astype(dt))
        if np.iscomplexobj(batch):
            k = batch.astype(np.complex128)
        else:
            k = np.fft.fft2(batch.astype(np.float64), axes=(1, 2))
        peak = np.abs(k).max(axis=(1, 2), keepdims=True)
        k = k / np.maximum(peak, 1e-30)
        dt = np.dtype(self.config.dtype)
        return np.ascontiguousarray(k[..., None].astype(dt))

    def forward_features(self, x, training=False):
        for layer in self.feature_layers:
            x = layer.forward(x, training=training)
        return x

    def forward_label(self, features, training=False):
        x = features
        for layer in self.label_head:
            x = layer.forward(x, training=training)
        return x

    def forward_domain(self, features, training=False):
        if not self.domain_head:
            raise ValueError("model was built without a domain head")
        x = features
        for layer in self.domain_head:
            x = layer.forward(x, training=training)
        return x

    def forward_logits(self, prepared, training=False):
        return self.forward_label(
            self.forward_features(prepared, training=training),
            training=training)

    def backward_label(self, g):
        for layer in reversed(self.label_head):
            g = layer.backward(g)
        return g

    def backward_domain(self, g):
        for layer in reversed(self.domain_head):
            g = layer.backward(g)
        return g

    def backward_features(self, g):
        for layer in reversed(self.feature_layers):
            g = layer.backward(g)
        return g

    # -- inference --------------------------------------------------------

    def predict_proba(self, batch, chunk=256):
        prepared = self.prepare(batch)
        out = []
        for s in range(0, prepared.shape[0], chunk):
            logits = self.forward_logits(prepared[s:s + chunk], training=False)
            out.append(nn.softmax(logits.astype(np.float64)))
        return np.concatenate(out, axis=0)

    # -- persistence -------------------------------------------------------

    def save(self, path):
        meta = {"domain": self.domain,
                "config": dataclasses.asdict(self.config)}
        nn.save_checkpoint(path, meta, self.parameters())

    @classmethod
    def load(cls, path):
        meta, arrays = nn.load_checkpoint(path)
        cfg_dict = {k: tuple(v) if isinstance(v, list) else v
                    for k, v in meta["config"].items()}
        if meta["domain"] == "spatial":
            model = build_spatial_model(SpatialModelConfig(**cfg_dict))
        elif meta["domain"] == "frequency":
            model = build_frequency_model(FrequencyModelConfig(**cfg_dict))
        else:
            raise ValueError(f"unknown model domain {meta['domain']!r}")
        params = model.parameters()
        if len(params) != len(arrays):
            raise ValueError("checkpoint parameter count mismatch")
        for p, a in zip(params, arrays):
            if p.shape != a.shape:
                raise ValueError("checkpoint parameter shape mismatch")
            p[...] = a.astype(p.dtype)
        return model


def build_spatial_model(cfg: SpatialModelConfig) -> Model:
    rng = np.random.default_rng(cfg.seed)
    dt = np.dtype(cfg.dtype)
    h, w = cfg.input_hw
    c1, c2, c3, c4 = cfg.conv_channels
    layers = [
        nn.Conv2D(1, c1, cfg.kernel, rng=rng, dtype=dt),
        nn.ReLU(),
        nn.Conv2D(c1, c2, cfg.kernel, rng=rng, dtype=dt),
        nn.ReLU(),
        nn.MaxPool2(),
        nn.Dropout(cfg.pool_dropout),
        nn.Conv2D(c2, c3, cfg.kernel, rng=rng, dtype=dt),
        nn.ReLU(),
        nn.Conv2D(c3, c4, cfg.kernel, rng=rng, dtype=dt),
        nn.ReLU(),
        nn.MaxPool2(),
        nn.Dropout(cfg.pool_dropout),
        nn.Flatten(),
    ]
    flat = (h // 2 // 2) * (w // 2 // 2) * c4
    layers += [nn.Dense(flat, cfg.feature_dim, rng=rng, dtype=dt), nn.ReLU()]
    label_head = _label_head(rng, dt, cfg.feature_dim, cfg.hidden,
                             cfg.n_classes, cfg.head_dropout)
    domain_head = None
    if cfg.with_domain_head:
        d1, d2 = cfg.domain_hidden
        domain_head = [
            nn.GradientReversal(1.0),
            nn.Dense(cfg.feature_dim, d1, rng=rng, dtype=dt),
            nn.ReLU(),
            nn.Dense(d1, d2, rng=rng, dtype=dt),
            nn.ReLU(),
            nn.Dense(d2, 2, rng=rng, dtype=dt),
        ]
    return Model("spatial", cfg, layers, label_head, domain_head, rng=rng)


def build_frequency_model(cfg: FrequencyModelConfig) -> Model:
    rng = np.random.default_rng(cfg.seed)
    cdt = np.dtype(cfg.dtype)
    rdt = np.zeros(1, cdt).real.dtype
    h, w = cfg.input_hw
    s1, s2 = cfg.stage_channels
    oh, ow = cfg.crop_hw
    layers = [
        nn.ComplexPointwise(1, s1, h, w, rng=rng, dtype=cdt),
        nn.ModReLU(s1, dtype=cdt),
        nn.ComplexPointwise(s1, s2, h, w, rng=rng, dtype=cdt),
        nn.SpectralPool(oh, ow),
        nn.Dropout(cfg.dropout),
        nn.ComplexToReal(),
        nn.Dense(2 * oh * ow * s2, cfg.feature_dim, rng=rng, dtype=rdt),
        nn.ReLU(),
    ]
    label_head = _label_head(rng, rdt, cfg.feature_dim, cfg.hidden,
                             cfg.n_classes, cfg.head_dropout)
    return Model("frequency", cfg, layers, label_head, rng=rng)


def prepare_image(model, img):
    """Resize and normalize one raw image to the model's input contract."""
    img = np.asarray(img)
    if np.iscomplexobj(img):
        h, w = model.config.input_hw
        if img.shape != (h, w):
            raise ValueError(
                f"k-space input must match the model size {(h, w)}, "
                f"got {img.shape}")
        return img
    h, w = model.config.input_hw
    if img.shape != (h, w):
        img = resize_bilinear(img, h, w)
    return minmax_normalize(img)


def predict(model, img_or_kspace):
    """Class probabilities (length-5, summing to 1) for one input."""
    x = prepare_image(model, img_or_kspace)
    return model.predict_proba(x[None])[0]
