"""Image and manifest I/O, resizing, normalization and augmentation.

File formats
------------
Raw float grid (`.kqi`): 16-byte header -- magic ``KQIM``, uint32 version,
uint32 height, uint32 width, all little-endian -- followed by
height*width float32 values, row-major little-endian. Round trips are
bit-exact.

Raster images: 8-bit and 16-bit grayscale (PNG etc. via Pillow), scaled
to [0, 1] on load as value / (2**bits - 1).

Manifest (`.jsonl`): one JSON object per line, fixed key order
``sample_id, image, class_id, severity, rng_seed, domain, split``.
Unknown keys are rejected with the offending line number.
"""

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from PIL import Image

from .artifacts import SeverityRecord

RAW_MAGIC = b"KQIM"
RAW_VERSION = 1
RAW_EXT = ".kqi"

KSPACE_MAGIC = b"KQKS"
KSPACE_EXT = ".kqk"


def save_raw(path, img):
    a = np.asarray(img, dtype=np.float32)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D grid, got shape {a.shape}")
    header = RAW_MAGIC + np.array(
        [RAW_VERSION, a.shape[0], a.shape[1]], dtype="<u4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(a.astype("<f4", copy=False).tobytes())


def load_raw(path):
    with open(path, "rb") as f:
        header = f.read(16)
        if len(header) != 16 or header[:4] != RAW_MAGIC:
            raise ValueError(f"{path}: not a raw float grid (bad magic)")
        version, height, width = np.frombuffer(header[4:], dtype="<u4")
        if version != RAW_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        payload = f.read()
    expected = int(height) * int(width) * 4
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}")
    a = np.frombuffer(payload, dtype="<f4").reshape(int(height), int(width))
    return a.astype(np.float32)


def save_kspace(path, k):
    """Raw complex grid: like the float format but complex64 payload."""
    a = np.asarray(k, dtype=np.complex64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D grid, got shape {a.shape}")
    header = KSPACE_MAGIC + np.array(
        [RAW_VERSION, a.shape[0], a.shape[1]], dtype="<u4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(a.astype("<c8", copy=False).tobytes())


def load_kspace(path):
    with open(path, "rb") as f:
        header = f.read(16)
        if len(header) != 16 or header[:4] != KSPACE_MAGIC:
            raise ValueError(f"{path}: not a raw k-space grid (bad magic)")
        version, height, width = np.frombuffer(header[4:], dtype="<u4")
        if version != RAW_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        payload = f.read()
    expected = int(height) * int(width) * 8
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}")
    return (np.frombuffer(payload, dtype="<c8")
            .reshape(int(height), int(width)).astype(np.complex128))


def load_image(path):
    """Load a grayscale image as a float grid scaled to [0, 1]."""
    if str(path).endswith(RAW_EXT):
        return load_raw(path).astype(np.float64)
    with Image.open(path) as im:
        if im.mode in ("I;16", "I"):
            arr = np.asarray(im, dtype=np.float64)
            return arr / 65535.0
        arr = np.asarray(im.convert("L"), dtype=np.float64)
        return arr / 255.0


def save_image(path, img):
    """Save a [0, 1] grid: bit-exact raw for `.kqi`, quantized raster otherwise."""
    a = np.asarray(img)
    if str(path).endswith(RAW_EXT):
        save_raw(path, a)
        return
    q = np.clip(a, 0.0, 1.0)
    if str(path).lower().endswith(".png"):
        Image.fromarray(np.round(q * 65535.0).astype(np.uint16)).save(path)
    else:
        Image.fromarray(np.round(q * 255.0).astype(np.uint8)).save(path)


def minmax_normalize(img):
    """Per-image min-max scaling to [0, 1]; constant images map to zeros."""
    a = np.asarray(img, dtype=np.float64)
    lo, hi = a.min(), a.max()
    if hi - lo <= 0:
        return np.zeros_like(a)
    return (a - lo) / (hi - lo)


def resize_bilinear(img, out_h, out_w):
    """Bilinear resize on a corner-aligned grid.

    Sample t of the output axis maps to source coordinate
    t * (in - 1) / (out - 1); a single-sample output axis samples the
    source center. Reproduces affine ramps exactly and is the identity
    when sizes match.
    """
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 2 or a.shape[1] < 2:
        raise ValueError(f"source must be at least 2x2, got {a.shape}")
    if out_h < 1 or out_w < 1:
        raise ValueError("output dimensions must be >= 1")
    in_h, in_w = a.shape

    def coords(n_out, n_in):
        if n_out == 1:
            return np.array([(n_in - 1) / 2.0])
        return np.arange(n_out) * (n_in - 1) / (n_out - 1)

    ys = coords(out_h, in_h)
    xs = coords(out_w, in_w)
    y0 = np.minimum(np.floor(ys).astype(int), in_h - 2)
    x0 = np.minimum(np.floor(xs).astype(int), in_w - 2)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    tl = a[np.ix_(y0, x0)]
    tr = a[np.ix_(y0, x0 + 1)]
    bl = a[np.ix_(y0 + 1, x0)]
    br = a[np.ix_(y0 + 1, x0 + 1)]
    top = tl + (tr - tl) * fx
    bot = bl + (br - bl) * fx
    return top + (bot - top) * fy


def flip_horizontal(img):
    return np.asarray(img)[:, ::-1].copy()


def flip_vertical(img):
    return np.asarray(img)[::-1, :].copy()


def adjust_brightness(img, delta):
    return np.clip(np.asarray(img, dtype=np.float64) + delta, 0.0, 1.0)


def rotate_padded(img, angle_deg):
    """Rotate about the image center, zero-filling uncovered pixels.

    Output keeps the input size. Multiples of 90 degrees dispatch to
    exact index permutations; other angles use bilinear resampling of
    the inverse-mapped grid.
    """
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("expected a 2D grid")
    angle = float(angle_deg) % 360.0
    if angle == 0.0:
        return a.copy()
    if angle % 90.0 == 0.0:
        k = int(angle // 90) % 4
        out = np.rot90(a, k)
        if out.shape != a.shape:   # non-square: recrop/pad to input size
            canvas = np.zeros_like(a)
            h = min(a.shape[0], out.shape[0])
            w = min(a.shape[1], out.shape[1])
            canvas[:h, :w] = out[:h, :w]
            return canvas
        return out.copy()
    theta = np.deg2rad(angle)
    c, s = np.cos(theta), np.sin(theta)
    height, width = a.shape
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    # inverse map: output pixel -> source location
    ys = c * (yy - cy) + s * (xx - cx) + cy
    xs = -s * (yy - cy) + c * (xx - cx) + cx
    valid = (ys >= 0) & (ys <= height - 1) & (xs >= 0) & (xs <= width - 1)
    ys = np.clip(ys, 0, height - 1)
    xs = np.clip(xs, 0, width - 1)
    y0 = np.minimum(ys.astype(int), height - 2)
    x0 = np.minimum(xs.astype(int), width - 2)
    fy = ys - y0
    fx = xs - x0
    out = (a[y0, x0] * (1 - fy) * (1 - fx)
           + a[y0, x0 + 1] * (1 - fy) * fx
           + a[y0 + 1, x0] * fy * (1 - fx)
           + a[y0 + 1, x0 + 1] * fy * fx)
    out[~valid] = 0.0
    return out


@dataclass(frozen=True)
class AugmentOps:
    hflip: bool = False
    vflip: bool = False
    rotate_deg: float = 0.0      # max |angle|; drawn uniform in +/- range
    brightness: float = 0.0      # max |delta|; drawn uniform in +/- range

    def __post_init__(self):
        if not np.isfinite(self.rotate_deg) or not np.isfinite(self.brightness):
            raise ValueError("augmentation ranges must be finite")

    @property
    def enabled(self):
        return (self.hflip or self.vflip
                or self.rotate_deg != 0.0 or self.brightness != 0.0)


def augment(img, ops: AugmentOps, seed):
    """Apply the enabled augmentations with draws from the given seed.

    Flips fire with probability 1/2 each; angle and brightness are drawn
    uniformly from their +/- ranges. Disabled ops leave the image
    untouched; values stay in [0, 1] and the shape is preserved.
    """
    a = np.asarray(img, dtype=np.float64)
    if not ops.enabled:
        return a.copy()
    rng = np.random.default_rng(seed)
    if ops.hflip and rng.random() < 0.5:
        a = flip_horizontal(a)
    if ops.vflip and rng.random() < 0.5:
        a = flip_vertical(a)
    if ops.rotate_deg != 0.0:
        a = rotate_padded(a, rng.uniform(-ops.rotate_deg, ops.rotate_deg))
    if ops.brightness != 0.0:
        a = adjust_brightness(a, rng.uniform(-ops.brightness, ops.brightness))
    return np.clip(a, 0.0, 1.0)


MANIFEST_KEYS = ("sample_id", "image", "class_id", "severity", "rng_seed",
                 "domain", "split")


@dataclass(frozen=True)
class ManifestRecord:
    """One dataset sample: image location plus labels and severity."""
    sample_id: str
    image: str                 # path relative to the manifest directory
    class_id: int
    severity: Optional[SeverityRecord]
    rng_seed: int
    domain: int = 0
    split: str = ""

    def to_json(self):
        sev = None
        if self.severity is not None and self.severity.params is not None:
            sev = dict(vars(self.severity.params))
        return json.dumps({
            "sample_id": self.sample_id,
            "image": self.image,
            "class_id": self.class_id,
            "severity": sev,
            "rng_seed": self.rng_seed,
            "domain": self.domain,
            "split": self.split,
        })

    @classmethod
    def from_dict(cls, d):
        class_id = int(d["class_id"])
        severity = SeverityRecord.from_dict({
            "class_id": class_id,
            "params": d["severity"],
            "rng_seed": d["rng_seed"],
        })
        return cls(
            sample_id=str(d["sample_id"]),
            image=str(d["image"]),
            class_id=class_id,
            severity=severity,
            rng_seed=int(d["rng_seed"]),
            domain=int(d["domain"]),
            split=str(d["split"]),
        )


def write_manifest(path, records):
    with open(path, "w") as f:
        for r in records:
            f.write(r.to_json())
            f.write("\n")


def iter_manifest(path):
    """Stream manifest records one line at a time (constant memory)."""
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({e})") from e
            unknown = set(d) - set(MANIFEST_KEYS)
            if unknown:
                raise ValueError(
                    f"{path}:{lineno}: unknown field(s) {sorted(unknown)}")
            missing = set(MANIFEST_KEYS) - set(d)
            if missing:
                raise ValueError(
                    f"{path}:{lineno}: missing field(s) {sorted(missing)}")
            try:
                yield ManifestRecord.from_dict(d)
            except (ValueError, TypeError, KeyError) as e:
                raise ValueError(f"{path}:{lineno}: {e}") from e


def read_manifest(path):
    return list(iter_manifest(path))


def load_manifest_images(path, root=None):
    """Read a manifest and its images; returns (records, list of grids)."""
    root = os.path.dirname(os.path.abspath(path)) if root is None else root
    records = read_manifest(path)
    images = [load_image(os.path.join(root, r.image)) for r in records]
    return records, images
