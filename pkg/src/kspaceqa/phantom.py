"""Procedural multi-ellipse phantoms standing in for clinical corpora.

A phantom is a stack of analytically rasterized ellipses on a zero
background, plus one optional "ventricle" ellipse whose scale pulses
sinusoidally across frames so that temporal line-replacement artifacts
have real structure to corrupt. Generation is pure in (spec, seed).
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class Ellipse:
    cy: float          # center, normalized [-1, 1] coordinates
    cx: float
    ay: float          # semi-axes, normalized units (> 0)
    ax: float
    angle_rad: float
    intensity: float   # additive contribution, clipped into [0, 1] at the end

    def __post_init__(self):
        if self.ay <= 0 or self.ax <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        if not 0.0 <= abs(self.intensity) <= 1.0:
            raise ValueError("|intensity| must be within [0, 1]")


@dataclass(frozen=True)
class PhantomSpec:
    height: int = 90
    width: int = 90
    ellipses: Tuple[Ellipse, ...] = ()
    inner: Optional[Ellipse] = None   # pulsating ventricle-like structure
    inner_scale_amp: float = 0.25     # fractional scale swing across frames
    frames: int = 1
    noise_sigma: float = 0.0
    invert: bool = False              # flip contrast (1 - image) before noise
    seed: int = 0

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("phantom dimensions must be >= 1")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def _render(ellipses, height, width):
    ys = np.linspace(-1.0, 1.0, height) if height > 1 else np.zeros(1)
    xs = np.linspace(-1.0, 1.0, width) if width > 1 else np.zeros(1)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    img = np.zeros((height, width))
    for e in ellipses:
        c, s = np.cos(e.angle_rad), np.sin(e.angle_rad)
        dx = xx - e.cx
        dy = yy - e.cy
        xr = dx * c + dy * s
        yr = -dx * s + dy * c
        inside = (xr / e.ax) ** 2 + (yr / e.ay) ** 2 <= 1.0
        img[inside] += e.intensity
    return img


def generate_phantom(spec: PhantomSpec):
    """Rasterize a cine sequence of `spec.frames` images in [0, 1]."""
    rng = np.random.default_rng(spec.seed)
    frames = []
    for t in range(spec.frames):
        ellipses = list(spec.ellipses)
        if spec.inner is not None:
            scale = 1.0 + spec.inner_scale_amp * np.sin(
                2.0 * np.pi * t / max(spec.frames, 1))
            ellipses.append(replace(
                spec.inner, ay=spec.inner.ay * scale, ax=spec.inner.ax * scale))
        img = _render(ellipses, spec.height, spec.width)
        img = np.clip(img, 0.0, 1.0)
        if spec.invert:
            img = 1.0 - img
        if spec.noise_sigma > 0:
            img = img + rng.normal(0.0, spec.noise_sigma, img.shape)
            img = np.clip(img, 0.0, 1.0)
        frames.append(img)
    return frames


def random_phantom_spec(seed, size=90, frames=4, noise_sigma=0.01,
                        invert=False):
    """A randomized head-phantom-style spec: body, shell, organs, ventricle."""
    rng = np.random.default_rng(seed)
    body_ay = rng.uniform(0.75, 0.92)
    body_ax = rng.uniform(0.6, 0.85)
    body_angle = rng.uniform(-0.3, 0.3)
    ellipses = [
        Ellipse(0.0, 0.0, body_ay, body_ax, body_angle,
                rng.uniform(0.25, 0.4)),
        Ellipse(0.0, 0.0, body_ay * 0.88, body_ax * 0.88, body_angle,
                rng.uniform(0.1, 0.2)),
    ]
    for _ in range(rng.integers(2, 5)):
        ellipses.append(Ellipse(
            cy=rng.uniform(-0.45, 0.45),
            cx=rng.uniform(-0.4, 0.4),
            ay=rng.uniform(0.05, 0.22),
            ax=rng.uniform(0.05, 0.22),
            angle_rad=rng.uniform(0.0, np.pi),
            intensity=rng.uniform(-0.15, 0.3),
        ))
    inner = Ellipse(
        cy=rng.uniform(-0.2, 0.2),
        cx=rng.uniform(-0.2, 0.2),
        ay=rng.uniform(0.12, 0.24),
        ax=rng.uniform(0.12, 0.24),
        angle_rad=rng.uniform(0.0, np.pi),
        intensity=rng.uniform(0.35, 0.55),
    )
    return PhantomSpec(
        height=size, width=size,
        ellipses=tuple(ellipses),
        inner=inner,
        inner_scale_amp=rng.uniform(0.2, 0.35),
        frames=frames,
        noise_sigma=noise_sigma,
        invert=invert,
        seed=int(rng.integers(0, 2 ** 31)),
    )


def make_corpus(n_sequences, master_seed, size=90, frames=4,
                noise_sigma=0.01, invert=False):
    """Generate a list of cine sequences from randomized phantom specs."""
    if n_sequences < 1:
        raise ValueError("n_sequences must be >= 1")
    out = []
    for i in range(n_sequences):
        seed = int(np.random.SeedSequence(
            (int(master_seed), i)).generate_state(1)[0])
        spec = random_phantom_spec(
            seed, size=size, frames=frames,
            noise_sigma=noise_sigma, invert=invert)
        out.append(generate_phantom(spec))
    return out
