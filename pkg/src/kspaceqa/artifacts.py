"""Synthetic MR artifact generation by k-space manipulation.

Four corruptors, each operating on the Fourier transform of a clean
slice: respiratory ghosting (sine-gated mixing of the k-spaces of a
reference and a translated copy), cardiac mis-triggering (random line
replacement from a temporal neighbor), ringing (ideal low-pass disk) and
wrap-around aliasing (periodic line zeroing).

Severity parameters are drawn from fixed ranges keyed by an explicit
seed, so a dataset manifest fully reproduces its images.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .numerics import as_real_grid, circ_shift, dft2, idft2

CLASS_NAMES = ("clean", "respiratory", "cardiac", "gibbs", "aliasing")
CLEAN, RESPIRATORY, CARDIAC, GIBBS, ALIASING = range(5)
N_CLASSES = len(CLASS_NAMES)

_AXES = ("rows", "cols")


@dataclass(frozen=True)
class RespiratoryParams:
    amplitude_px: float   # translation magnitude, pixels
    period_lines: float   # sine period over k-space lines
    phase_rad: float
    axis: str = "rows"    # phase-encode direction

    def __post_init__(self):
        if self.amplitude_px < 0:
            raise ValueError("amplitude_px must be >= 0")
        if self.period_lines < 2:
            raise ValueError("period_lines must be >= 2")
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES}")


@dataclass(frozen=True)
class CardiacParams:
    n_replaced_lines: int
    donor_offset: int = 1   # temporal frame distance
    rng_seed: int = 0       # seed for the replaced-row draw

    def __post_init__(self):
        if self.n_replaced_lines < 0:
            raise ValueError("n_replaced_lines must be >= 0")
        if self.donor_offset < 1:
            raise ValueError("donor_offset must be >= 1")


@dataclass(frozen=True)
class GibbsParams:
    radius_px: float   # low-pass cutoff, measured from the centered DC term

    def __post_init__(self):
        if self.radius_px <= 0:
            raise ValueError("radius_px must be > 0")


@dataclass(frozen=True)
class AliasingParams:
    factor: int          # keep every factor-th line, zero the rest
    axis: str = "rows"

    def __post_init__(self):
        if self.factor not in (2, 3, 4):
            raise ValueError("factor must be in {2, 3, 4}")
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES}")


Params = Union[RespiratoryParams, CardiacParams, GibbsParams, AliasingParams]

_PARAM_TYPES = {
    RESPIRATORY: RespiratoryParams,
    CARDIAC: CardiacParams,
    GIBBS: GibbsParams,
    ALIASING: AliasingParams,
}


@dataclass(frozen=True)
class SeverityRecord:
    """Reproducibility metadata for one corrupted (or clean) sample."""
    class_id: int
    params: Optional[Params]
    rng_seed: int

    def __post_init__(self):
        if not 0 <= self.class_id < N_CLASSES:
            raise ValueError(f"class_id must be in 0..{N_CLASSES - 1}")
        expected = _PARAM_TYPES.get(self.class_id)
        if expected is None:
            if self.params is not None:
                raise ValueError("clean class takes no params")
        elif not isinstance(self.params, expected):
            raise ValueError(
                f"class {CLASS_NAMES[self.class_id]} needs "
                f"{expected.__name__} params")

    def to_dict(self):
        d = {"class_id": self.class_id, "rng_seed": self.rng_seed}
        if self.params is not None:
            d["params"] = dict(vars(self.params))
        else:
            d["params"] = None
        return d

    @classmethod
    def from_dict(cls, d):
        class_id = int(d["class_id"])
        ptype = _PARAM_TYPES.get(class_id)
        params = None
        if ptype is not None:
            if d.get("params") is None:
                raise ValueError(
                    f"class {CLASS_NAMES[class_id]} requires params")
            params = ptype(**d["params"])
        return cls(class_id=class_id, params=params, rng_seed=int(d["rng_seed"]))


def _conjugate_symmetric(mask):
    """Force mask[j] == mask[(n - j) % n] using the low index of each pair.

    Line selection must respect the conjugate pairing of a real image's
    spectrum: if line j came from one source but its partner n-j from the
    other, the reconstruction would be complex and taking the real part
    would average the pair instead of keeping it verbatim.
    """
    n = len(mask)
    j = np.arange(n)
    canonical = np.minimum(j, (n - j) % n)
    return mask[canonical]


def corrupt_respiratory(img, p: RespiratoryParams):
    """Sine-gated mixing of reference and translated k-spaces.

    The translation is rounded to integer pixels so the translated image
    is an exact circular shift, and the sine gate is applied per
    conjugate line pair; each output k-space line then comes verbatim
    from exactly one of the two source k-spaces.
    """
    img = as_real_grid(img)
    amp = int(round(p.amplitude_px))
    if p.axis == "rows":
        translated = circ_shift(img, amp, 0)
    else:
        translated = circ_shift(img, 0, amp)
    k_ref = dft2(img)
    k_tr = dft2(translated)
    line_axis = 0 if p.axis == "rows" else 1
    n_lines = img.shape[line_axis]
    j = np.arange(n_lines)
    take = np.sin(2.0 * np.pi * j / p.period_lines + p.phase_rad) > 0
    take = _conjugate_symmetric(take)
    combined = k_ref.copy()
    if p.axis == "rows":
        combined[take, :] = k_tr[take, :]
    else:
        combined[:, take] = k_tr[:, take]
    return idft2(combined).real


def _resolve_donor(target_frame, offset, n_frames):
    """Donor frame at +/- offset from the target, kept in range and != target."""
    fwd = target_frame + offset
    if fwd < n_frames:
        return fwd
    bwd = target_frame - offset
    if bwd >= 0:
        return bwd
    # offset larger than the sequence on both sides: clamp, avoiding target
    return n_frames - 1 if target_frame != n_frames - 1 else 0


def cardiac_replaced_rows(height, p: CardiacParams):
    """Rows replaced for given params: a seeded draw plus conjugate partners."""
    rng = np.random.default_rng(p.rng_seed)
    rows = rng.choice(height, size=p.n_replaced_lines, replace=False)
    partners = (height - rows) % height
    return np.unique(np.concatenate([rows, partners]))


def corrupt_cardiac(seq, target_frame, p: CardiacParams):
    """Replace random k-space rows of the target frame with a neighbor's.

    Rows are drawn uniformly by p.rng_seed; each drawn row is replaced
    together with its conjugate partner so the corrupted spectrum stays
    that of a real image (p.n_replaced_lines counts the drawn rows).
    """
    frames = [as_real_grid(f) for f in seq]
    if len(frames) < 2:
        raise ValueError("cardiac corruption needs a sequence of >= 2 frames")
    shape = frames[0].shape
    if any(f.shape != shape for f in frames):
        raise ValueError("all frames in a sequence must share one shape")
    if not 0 <= target_frame < len(frames):
        raise ValueError(f"target_frame {target_frame} out of range")
    height = shape[0]
    if p.n_replaced_lines > height:
        raise ValueError("n_replaced_lines exceeds image height")
    donor = _resolve_donor(target_frame, p.donor_offset, len(frames))
    k_target = dft2(frames[target_frame])
    if p.n_replaced_lines > 0:
        rows = cardiac_replaced_rows(height, p)
        k_donor = dft2(frames[donor])
        k_target[rows, :] = k_donor[rows, :]
    return idft2(k_target).real


def corrupt_gibbs(img, p: GibbsParams):
    """Ideal low-pass disk in the DC-centered k-space view."""
    img = as_real_grid(img)
    height, width = img.shape
    k = np.fft.fftshift(dft2(img))
    u = np.arange(height) - height // 2
    v = np.arange(width) - width // 2
    dist = np.sqrt(u[:, None] ** 2 + v[None, :] ** 2)
    k[dist > p.radius_px] = 0.0
    return idft2(np.fft.ifftshift(k)).real


def corrupt_aliasing(img, p: AliasingParams):
    """Zero every k-space line whose index is not a multiple of the factor.

    Zero-filling (rather than removal) keeps dimensions unchanged; the
    reconstruction superimposes wrap-around ghosts of the anatomy.
    """
    img = as_real_grid(img)
    k = dft2(img)
    axis_len = img.shape[0] if p.axis == "rows" else img.shape[1]
    kill = np.arange(axis_len) % p.factor != 0
    if p.axis == "rows":
        k[kill, :] = 0.0
    else:
        k[:, kill] = 0.0
    return idft2(k).real


def sample_severity(class_id, rng_seed, shape=(90, 90)) -> SeverityRecord:
    """Draw a severity record for one sample, deterministic in (class, seed).

    Ranges (uniform unless noted), for an H x W image with N = min(H, W):
      respiratory  amplitude [2, 10] px, period [4, 32] lines,
                   phase [0, 2pi), axis fair coin
      cardiac      lines [round(H/16), round(H/4)], donor offset {1, 2, 3}
      gibbs        radius [N/8, N/3]
      aliasing     factor {2, 3, 4}, axis fair coin
    """
    if not 0 <= class_id < N_CLASSES:
        raise ValueError(f"class_id must be in 0..{N_CLASSES - 1}")
    if class_id == CLEAN:
        return SeverityRecord(CLEAN, None, int(rng_seed))
    height, width = int(shape[0]), int(shape[1])
    n = min(height, width)
    rng = np.random.default_rng(int(rng_seed))
    if class_id == RESPIRATORY:
        params = RespiratoryParams(
            amplitude_px=rng.uniform(2.0, 10.0),
            period_lines=rng.uniform(4.0, 32.0),
            phase_rad=rng.uniform(0.0, 2.0 * np.pi),
            axis=_AXES[rng.integers(0, 2)],
        )
    elif class_id == CARDIAC:
        lo = max(1, int(round(height / 16)))
        hi = max(lo, int(round(height / 4)))
        params = CardiacParams(
            n_replaced_lines=int(rng.integers(lo, hi + 1)),
            donor_offset=int(rng.integers(1, 4)),
            rng_seed=int(rng.integers(0, 2 ** 31)),
        )
    elif class_id == GIBBS:
        params = GibbsParams(radius_px=rng.uniform(n / 8.0, n / 3.0))
    else:
        params = AliasingParams(
            factor=int(rng.integers(2, 5)),
            axis=_AXES[rng.integers(0, 2)],
        )
    return SeverityRecord(class_id, params, int(rng_seed))


def apply_severity(seq, frame_idx, record: SeverityRecord):
    """Corrupt one frame of a sequence according to a severity record."""
    if record.class_id == CLEAN:
        return as_real_grid(seq[frame_idx]).copy()
    if record.class_id == RESPIRATORY:
        return corrupt_respiratory(seq[frame_idx], record.params)
    if record.class_id == CARDIAC:
        return corrupt_cardiac(seq, frame_idx, record.params)
    if record.class_id == GIBBS:
        return corrupt_gibbs(seq[frame_idx], record.params)
    return corrupt_aliasing(seq[frame_idx], record.params)


@dataclass
class LabeledSample:
    """One classifier input: an image, its artifact class and provenance."""
    image: np.ndarray
    class_id: int
    severity: SeverityRecord
    source_id: str        # clean frame this sample derives from
    domain: int = 0       # 0 = source, 1 = target
    sample_id: str = ""


def _sample_seed(master_seed, seq_idx, frame_idx, class_id):
    ss = np.random.SeedSequence((int(master_seed), seq_idx, frame_idx, class_id))
    return int(ss.generate_state(1)[0])


def build_dataset(sequences, master_seed, domain=0):
    """Expand a clean corpus into labeled samples.

    Every frame yields its clean sample plus one corrupted sample per
    artifact class; the cardiac class is skipped for single-frame
    sequences. Returns (samples, class_counts). Per-sample seeds derive
    from (master_seed, sequence, frame, class), so builds are order- and
    parallelism-independent.
    """
    if not sequences:
        raise ValueError("empty corpus")
    samples = []
    counts = {c: 0 for c in range(N_CLASSES)}
    for s, seq in enumerate(sequences):
        frames = [as_real_grid(f) for f in seq]
        if not frames:
            raise ValueError(f"sequence {s} has no frames")
        for t, frame in enumerate(frames):
            source_id = f"seq{s:04d}/frame{t:02d}"
            for class_id in range(N_CLASSES):
                if class_id == CARDIAC and len(frames) < 2:
                    continue
                seed = _sample_seed(master_seed, s, t, class_id)
                record = sample_severity(class_id, seed, shape=frame.shape)
                image = apply_severity(frames, t, record)
                samples.append(LabeledSample(
                    image=image,
                    class_id=class_id,
                    severity=record,
                    source_id=source_id,
                    domain=domain,
                    sample_id=f"{source_id}/{CLASS_NAMES[class_id]}",
                ))
                counts[class_id] += 1
    return samples, counts
