"""Parametric synthetic ground-truth world.

Renders small grayscale "lesion" images whose statistics are exact
functions of the demographic attributes: background level rises with the
skin-type index, the centered disk radius rises with the age index, and
the disk contrast depends on the diagnosis. Because every moment is known
in closed form, generated samples can be audited against analytic truth.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .cohort import build_grid, seed_mix
from .errors import ConfigError, InputError

IMAGES_MAGIC = b"FAIRGEN-IMAGES 1\n"


@dataclass(frozen=True)
class WorldParams:
    image_side: int = 16
    background_base: float = 0.15
    skin_step: float = 0.08
    radius_base: float = 2.0
    age_step: float = 0.6
    lesion_contrast: dict = field(default_factory=lambda: {"melanoma": 0.3})
    pixel_noise_sigma: float = 0.05

    def validate(self, vocab):
        for s in range(len(vocab.skin_types)):
            bg = self.background_base + self.skin_step * s
            if not 0.0 <= bg <= 1.0:
                raise ConfigError(f"background {bg:.3f} outside [0,1] at skin {s}")
            for diag in vocab.diagnoses:
                if diag not in self.lesion_contrast:
                    raise ConfigError(f"no lesion contrast for diagnosis {diag!r}")
                lvl = bg + self.lesion_contrast[diag]
                if not 0.0 <= lvl <= 1.0:
                    raise ConfigError(
                        f"lesion level {lvl:.3f} outside [0,1] at skin {s}"
                    )
        for a in range(len(vocab.age_bands)):
            r = self.radius_base + self.age_step * a
            if r >= self.image_side / 2:
                raise ConfigError(f"radius {r:.2f} >= half side at age index {a}")
            if r <= 0:
                raise ConfigError(f"radius {r:.2f} <= 0 at age index {a}")

    def background_level(self, profile):
        return self.background_base + self.skin_step * profile.skin_type

    def radius(self, profile):
        return self.radius_base + self.age_step * profile.age_band

    def contrast(self, profile, vocab):
        return self.lesion_contrast[vocab.diagnoses[profile.diagnosis]]

    def disk_mask(self, profile):
        """Boolean (side, side) mask of the lesion disk."""
        side = self.image_side
        c = (side - 1) / 2.0
        yy, xx = np.mgrid[0:side, 0:side]
        return (yy - c) ** 2 + (xx - c) ** 2 <= self.radius(profile) ** 2


@dataclass(frozen=True)
class LabeledSample:
    image: np.ndarray  # flat, length image_side**2
    profile: object
    label: str


def render_ground_truth(params, profile, seed, vocab):
    params.validate(vocab)
    profile.validate(vocab)
    side = params.image_side
    img = np.full((side, side), params.background_level(profile))
    img[params.disk_mask(profile)] += params.contrast(profile, vocab)
    if params.pixel_noise_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        img = img + rng.normal(0.0, params.pixel_noise_sigma, (side, side))
        img = np.clip(img, 0.0, 1.0)
    return LabeledSample(
        image=img.ravel(),
        profile=profile,
        label=vocab.diagnoses[profile.diagnosis],
    )


def build_dataset(params, vocab, n_per_cell, master_seed):
    """n_per_cell renders per grid cell, grid order, seeds via seed_mix."""
    if n_per_cell < 1:
        raise ConfigError("n_per_cell must be >= 1")
    params.validate(vocab)
    samples = []
    index = 0
    for profile in build_grid(vocab):
        for _ in range(n_per_cell):
            samples.append(
                render_ground_truth(params, profile, seed_mix(master_seed, index), vocab)
            )
            index += 1
    return samples


def image_features(params, profile, image, vocab):
    """(background_mean, disk_mean, radius_estimate) for one flat image."""
    side = params.image_side
    img = np.asarray(image).reshape(side, side)
    mask = params.disk_mask(profile)
    # pixels brighter than the midpoint level approximate the disk area
    thresh = params.background_level(profile) + 0.5 * params.contrast(profile, vocab)
    return (
        float(img[~mask].mean()),
        float(img[mask].mean()),
        float(np.sqrt(np.count_nonzero(img > thresh) / np.pi)),
    )


@dataclass(frozen=True)
class CellStats:
    n: int
    background_mean: float
    background_var: float
    disk_mean: float
    disk_var: float
    radius_mean: float


def cell_statistics(dataset, params, vocab):
    """Per-cell mean/variance of summary features; empty cells are absent."""
    if not dataset:
        raise InputError("empty dataset")
    buckets = {}
    for sample in dataset:
        buckets.setdefault(sample.profile, []).append(sample)
    out = {}
    for profile, samples in buckets.items():
        side = params.image_side
        mask = params.disk_mask(profile)
        thresh = params.background_level(profile) + 0.5 * params.contrast(
            profile, vocab
        )
        bgs, disks, radii = [], [], []
        for s in samples:
            img = np.asarray(s.image).reshape(side, side)
            bgs.append(img[~mask].mean())
            disks.append(img[mask].mean())
            radii.append(np.sqrt(np.count_nonzero(img > thresh) / np.pi))
        out[profile] = CellStats(
            n=len(samples),
            background_mean=float(np.mean(bgs)),
            background_var=float(np.var(bgs)),
            disk_mean=float(np.mean(disks)),
            disk_var=float(np.var(disks)),
            radius_mean=float(np.mean(radii)),
        )
    return out


def analytic_cell_means(params, profile, vocab):
    """Noise-free (background_mean, disk_mean, radius) for one cell."""
    bg = params.background_level(profile)
    return bg, bg + params.contrast(profile, vocab), params.radius(profile)


def save_dataset(dataset, records_path, images_path, params, vocab):
    """Line-delimited records plus a sidecar binary image block."""
    side = params.image_side
    with open(records_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"FAIRGEN-DATASET 1\tvocab_hash={vocab.vocab_hash()}\tside={side}\n")
        for i, s in enumerate(dataset):
            surf = s.profile.surface(vocab)
            fh.write(
                "\t".join(
                    [
                        str(i),
                        surf["sex"],
                        surf["age"],
                        surf["skin_type"],
                        surf["size"],
                        surf["diagnosis"],
                        s.label,
                    ]
                )
                + "\n"
            )
    with open(images_path, "wb") as fh:
        fh.write(IMAGES_MAGIC)
        fh.write(struct.pack("<QQ", len(dataset), side * side))
        for s in dataset:
            fh.write(np.asarray(s.image, dtype="<f8").tobytes())


def load_images(images_path):
    with open(images_path, "rb") as fh:
        magic = fh.read(len(IMAGES_MAGIC))
        if magic != IMAGES_MAGIC:
            raise ConfigError(f"{images_path}: bad image-block magic")
        count, dim = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(count * dim * 8), dtype="<f8")
    return data.reshape(count, dim)


# 2D Gaussian-mixture training fixture: four conditions mapped to the
# corners of a square, tight isotropic noise around each mean.
FIXTURE_SIGMA = 0.2


def gaussian_fixture_conditions(vocab):
    """Four profiles (sex x skin I/II) used as mixture components."""
    from .cohort import AttributeProfile

    profiles = [
        AttributeProfile(sex=s, age_band=0, skin_type=k) for s in (0, 1) for k in (0, 1)
    ]
    means = np.array([[-1.5, -1.5], [-1.5, 1.5], [1.5, -1.5], [1.5, 1.5]])
    return profiles, means


def gaussian_fixture_dataset(vocab, n_per_condition, seed):
    """(x0, profile) pairs drawn from the 2D mixture."""
    profiles, means = gaussian_fixture_conditions(vocab)
    rng = np.random.Generator(np.random.PCG64(seed))
    data = []
    for profile, mean in zip(profiles, means):
        draws = mean + FIXTURE_SIGMA * rng.standard_normal((n_per_condition, 2))
        data.extend((draws[i], profile) for i in range(n_per_condition))
    return data
