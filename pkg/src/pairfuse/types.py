"""Shared numeric vocabulary: feature vectors, paired samples, seeded randomness.

Feature vectors are plain 1-D float64 numpy arrays. The helpers here validate
them at package boundaries; internal code assumes validated inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Purpose tags for deriving independent random streams from one root seed.
# Adding a new consumer tag never perturbs the streams of existing ones.
STREAM_HASH_A = 0
STREAM_HASH_B = 1
STREAM_DATA = 2
STREAM_SHUFFLE = 3
STREAM_INIT = 4

_SEED_MAX = 2**64


def check_seed(seed: int) -> int:
    """Validate a root seed (unsigned 64-bit integer)."""
    seed = int(seed)
    if not 0 <= seed < _SEED_MAX:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed


def make_rng(seed: int, stream_tag: int = 0) -> np.random.Generator:
    """Derive a reproducible random stream for one purpose.

    Identical (seed, stream_tag) pairs yield bit-identical streams; distinct
    tags yield independent streams. Streams are single-owner: never share a
    returned generator across concurrent consumers.
    """
    seed = check_seed(seed)
    tag = int(stream_tag)
    if tag < 0:
        raise ValueError(f"stream_tag must be nonnegative, got {tag}")
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(tag,)))


def as_feature_vector(values, name: str = "feature vector") -> np.ndarray:
    """Coerce to a validated, read-only 1-D float64 array."""
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def scale_features(f, alpha: float) -> np.ndarray:
    """Scale a feature vector by a positive constant factor."""
    f = as_feature_vector(f)
    alpha = float(alpha)
    if not (alpha > 0 and np.isfinite(alpha)):
        raise ValueError(f"alpha must be a positive finite real, got {alpha}")
    out = alpha * f
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PairedSample:
    """Two same-length view features and the class label of their interaction."""

    view_a: np.ndarray
    view_b: np.ndarray
    label: int

    def __post_init__(self):
        object.__setattr__(self, "view_a", as_feature_vector(self.view_a, "view_a"))
        object.__setattr__(self, "view_b", as_feature_vector(self.view_b, "view_b"))
        object.__setattr__(self, "label", int(self.label))
        if self.view_a.size != self.view_b.size:
            raise ValueError(
                f"view dims differ: {self.view_a.size} vs {self.view_b.size}"
            )
        if self.label < 0:
            raise ValueError(f"label must be nonnegative, got {self.label}")

    @property
    def dim(self) -> int:
        return self.view_a.size


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered collection of paired samples with uniform feature dim."""

    samples: tuple[PairedSample, ...]
    num_classes: int
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if self.num_classes < 1:
            raise ValueError(f"num_classes must be positive, got {self.num_classes}")
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        for k, s in enumerate(self.samples):
            if s.dim != self.dim:
                raise ValueError(f"sample {k} has dim {s.dim}, expected {self.dim}")
            if s.label >= self.num_classes:
                raise ValueError(
                    f"sample {k} label {s.label} >= num_classes {self.num_classes}"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def view_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Stack views into (n, dim) matrices, sample order preserved."""
        a = np.stack([s.view_a for s in self.samples])
        b = np.stack([s.view_b for s in self.samples])
        return a, b

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def scaled(self, alpha: float) -> "Dataset":
        """New dataset with both views of every sample scaled by alpha."""
        if alpha == 1.0:
            return self
        return Dataset(
            samples=tuple(
                PairedSample(scale_features(s.view_a, alpha),
                             scale_features(s.view_b, alpha), s.label)
                for s in self.samples
            ),
            num_classes=self.num_classes,
            dim=self.dim,
        )


def dataset_from_arrays(view_a, view_b, labels, num_classes: int) -> Dataset:
    """Build a Dataset from (n, C) view matrices and an (n,) label array."""
    view_a = np.asarray(view_a, dtype=np.float64)
    view_b = np.asarray(view_b, dtype=np.float64)
    labels = np.asarray(labels)
    if view_a.ndim != 2 or view_a.shape != view_b.shape:
        raise ValueError(
            f"view matrices must share an (n, C) shape, got {view_a.shape} and {view_b.shape}"
        )
    if labels.shape != (view_a.shape[0],):
        raise ValueError(f"labels shape {labels.shape} does not match n={view_a.shape[0]}")
    samples = tuple(
        PairedSample(view_a[i], view_b[i], int(labels[i])) for i in range(view_a.shape[0])
    )
    return Dataset(samples=samples, num_classes=int(num_classes), dim=view_a.shape[1])
