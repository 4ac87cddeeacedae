"""Synthetic paired-view data where only cross-view correlation carries the label.

Each class owns a fixed derangement permutation T_c (orthogonal, zero
diagonal). A sample of class c draws view A from a standard normal and sets
view B to T_c applied to A plus isotropic noise. Both per-view marginals are
then identical for every class, so additive fusions see nothing; the
permutation has no fixed points, so same-index products see nothing either.
Only fusions that couple all cross-view pairs can recover the label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import STREAM_DATA, Dataset, dataset_from_arrays, make_rng

_MAX_DERANGEMENT_TRIES = 10_000


@dataclass(frozen=True)
class SynthConfig:
    dim: int = 16
    num_classes: int = 4
    n_train: int = 2000
    n_test: int = 500
    noise_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("split sizes must be positive")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be nonnegative, got {self.noise_sigma}")
        if self.num_classes > count_derangements(self.dim):
            raise ValueError(
                f"cannot draw {self.num_classes} distinct derangements of {self.dim} elements"
            )


def count_derangements(n: int) -> int:
    """Number of fixed-point-free permutations of n elements (exact)."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    a, b = 1, 0  # counts for n = 0, 1
    for k in range(2, n + 1):
        a, b = b, (k - 1) * (a + b)
    return b if n >= 1 else a


def draw_derangements(dim: int, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Draw `count` distinct derangements by rejection sampling."""
    if count > count_derangements(dim):
        raise ValueError(f"cannot draw {count} distinct derangements of {dim} elements")
    found: list[np.ndarray] = []
    seen: set[tuple[int, ...]] = set()
    identity = np.arange(dim)
    for _ in range(_MAX_DERANGEMENT_TRIES):
        perm = rng.permutation(dim)
        if np.any(perm == identity):
            continue
        key = tuple(perm.tolist())
        if key in seen:
            continue
        seen.add(key)
        found.append(perm)
        if len(found) == count:
            return found
    raise ValueError(
        f"failed to draw {count} distinct derangements of {dim} elements "
        f"within {_MAX_DERANGEMENT_TRIES} tries"
    )


def _draw_split(
    n: int, perms: list[np.ndarray], cfg: SynthConfig, rng: np.random.Generator
) -> Dataset:
    labels = rng.integers(0, cfg.num_classes, size=n)
    view_a = rng.standard_normal((n, cfg.dim))
    view_b = np.empty_like(view_a)
    for c, perm in enumerate(perms):
        mask = labels == c
        # row j of T_c picks source coordinate perm[j]
        view_b[mask] = view_a[mask][:, perm]
    view_b = view_b + cfg.noise_sigma * rng.standard_normal((n, cfg.dim))
    return dataset_from_arrays(view_a, view_b, labels, cfg.num_classes)


def generate_synthetic(cfg: SynthConfig) -> tuple[Dataset, Dataset]:
    """Generate (train, test) splits; identical seeds give identical datasets.

    Draw order is fixed: class permutations, then the train split (labels,
    view A, noise), then the test split.
    """
    rng = make_rng(cfg.seed, STREAM_DATA)
    perms = draw_derangements(cfg.dim, cfg.num_classes, rng)
    train = _draw_split(cfg.n_train, perms, cfg, rng)
    test = _draw_split(cfg.n_test, perms, cfg, rng)
    return train, test


def class_permutations(cfg: SynthConfig) -> list[np.ndarray]:
    """The per-class permutations a config would generate (for diagnostics)."""
    rng = make_rng(cfg.seed, STREAM_DATA)
    return draw_derangements(cfg.dim, cfg.num_classes, rng)
