"""Linear softmax head over fused features: inference, loss, SGD training.

Also carries the late score-averaging baseline (one head per view) and the
logit-factorization diagnostics that make the separability structure of each
fusion kind checkable on a trained model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fusion import FusionMethod, fuse, fuse_backward
from .types import STREAM_INIT, STREAM_SHUFFLE, Dataset, as_feature_vector, make_rng


@dataclass(frozen=True, eq=False)
class ClassifierParams:
    """Weights (input_dim, L) and bias (L,) of the softmax head."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64, copy=True)
        b = np.array(self.b, dtype=np.float64, copy=True)
        if W.ndim != 2 or b.ndim != 1 or W.shape[1] != b.size:
            raise ValueError(f"inconsistent parameter shapes: W {W.shape}, b {b.shape}")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise ValueError("classifier parameters must be finite")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def input_dim(self) -> int:
        return self.W.shape[0]

    @property
    def num_classes(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    """Plain SGD settings: fixed learning rate, no momentum, no weight decay."""

    learning_rate: float = 0.1
    epochs: int = 40
    batch_size: int = 32
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")


@dataclass(frozen=True, eq=False)
class TrainResult:
    """Final parameters plus the end-of-epoch mean training loss trace."""

    params: ClassifierParams
    epoch_losses: np.ndarray


def logits(params: ClassifierParams, g) -> np.ndarray:
    g = as_feature_vector(g, "fused feature")
    if g.size != params.input_dim:
        raise ValueError(f"fused dim {g.size} does not match classifier input_dim {params.input_dim}")
    return params.W.T @ g + params.b


def _softmax_rows(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=-1, keepdims=True)
    P = np.exp(Z)
    P /= P.sum(axis=-1, keepdims=True)
    return P


def _logsumexp_rows(Z: np.ndarray) -> np.ndarray:
    m = Z.max(axis=-1)
    return m + np.log(np.exp(Z - m[..., None]).sum(axis=-1))


def predict_proba(params: ClassifierParams, g) -> np.ndarray:
    """Class probabilities softmax(W^T g + b), stabilized by max subtraction."""
    return _softmax_rows(logits(params, g))


def cross_entropy(params: ClassifierParams, g, label: int) -> float:
    """-log p(label | g), computed through log-sum-exp (never raw exponentials)."""
    z = logits(params, g)
    label = int(label)
    if not 0 <= label < params.num_classes:
        raise ValueError(f"label {label} out of range [0, {params.num_classes})")
    return float(_logsumexp_rows(z) - z[label])


def gradient(params: ClassifierParams, g, label: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact cross-entropy gradients: grad_b = p - onehot, grad_W = g (x) grad_b."""
    g = as_feature_vector(g, "fused feature")
    p = predict_proba(params, g)
    label = int(label)
    if not 0 <= label < params.num_classes:
        raise ValueError(f"label {label} out of range [0, {params.num_classes})")
    grad_b = p.copy()
    grad_b[label] -= 1.0
    return np.outer(g, grad_b), grad_b


def predict_late_avg(params_a: ClassifierParams, params_b: ClassifierParams, fa, fb) -> np.ndarray:
    """Late fusion baseline: mean of the two per-view probability vectors."""
    if params_a.num_classes != params_b.num_classes:
        raise ValueError("per-view classifiers disagree on the number of classes")
    return 0.5 * (predict_proba(params_a, fa) + predict_proba(params_b, fb))


def fit_softmax(
    features: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    cfg: TrainConfig,
    init_seed: int,
) -> TrainResult:
    """Minibatch SGD on a precomputed (n, dim) feature matrix.

    Weights start zero-mean normal with scale 1/sqrt(dim) (keeps initial
    logits O(1) across fused dims), bias starts zero. Deterministic given
    (init_seed, cfg.shuffle_seed). The loss trace holds the mean cross-entropy
    over the full training set after each epoch.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, dim = features.shape
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if labels.shape != (n,) or labels.min() < 0 or labels.max() >= num_classes:
        raise ValueError("labels must be an (n,) array of class indices below num_classes")

    rng_init = make_rng(init_seed, STREAM_INIT)
    rng_shuffle = make_rng(cfg.shuffle_seed, STREAM_SHUFFLE)
    W = rng_init.normal(0.0, 1.0 / np.sqrt(dim), size=(dim, num_classes))
    b = np.zeros(num_classes)

    def full_loss() -> float:
        Z = features @ W + b
        return float(np.mean(_logsumexp_rows(Z) - Z[np.arange(n), labels]))

    losses = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        order = rng_shuffle.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            Gb = features[batch]
            P = _softmax_rows(Gb @ W + b)
            P[np.arange(batch.size), labels[batch]] -= 1.0
            W -= cfg.learning_rate * (Gb.T @ P) / batch.size
            b -= cfg.learning_rate * P.sum(axis=0) / batch.size
        losses[epoch] = full_loss()
    return TrainResult(params=ClassifierParams(W=W, b=b), epoch_losses=losses)


def fused_features(method: FusionMethod, dataset: Dataset) -> np.ndarray:
    """Fuse every sample of a dataset into an (n, output_dim) matrix."""
    return np.stack([fuse(method, s.view_a, s.view_b) for s in dataset.samples])


def sgd_train(dataset: Dataset, method: FusionMethod, cfg: TrainConfig, init_seed: int) -> TrainResult:
    """Train the softmax head on the fused features of a dataset.

    Fusion parameters are frozen, so features are fused once up front and the
    SGD loop runs on the precomputed matrix.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    return fit_softmax(
        fused_features(method, dataset), dataset.labels(), dataset.num_classes, cfg, init_seed
    )


@dataclass(frozen=True)
class FactorizationReport:
    """How the logits of a trained model factor across the two views.

    jacobian_drift: max change of the view-A logit Jacobian when view B is
        swapped (and vice versa); zero iff each view's contribution ignores
        the other (concat, sum).
    additive_residual: max |z(fa,fb) - z(fa,0) - z(0,fb) + z(0,0)|; zero iff
        the logits are additively separable across views (concat, sum).
    cross_diag / cross_offdiag: max |d^2 z / d fa_i d fb_j| on and off the
        diagonal. Product fusion couples only i == j; the bilinear fusions
        couple every pair.
    """

    kind: str
    jacobian_drift: float
    additive_residual: float
    cross_diag: float
    cross_offdiag: float


def logit_decomposition_check(
    params: ClassifierParams, method: FusionMethod, fa, fb, fa_alt, fb_alt
) -> FactorizationReport:
    """Measure the cross-view structure of the logits of a trained model.

    All quantities are evaluated through the generic fuse/logits path, never
    by reading fusion internals. Every fusing function here is at most
    bilinear, so unit-step mixed differences recover second derivatives
    exactly; cost is O(C^2) fuse evaluations.
    """
    fa = as_feature_vector(fa, "fa")
    fb = as_feature_vector(fb, "fb")
    fa_alt = as_feature_vector(fa_alt, "fa_alt")
    fb_alt = as_feature_vector(fb_alt, "fb_alt")
    c = fa.size

    def z(a, b):
        return params.W.T @ fuse(method, a, b) + params.b

    def jac_a(a, b):
        return np.stack([fuse_backward(method, a, b, params.W[:, l])[0]
                         for l in range(params.num_classes)])

    def jac_b(a, b):
        return np.stack([fuse_backward(method, a, b, params.W[:, l])[1]
                         for l in range(params.num_classes)])

    drift_a = np.max(np.abs(jac_a(fa, fb) - jac_a(fa, fb_alt)))
    drift_b = np.max(np.abs(jac_b(fa, fb) - jac_b(fa_alt, fb)))

    zero = np.zeros(c)
    residual = np.max(np.abs(z(fa, fb) - z(fa, zero) - z(zero, fb) + z(zero, zero)))

    base = z(fa, fb)
    eye = np.eye(c)
    za = np.stack([z(fa + eye[i], fb) for i in range(c)])
    zb = np.stack([z(fa, fb + eye[j]) for j in range(c)])
    cross_diag = 0.0
    cross_offdiag = 0.0
    for i in range(c):
        for j in range(c):
            mixed = np.max(np.abs(z(fa + eye[i], fb + eye[j]) - za[i] - zb[j] + base))
            if i == j:
                cross_diag = max(cross_diag, mixed)
            else:
                cross_offdiag = max(cross_offdiag, mixed)

    return FactorizationReport(
        kind=method.kind,
        jacobian_drift=float(max(drift_a, drift_b)),
        additive_residual=float(residual),
        cross_diag=float(cross_diag),
        cross_offdiag=float(cross_offdiag),
    )
