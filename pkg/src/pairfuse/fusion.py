"""The five fusing functions combining two view features into one vector.

concat and sum keep the views additively separable; product couples only
same-index coordinates; full materializes every cross pair fa_i * fb_j
(quadratic blowup, guarded); compact approximates full in D dims via the
tensor sketch. Kind tokens: concat | sum | product | full | compact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sketch import (
    CountSketchParams,
    compact_bilinear,
    compact_bilinear_backward,
    sample_params,
)
from .types import STREAM_HASH_A, STREAM_HASH_B, as_feature_vector, make_rng

FUSION_KINDS = ("concat", "sum", "product", "full", "compact")

# full bilinear is a reference path; beyond this input dim the C^2 output is
# no longer desk-scale
FULL_BILINEAR_MAX_DIM = 64


@dataclass(frozen=True, eq=False)
class FusionMethod:
    """One fusing function, with frozen sketch parameters when compact."""

    kind: str
    params_a: CountSketchParams | None = None
    params_b: CountSketchParams | None = None

    def __post_init__(self):
        if self.kind not in FUSION_KINDS:
            raise ValueError(f"unknown fusion kind {self.kind!r}; expected one of {FUSION_KINDS}")
        if self.kind == "compact":
            if self.params_a is None or self.params_b is None:
                raise ValueError("compact fusion requires sketch params for both views")
            if self.params_a.input_dim != self.params_b.input_dim:
                raise ValueError("compact fusion requires equal view dims")
            if self.params_a.output_dim != self.params_b.output_dim:
                raise ValueError("compact fusion requires a shared sketch dim")
        elif self.params_a is not None or self.params_b is not None:
            raise ValueError(f"{self.kind} fusion takes no sketch params")

    def output_dim(self, input_dim: int) -> int:
        """Fused dim for a given per-view dim: 2C | C | C | C^2 | D."""
        if self.kind == "concat":
            return 2 * input_dim
        if self.kind in ("sum", "product"):
            return input_dim
        if self.kind == "full":
            return input_dim * input_dim
        return self.params_a.output_dim


def make_method(kind: str, input_dim: int, sketch_dim: int = 64, seed: int = 0) -> FusionMethod:
    """Build a fusion method; for compact, samples and freezes the two sketches.

    The two views draw from independent streams of the same seed, so the pair
    is reproducible from (seed, input_dim, sketch_dim) alone.
    """
    if kind != "compact":
        return FusionMethod(kind=kind)
    pa = sample_params(input_dim, sketch_dim, make_rng(seed, STREAM_HASH_A))
    pb = sample_params(input_dim, sketch_dim, make_rng(seed, STREAM_HASH_B))
    return FusionMethod(kind="compact", params_a=pa, params_b=pb)


def _check_pair(method: FusionMethod, fa: np.ndarray, fb: np.ndarray) -> None:
    if fa.size != fb.size:
        raise ValueError(f"view dims differ: {fa.size} vs {fb.size}")
    if method.kind == "full" and fa.size > FULL_BILINEAR_MAX_DIM:
        raise ValueError(
            f"full bilinear fusion is limited to dim <= {FULL_BILINEAR_MAX_DIM}, got {fa.size}"
        )
    if method.kind == "compact" and fa.size != method.params_a.input_dim:
        raise ValueError(
            f"view dim {fa.size} does not match sketch input_dim {method.params_a.input_dim}"
        )


def fuse(method: FusionMethod, fa, fb) -> np.ndarray:
    """Apply the fusing function to a pair of view features."""
    fa = as_feature_vector(fa, "fa")
    fb = as_feature_vector(fb, "fb")
    _check_pair(method, fa, fb)
    if method.kind == "concat":
        return np.concatenate([fa, fb])
    if method.kind == "sum":
        return fa + fb
    if method.kind == "product":
        return fa * fb
    if method.kind == "full":
        # pair (i, j) lands at index i*C + j
        return np.outer(fa, fb).ravel()
    return compact_bilinear(fa, fb, method.params_a, method.params_b)


def fuse_backward(method: FusionMethod, fa, fb, upstream_grad) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of fuse w.r.t. both view features."""
    fa = as_feature_vector(fa, "fa")
    fb = as_feature_vector(fb, "fb")
    _check_pair(method, fa, fb)
    upstream = np.asarray(upstream_grad, dtype=np.float64)
    expected = (method.output_dim(fa.size),)
    if upstream.shape != expected:
        raise ValueError(f"upstream gradient shape {upstream.shape}, expected {expected}")
    if method.kind == "concat":
        return upstream[: fa.size].copy(), upstream[fa.size :].copy()
    if method.kind == "sum":
        return upstream.copy(), upstream.copy()
    if method.kind == "product":
        return upstream * fb, upstream * fa
    if method.kind == "full":
        u = upstream.reshape(fa.size, fb.size)
        return u @ fb, u.T @ fa
    return compact_bilinear_backward(fa, fb, method.params_a, method.params_b, upstream)
