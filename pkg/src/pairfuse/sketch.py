"""Count Sketch projection and the compact bilinear (tensor sketch) pooling.

A Count Sketch projects a length-C feature into D buckets: coordinate i lands
in bucket h_i with sign s_i, both drawn uniformly once and then frozen. The
sketch of an outer product of two features never needs the outer product
itself: it equals the circular convolution of the two per-view sketches,
computed here through the Fourier domain. The direct construction (materialize
the outer product, sketch it with the combined hash) is kept as
`bilinear_sketch_oracle` for verification only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fft import complex_hadamard, dfft, idfft, is_power_of_two
from .types import as_feature_vector

# Largest outer product the oracle will materialize.
_ORACLE_MAX_ENTRIES = 2**20


class SketchDimWarning(UserWarning):
    """Sketch dimension exceeds the squared input dimension: allowed, pointless."""


@dataclass(frozen=True, eq=False)
class CountSketchParams:
    """Frozen hash/sign draw defining one Count Sketch projection.

    h maps input coordinates to output buckets (0-based, in [0, D)); s carries
    the per-coordinate signs in {-1, +1}. Immutable after construction so a
    model's projection can be persisted and reproduced exactly.
    """

    h: np.ndarray
    s: np.ndarray
    input_dim: int
    output_dim: int

    def __post_init__(self):
        h = np.array(self.h, dtype=np.int64, copy=True)
        s = np.array(self.s, dtype=np.int64, copy=True)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "s", s)
        if h.ndim != 1 or s.shape != h.shape:
            raise ValueError(f"h and s must be equal-length 1-D arrays, got {h.shape} and {s.shape}")
        if self.input_dim < 1 or h.size != self.input_dim:
            raise ValueError(f"h length {h.size} does not match input_dim {self.input_dim}")
        if not is_power_of_two(self.output_dim):
            raise ValueError(f"output_dim must be a power of two, got {self.output_dim}")
        if h.size and (h.min() < 0 or h.max() >= self.output_dim):
            raise ValueError("hash entries must lie in [0, output_dim)")
        if not np.all(np.abs(s) == 1):
            raise ValueError("sign entries must be -1 or +1")
        h.setflags(write=False)
        s.setflags(write=False)

    def projection_matrix(self) -> np.ndarray:
        """Dense (C, D) bucket-indicator matrix H with H[i, h_i] = 1."""
        H = np.zeros((self.input_dim, self.output_dim))
        H[np.arange(self.input_dim), self.h] = 1.0
        return H


def sample_params(input_dim: int, output_dim: int, rng: np.random.Generator) -> CountSketchParams:
    """Draw fresh Count Sketch parameters from a random stream.

    Each bucket index is uniform over [0, output_dim) and each sign uniform
    over {-1, +1}, all mutually independent. Draw order is fixed (h then s) so
    a given stream always yields the same parameters.
    """
    if input_dim < 1:
        raise ValueError(f"input_dim must be positive, got {input_dim}")
    if not is_power_of_two(output_dim):
        raise ValueError(f"output_dim must be a power of two, got {output_dim}")
    if output_dim > input_dim * input_dim:
        warnings.warn(
            f"sketch dim {output_dim} exceeds input_dim^2 = {input_dim * input_dim}; "
            "the sketch cannot gain resolution beyond the outer product itself",
            SketchDimWarning,
            stacklevel=2,
        )
    h = rng.integers(0, output_dim, size=input_dim, dtype=np.int64)
    s = rng.integers(0, 2, size=input_dim, dtype=np.int64) * 2 - 1
    return CountSketchParams(h=h, s=s, input_dim=input_dim, output_dim=output_dim)


def count_sketch(f, params: CountSketchParams) -> np.ndarray:
    """Project a feature vector: out_d = sum over {i : h_i = d} of s_i * f_i."""
    f = as_feature_vector(f)
    if f.size != params.input_dim:
        raise ValueError(f"feature dim {f.size} does not match sketch input_dim {params.input_dim}")
    return np.bincount(params.h, weights=params.s * f, minlength=params.output_dim)


def compact_bilinear(fa, fb, pa: CountSketchParams, pb: CountSketchParams) -> np.ndarray:
    """Sketch of the outer product fa (x) fb, via spectra of the per-view sketches.

    Computes idfft(dfft(sketch_a) * dfft(sketch_b)): the circular convolution
    of the two Count Sketches, which is exactly the combined-hash Count Sketch
    of the outer product (see bilinear_sketch_oracle). Output length is the
    shared sketch dim D.
    """
    if pa.output_dim != pb.output_dim:
        raise ValueError(f"sketch output dims differ: {pa.output_dim} vs {pb.output_dim}")
    sa = count_sketch(fa, pa)
    sb = count_sketch(fb, pb)
    return idfft(complex_hadamard(dfft(sa), dfft(sb)))


def bilinear_sketch_oracle(fa, fb, pa: CountSketchParams, pb: CountSketchParams) -> np.ndarray:
    """Direct sketch of the materialized outer product; verification path only.

    Builds fa (x) fb explicitly and count-sketches it with the combined hash
    h(i, j) = (h_a_i + h_b_j) mod D and sign s(i, j) = s_a_i * s_b_j. Must
    agree with compact_bilinear to near machine precision. Guarded against
    outer products above 2^20 entries.
    """
    fa = as_feature_vector(fa, "fa")
    fb = as_feature_vector(fb, "fb")
    if fa.size != pa.input_dim or fb.size != pb.input_dim:
        raise ValueError("feature dims do not match sketch input dims")
    if pa.output_dim != pb.output_dim:
        raise ValueError(f"sketch output dims differ: {pa.output_dim} vs {pb.output_dim}")
    if fa.size * fb.size > _ORACLE_MAX_ENTRIES:
        raise ValueError(
            f"outer product of {fa.size} x {fb.size} exceeds the oracle guard "
            f"of {_ORACLE_MAX_ENTRIES} entries"
        )
    d = pa.output_dim
    combined_h = (pa.h[:, None] + pb.h[None, :]) % d
    combined_s = pa.s[:, None] * pb.s[None, :]
    outer = fa[:, None] * fb[None, :]
    return np.bincount(
        combined_h.ravel(), weights=(combined_s * outer).ravel(), minlength=d
    )


def compact_bilinear_backward(
    fa, fb, pa: CountSketchParams, pb: CountSketchParams, upstream_grad
) -> tuple[np.ndarray, np.ndarray]:
    """Exact input gradients of compact_bilinear for a given upstream gradient.

    The forward map is the circular convolution of the two sketches, so the
    sketch-space gradients are circular correlations (conjugate spectra), and
    the Count Sketch adjoint gathers them back: grad_f_i = s_i * grad_sketch[h_i].
    """
    fa = as_feature_vector(fa, "fa")
    fb = as_feature_vector(fb, "fb")
    if fa.size != pa.input_dim or fb.size != pb.input_dim:
        raise ValueError("feature dims do not match sketch input dims")
    if pa.output_dim != pb.output_dim:
        raise ValueError(f"sketch output dims differ: {pa.output_dim} vs {pb.output_dim}")
    upstream = np.asarray(upstream_grad, dtype=np.float64)
    if upstream.shape != (pa.output_dim,):
        raise ValueError(
            f"upstream gradient shape {upstream.shape} does not match sketch dim {pa.output_dim}"
        )
    spec_u = dfft(upstream)
    spec_a = dfft(count_sketch(fa, pa))
    spec_b = dfft(count_sketch(fb, pb))
    grad_sketch_a = idfft(complex_hadamard(spec_u, np.conj(spec_b)))
    grad_sketch_b = idfft(complex_hadamard(spec_u, np.conj(spec_a)))
    grad_fa = pa.s * grad_sketch_a[pa.h]
    grad_fb = pb.s * grad_sketch_b[pb.h]
    return grad_fa, grad_fb
