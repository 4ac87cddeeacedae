"""Trained model bundle and its JSON file format.

A model file freezes everything needed to reproduce predictions: fusion kind,
sketch hashes/signs (compact), the input scale factor, the softmax head, and
the seeds the run was derived from. Weights are stored to 9 significant
digits. The late score-averaging baseline stores one head per view.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .classifier import ClassifierParams, predict_proba, predict_late_avg, _softmax_rows
from .fusion import FusionMethod, fuse
from .sketch import CountSketchParams
from .types import scale_features

FORMAT_VERSION = 1
LATE_AVG = "avg-late"


@dataclass(frozen=True, eq=False)
class TrainedModel:
    fusion_kind: str
    feature_dim: int
    num_classes: int
    sketch_dim: int | None
    alpha: float
    seeds: dict[str, int]
    head: ClassifierParams
    head_b: ClassifierParams | None = None
    sketch_a: CountSketchParams | None = None
    sketch_b: CountSketchParams | None = None

    def __post_init__(self):
        if self.fusion_kind == "compact" and (self.sketch_a is None or self.sketch_b is None):
            raise ValueError("compact model requires sketch params for both views")
        if self.fusion_kind == LATE_AVG and self.head_b is None:
            raise ValueError("late-average model requires a second per-view head")

    def fusion_method(self) -> FusionMethod:
        if self.fusion_kind == LATE_AVG:
            raise ValueError("late-average models have no fusing function")
        return FusionMethod(self.fusion_kind, self.sketch_a, self.sketch_b)

    def predict_proba(self, fa, fb) -> np.ndarray:
        fa = scale_features(fa, self.alpha)
        fb = scale_features(fb, self.alpha)
        if self.fusion_kind == LATE_AVG:
            return predict_late_avg(self.head, self.head_b, fa, fb)
        return predict_proba(self.head, fuse(self.fusion_method(), fa, fb))

    def predict_label(self, fa, fb) -> int:
        return int(np.argmax(self.predict_proba(fa, fb)))

    def predict_proba_matrix(self, view_a: np.ndarray, view_b: np.ndarray) -> np.ndarray:
        """Row-wise probabilities for (n, C) view matrices."""
        view_a = self.alpha * np.asarray(view_a, dtype=np.float64)
        view_b = self.alpha * np.asarray(view_b, dtype=np.float64)
        if self.fusion_kind == LATE_AVG:
            return 0.5 * (
                _softmax_rows(view_a @ self.head.W + self.head.b)
                + _softmax_rows(view_b @ self.head_b.W + self.head_b.b)
            )
        method = self.fusion_method()
        fused = np.stack([fuse(method, a, b) for a, b in zip(view_a, view_b)])
        return _softmax_rows(fused @ self.head.W + self.head.b)


def _round9(x: float) -> float:
    return float(f"{float(x):.9g}")


def _round9_nested(a: np.ndarray) -> list:
    return [[_round9(v) for v in row] for row in np.asarray(a)]


def model_to_dict(model: TrainedModel) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "fusion": model.fusion_kind,
        "C": model.feature_dim,
        "D": model.sketch_dim,
        "L": model.num_classes,
        "alpha": _round9(model.alpha),
        "seeds": {k: int(v) for k, v in model.seeds.items()},
        "W": _round9_nested(model.head.W),
        "b": [_round9(v) for v in model.head.b],
    }
    if model.fusion_kind == "compact":
        doc["hash_a"] = model.sketch_a.h.tolist()
        doc["sign_a"] = model.sketch_a.s.tolist()
        doc["hash_b"] = model.sketch_b.h.tolist()
        doc["sign_b"] = model.sketch_b.s.tolist()
    if model.fusion_kind == LATE_AVG:
        doc["W_b"] = _round9_nested(model.head_b.W)
        doc["b_b"] = [_round9(v) for v in model.head_b.b]
    return doc


def model_from_dict(doc: dict) -> TrainedModel:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {version!r}")
    kind = doc["fusion"]
    feature_dim = int(doc["C"])
    sketch_dim = None if doc.get("D") is None else int(doc["D"])
    sketch_a = sketch_b = None
    if kind == "compact":
        sketch_a = CountSketchParams(doc["hash_a"], doc["sign_a"], feature_dim, sketch_dim)
        sketch_b = CountSketchParams(doc["hash_b"], doc["sign_b"], feature_dim, sketch_dim)
    head_b = None
    if kind == LATE_AVG:
        head_b = ClassifierParams(np.array(doc["W_b"]), np.array(doc["b_b"]))
    return TrainedModel(
        fusion_kind=kind,
        feature_dim=feature_dim,
        num_classes=int(doc["L"]),
        sketch_dim=sketch_dim,
        alpha=float(doc["alpha"]),
        seeds={k: int(v) for k, v in doc.get("seeds", {}).items()},
        head=ClassifierParams(np.array(doc["W"]), np.array(doc["b"])),
        head_b=head_b,
        sketch_a=sketch_a,
        sketch_b=sketch_b,
    )


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
