"""CSV formats: paired-feature datasets, benchmark reports, confusion matrices.

Dataset files carry one sample per line under the header
`label,a0,...,a{C-1},b0,...,b{C-1}`, comma-delimited, LF line endings, floats
printed to 9 significant digits. Any feature extractor can produce this. A
file written by save_features_csv reloads to the identical dataset and
re-saves byte-identically.
"""

from __future__ import annotations

import numpy as np

from .types import Dataset, dataset_from_arrays


class ParseError(ValueError):
    """Malformed dataset file; message names the offending line."""


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def save_features_csv(dataset: Dataset, path) -> None:
    c = dataset.dim
    header = "label," + ",".join(f"a{i}" for i in range(c)) + "," + ",".join(
        f"b{i}" for i in range(c)
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for s in dataset.samples:
            fields = [str(s.label)]
            fields.extend(_fmt(v) for v in s.view_a)
            fields.extend(_fmt(v) for v in s.view_b)
            fh.write(",".join(fields) + "\n")


def _parse_header(line: str) -> int:
    fields = line.split(",")
    if len(fields) < 3 or fields[0] != "label" or len(fields) % 2 == 0:
        raise ParseError(f"line 1: malformed header {line!r}")
    c = (len(fields) - 1) // 2
    expected = ["label"] + [f"a{i}" for i in range(c)] + [f"b{i}" for i in range(c)]
    if fields != expected:
        raise ParseError(f"line 1: malformed header, expected {','.join(expected)!r}")
    return c


def load_features_csv(path, num_classes: int | None = None) -> Dataset:
    """Load a paired-feature dataset.

    num_classes defaults to max label + 1; when given explicitly, every label
    must lie below it. Rejects ragged rows, non-integer or negative labels and
    non-finite values, naming the line.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(f"{path}: empty file")
    c = _parse_header(lines[0].rstrip("\r"))
    if len(lines) == 1:
        raise ParseError(f"{path}: no data rows")

    n = len(lines) - 1
    labels = np.empty(n, dtype=np.int64)
    view_a = np.empty((n, c))
    view_b = np.empty((n, c))
    for k, line in enumerate(lines[1:]):
        lineno = k + 2
        fields = line.rstrip("\r").split(",")
        if len(fields) != 1 + 2 * c:
            raise ParseError(
                f"line {lineno}: expected {1 + 2 * c} fields for C={c}, got {len(fields)}"
            )
        try:
            label = int(fields[0])
        except ValueError:
            raise ParseError(f"line {lineno}: label {fields[0]!r} is not an integer") from None
        if label < 0:
            raise ParseError(f"line {lineno}: negative label {label}")
        try:
            values = np.array([float(v) for v in fields[1:]])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric feature value") from None
        if not np.all(np.isfinite(values)):
            raise ParseError(f"line {lineno}: non-finite feature value")
        labels[k] = label
        view_a[k] = values[:c]
        view_b[k] = values[c:]

    if num_classes is None:
        num_classes = int(labels.max()) + 1
    else:
        bad = np.nonzero(labels >= num_classes)[0]
        if bad.size:
            raise ParseError(
                f"line {bad[0] + 2}: label {labels[bad[0]]} >= num_classes {num_classes}"
            )
    return dataset_from_arrays(view_a, view_b, labels, num_classes)


def write_report_csv(path, method_order, accuracy, per_class, num_classes: int) -> None:
    """Accuracy table: method,accuracy,acc_class_0..acc_class_{L-1}."""
    header = "method,accuracy," + ",".join(f"acc_class_{i}" for i in range(num_classes))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for m in method_order:
            row = [m, _fmt(accuracy[m])] + [_fmt(v) for v in per_class[m]]
            fh.write(",".join(row) + "\n")


def write_confusion_csv(path, confusion: np.ndarray) -> None:
    """One confusion matrix, row per true class (entries may be repeat means)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in np.asarray(confusion):
            fh.write(",".join(_fmt(v) for v in row) + "\n")
