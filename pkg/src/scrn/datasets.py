"""LIBSVM-format sparse dataset parsing, serialization, and relabeling.

The text format is one sample per line, ``label idx:val idx:val ...`` with
1-based strictly increasing feature indices; ``#`` starts a comment that runs
to the end of the line.  Parsing is strict: malformed tokens and
non-increasing indices raise :class:`LibsvmParseError` with the offending
line number.  :func:`serialize_libsvm` emits a canonical form (shortest
round-trip float representation) such that parse -> serialize -> parse is a
fixpoint.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse

from .exceptions import InvalidInputError

ZERO_ONE = "zero_one"
PLUS_MINUS_ONE = "plus_minus_one"

# Canonical source for the named benchmark datasets (binary classification
# section of the LIBSVM dataset collection).
LIBSVM_SITE = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/"
KNOWN_DATASETS = {
    "a9a": LIBSVM_SITE + "binary/a9a",
    "phishing": LIBSVM_SITE + "binary/phishing",
    "w8a": LIBSVM_SITE + "binary/w8a",
    "ijcnn1": LIBSVM_SITE + "binary/ijcnn1.bz2",
}


class LibsvmParseError(InvalidInputError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Dataset:
    """Parsed dataset: CSR feature matrix (0-based columns) plus labels."""

    name: str
    X: scipy.sparse.csr_matrix
    labels: np.ndarray
    label_convention: str

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]


def _classify_labels(labels: np.ndarray) -> str:
    values = set(np.unique(labels))
    if values <= {0.0, 1.0}:
        return ZERO_ONE
    if values <= {-1.0, 1.0}:
        return PLUS_MINUS_ONE
    return "other"


def parse_libsvm(source, n_features: int | None = None, name: str = "") -> Dataset:
    """Parse LIBSVM text from a file path (str) or raw bytes.

    The feature count defaults to the largest index observed;
    ``n_features`` overrides it for datasets with trailing all-zero columns.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
        if not name:
            name = os.path.splitext(os.path.basename(os.fspath(source)))[0]
    else:
        raise InvalidInputError(f"unsupported source type {type(source).__name__}")

    labels = []
    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    max_index = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise LibsvmParseError(f"bad label token {tokens[0]!r}", lineno) from None
        prev = 0
        for tok in tokens[1:]:
            idx_str, _, val_str = tok.partition(":")
            if not val_str:
                raise LibsvmParseError(f"missing ':' in token {tok!r}", lineno)
            try:
                idx = int(idx_str)
                val = float(val_str)
            except ValueError:
                raise LibsvmParseError(f"bad feature token {tok!r}", lineno) from None
            if idx < 1:
                raise LibsvmParseError(f"index {idx} is not >= 1", lineno)
            if idx <= prev:
                raise LibsvmParseError(
                    f"index {idx} does not increase (previous {prev})", lineno
                )
            if not np.isfinite(val):
                raise LibsvmParseError(f"non-finite value in token {tok!r}", lineno)
            prev = idx
            indices.append(idx - 1)
            values.append(val)
        max_index = max(max_index, prev)
        indptr.append(len(indices))

    if not labels:
        raise InvalidInputError("empty dataset: no sample lines found")
    n = max_index if n_features is None else int(n_features)
    if n < max_index:
        raise InvalidInputError(
            f"n_features override {n} is below the largest observed index {max_index}"
        )
    if n < 1:
        raise InvalidInputError("dataset has no features")
    X = scipy.sparse.csr_matrix(
        (np.array(values), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(labels), n),
    )
    label_arr = np.array(labels)
    return Dataset(
        name=name, X=X, labels=label_arr,
        label_convention=_classify_labels(label_arr),
    )


def serialize_libsvm(dataset: Dataset) -> str:
    """Canonical text form: 1-based indices, shortest round-trip floats."""
    X = dataset.X
    out = []
    for i in range(dataset.m):
        parts = [repr(float(dataset.labels[i]))]
        row = X.getrow(i)
        order = np.argsort(row.indices)
        for j, v in zip(row.indices[order], row.data[order]):
            parts.append(f"{j + 1}:{float(v)!r}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def relabel(dataset: Dataset, target: str) -> Dataset:
    """Map labels between the {0,1} and {-1,+1} conventions."""
    if target not in (ZERO_ONE, PLUS_MINUS_ONE):
        raise InvalidInputError(f"unknown label convention {target!r}")
    current = _classify_labels(dataset.labels)
    if current == "other":
        raise InvalidInputError(
            "labels fit neither the {0,1} nor the {-1,+1} convention"
        )
    if current == target:
        return dataset
    if target == ZERO_ONE:  # -1 -> 0
        new = np.where(dataset.labels < 0, 0.0, 1.0)
    else:  # 0 -> -1
        new = np.where(dataset.labels <= 0, -1.0, 1.0)
    return replace(dataset, labels=new, label_convention=target)


def dataset_summary(dataset: Dataset) -> dict:
    """Shape, sparsity, and label statistics for reporting."""
    unique, counts = np.unique(dataset.labels, return_counts=True)
    return {
        "name": dataset.name,
        "samples": dataset.m,
        "features": dataset.n,
        "nonzeros": int(dataset.X.nnz),
        "density": float(dataset.X.nnz / max(dataset.m * dataset.n, 1)),
        "label_convention": dataset.label_convention,
        "label_counts": {float(u): int(c) for u, c in zip(unique, counts)},
    }
