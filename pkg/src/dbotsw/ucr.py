"""Reading and writing UCR-format time-series datasets.

A UCR file holds one series per line: ``label,v1,v2,...,vL``.  The archive
has shipped comma-, tab- and whitespace-separated variants over the years;
the delimiter is detected from the first non-empty line and must be used
consistently afterwards.
"""
from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "TimeSeries",
    "Dataset",
    "UCRFormatError",
    "parse_ucr_file",
    "parse_ucr_text",
    "write_ucr_file",
    "format_ucr_text",
    "class_counts",
    "find_ucr_file",
    "load_ucr",
    "BUNDLED_DATASETS",
]

BUNDLED_DATASETS = ("Coffee", "GunPoint")

# Old (2015) and new (2018) archive spellings of the same dataset.
_ALIASES = {
    "Gun_Point": "GunPoint",
    "Cricket_X": "CricketX",
    "Cricket_Y": "CricketY",
    "Cricket_Z": "CricketZ",
    "synthetic_control": "SyntheticControl",
    "Two_Patterns": "TwoPatterns",
    "50words": "FiftyWords",
}


class UCRFormatError(ValueError):
    """Malformed UCR content; ``lineno`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, lineno: int = 0, path: str | None = None):
        where = f"{path}:" if path else ""
        prefix = f"{where}line {lineno}: " if lineno else (f"{path}: " if path else "")
        super().__init__(prefix + message)
        self.lineno = lineno
        self.path = path


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    label: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a time series needs at least 2 values")
        if not np.all(np.isfinite(values)):
            raise ValueError("time series values must be finite")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "label", int(self.label))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Dataset:
    """A read-only collection of equal-length labeled series.

    Values live in a single ``(n_series, length)`` array ``X`` with labels in
    ``y``; :attr:`series` gives the per-series view.
    """

    X: np.ndarray
    y: np.ndarray
    name: str = ""
    classes: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        y = np.array(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("dataset must contain at least one series")
        if X.shape[1] < 2:
            raise ValueError("series length must be at least 2")
        if y.shape != (X.shape[0],):
            raise ValueError("need exactly one label per series")
        if not np.all(np.isfinite(X)):
            raise ValueError("series values must be finite")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "classes", tuple(int(c) for c in np.unique(y)))

    @classmethod
    def from_series(cls, series, name: str = "") -> Dataset:
        series = list(series)
        if not series:
            raise ValueError("dataset must contain at least one series")
        lengths = {len(s) for s in series}
        if len(lengths) != 1:
            raise ValueError(f"series lengths differ: {sorted(lengths)}")
        return cls(np.stack([s.values for s in series]), [s.label for s in series], name)

    @property
    def series(self) -> tuple[TimeSeries, ...]:
        return tuple(TimeSeries(x, int(c)) for x, c in zip(self.X, self.y))

    @property
    def length(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, index) -> Dataset:
        return Dataset(self.X[index], self.y[index], self.name)


def _detect_delimiter(line: str) -> str | None:
    if "," in line:
        return ","
    if "\t" in line:
        return "\t"
    return None  # runs of spaces


def parse_ucr_text(text: str, name: str = "", path: str | None = None) -> Dataset:
    """Parse UCR-format text. See :func:`parse_ucr_file`."""
    delimiter: str | None = None
    detected = False
    rows: list[np.ndarray] = []
    labels: list[int] = []
    real_labels: dict[int, float] = {}
    length = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if not detected:
            delimiter = _detect_delimiter(line)
            detected = True
        tokens = line.split(delimiter) if delimiter else line.split()
        tokens = [t.strip() for t in tokens]
        if len(tokens) < 3:
            raise UCRFormatError(
                f"expected a label and at least 2 values, got {len(tokens)} field(s)",
                lineno, path)
        try:
            numbers = [float(t) for t in tokens]
        except ValueError:
            bad = next(t for t in tokens if not _is_float(t))
            raise UCRFormatError(f"non-numeric token {bad!r}", lineno, path) from None
        if not all(math.isfinite(v) for v in numbers):
            raise UCRFormatError("non-finite value", lineno, path)

        raw_label = numbers[0]
        label = int(raw_label)
        seen = real_labels.setdefault(label, raw_label)
        if seen != raw_label:
            raise UCRFormatError(
                f"labels {seen!r} and {raw_label!r} both truncate to {label}",
                lineno, path)

        values = np.array(numbers[1:], dtype=np.float64)
        if length is None:
            length = values.size
        elif values.size != length:
            raise UCRFormatError(
                f"ragged row: {values.size} values where {length} expected",
                lineno, path)
        rows.append(values)
        labels.append(label)

    if not rows:
        raise UCRFormatError("empty file", 0, path)
    return Dataset(np.vstack(rows), labels, name)


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_ucr_file(path, name: str | None = None) -> Dataset:
    """Read a UCR train or test file into a :class:`Dataset`.

    Real-valued labels such as ``1.0`` are truncated to integers; no
    normalization is applied to the values.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if name is None:
        stem = path.stem
        for suffix in ("_TRAIN", "_TEST"):
            if stem.upper().endswith(suffix):
                stem = stem[: -len(suffix)]
        name = stem
    return parse_ucr_text(text, name=name, path=str(path))


def format_ucr_text(dataset: Dataset, delimiter: str = ",") -> str:
    lines = []
    for x, c in zip(dataset.X, dataset.y):
        lines.append(delimiter.join([str(int(c))] + [repr(float(v)) for v in x]))
    return "\n".join(lines) + "\n"


def write_ucr_file(dataset: Dataset, path, delimiter: str = ",") -> None:
    Path(path).write_text(format_ucr_text(dataset, delimiter), encoding="utf-8")


def class_counts(dataset: Dataset) -> dict[int, int]:
    """Number of series per label; labels absent from the data have no key."""
    return dict(sorted(Counter(int(c) for c in dataset.y).items()))


def _name_variants(name: str) -> list[str]:
    out = [name]
    alias = _ALIASES.get(name)
    if alias:
        out.append(alias)
    out.extend(old for old, new in _ALIASES.items() if new == name)
    return out


def find_ucr_file(name: str, split: str, root=None) -> Path | None:
    """Locate ``<name>_<SPLIT>`` under ``root``, ``$UCR_ROOT``, then bundled data.

    Both the 2015 (``Gun_Point/Gun_Point_TRAIN``) and 2018
    (``GunPoint/GunPoint_TRAIN.tsv``) layouts are recognised.
    """
    split = split.upper()
    if split not in ("TRAIN", "TEST"):
        raise ValueError("split must be 'train' or 'test'")
    roots = []
    if root is not None:
        roots.append(Path(root))
    if os.environ.get("UCR_ROOT"):
        roots.append(Path(os.environ["UCR_ROOT"]))
    roots.append(Path(str(resources.files("dbotsw") / "data" / "ucr")))
    for base in roots:
        for variant in _name_variants(name):
            for ext in ("", ".txt", ".tsv", ".csv"):
                for candidate in (base / variant / f"{variant}_{split}{ext}",
                                  base / f"{variant}_{split}{ext}"):
                    if candidate.is_file():
                        return candidate
    return None


def load_ucr(name: str, split: str, root=None) -> Dataset:
    path = find_ucr_file(name, split, root)
    if path is None:
        raise FileNotFoundError(
            f"UCR dataset {name!r} ({split}) not found; set UCR_ROOT to an archive copy")
    return parse_ucr_file(path, name=name)
