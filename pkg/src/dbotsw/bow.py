"""Word histograms and their normalizations.

Schemes: ``raw`` counts, ``l2``, ``ssr`` (square root then l2) and ``idf``
(division by training document frequency, then l2).  Document frequencies
are always computed on training series only.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .codebook import Codebook, assign_many
from .descriptor import DescriptorParams, describe_all, describe_levels
from .scalespace import (
    ScaleSpaceParams,
    build_scale_space,
    build_scale_spaces,
    dense_positions,
    detect_extrema,
)

__all__ = [
    "NormScheme",
    "BowVector",
    "DocumentFrequency",
    "histogram",
    "owner_histograms",
    "extract_descriptors",
    "l2_normalize",
    "ssr_normalize",
    "idf_normalize",
    "document_frequency",
    "normalize",
    "dense_descriptors",
    "series_to_bow",
    "dataset_to_bows",
    "export_bows_csv",
    "export_bows_json",
]


class NormScheme(str, Enum):
    RAW = "raw"
    L2 = "l2"
    SSR_L2 = "ssr"
    IDF_L2 = "idf"

    @classmethod
    def parse(cls, value) -> NormScheme:
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("+", "_")
        aliases = {"ssr_l2": "ssr", "idf_l2": "idf", "none": "raw"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class BowVector:
    values: np.ndarray
    scheme: NormScheme = NormScheme.RAW

    @property
    def k(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class DocumentFrequency:
    df: np.ndarray  # (k,) integer counts
    n_train: int

    def __post_init__(self):
        df = np.asarray(self.df, dtype=np.int64)
        if df.ndim != 1 or np.any(df < 0) or np.any(df > self.n_train):
            raise ValueError("document frequencies must lie in [0, n_train]")
        object.__setattr__(self, "df", df)


def _values(h) -> np.ndarray:
    return np.asarray(h.values if isinstance(h, BowVector) else h, dtype=np.float64)


def histogram(assignments, k: int) -> BowVector:
    a = np.asarray(assignments, dtype=np.intp)
    if a.size and (a.min() < 0 or a.max() >= k):
        raise ValueError(f"word index outside [0, {k - 1}]")
    return BowVector(np.bincount(a, minlength=k).astype(np.float64), NormScheme.RAW)


def _l2(v: np.ndarray) -> np.ndarray:
    norm = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
    return np.where(norm > 0, v / np.where(norm > 0, norm, 1.0), v)


def l2_normalize(h) -> BowVector:
    """``h / ||h||``; the zero vector is returned unchanged."""
    return BowVector(_l2(_values(h)), NormScheme.L2)


def ssr_normalize(h) -> BowVector:
    v = _values(h)
    if np.any(v < 0):
        raise ValueError("SSR expects non-negative counts")
    return BowVector(_l2(np.sqrt(v)), NormScheme.SSR_L2)


def _idf_weights(df: DocumentFrequency) -> np.ndarray:
    # 1 / max(df, 1) rescaled to peak at 1; l2 removes the common factor and
    # uniform document frequencies give weights of exactly 1
    w = 1.0 / np.maximum(df.df, 1)
    return w / w.max()


def idf_normalize(h, df: DocumentFrequency) -> BowVector:
    v = _values(h)
    if v.shape[-1] != df.df.size:
        raise ValueError("histogram and document frequency sizes differ")
    if np.any(v < 0):
        raise ValueError("IDF expects non-negative counts")
    return BowVector(_l2(v * _idf_weights(df)), NormScheme.IDF_L2)


def document_frequency(raw_histograms) -> DocumentFrequency:
    """Number of series (rows) in which each word occurs."""
    H = np.atleast_2d(np.asarray(raw_histograms))
    return DocumentFrequency((H > 0).sum(axis=0), H.shape[0])


def normalize(H, scheme, df: DocumentFrequency | None = None) -> np.ndarray:
    """Apply ``scheme`` to one histogram or to each row of a matrix."""
    scheme = NormScheme.parse(scheme)
    H = np.asarray(H, dtype=np.float64)
    if scheme is NormScheme.RAW:
        return H.copy()
    if scheme is NormScheme.L2:
        return _l2(H)
    if scheme is NormScheme.SSR_L2:
        if np.any(H < 0):
            raise ValueError("SSR expects non-negative counts")
        return _l2(np.sqrt(H))
    if df is None:
        raise ValueError("IDF normalization needs document frequencies")
    if H.shape[-1] != df.df.size:
        raise ValueError("histogram and document frequency sizes differ")
    return _l2(H * _idf_weights(df))


def dense_descriptors(X, sp: ScaleSpaceParams, dp: DescriptorParams) -> np.ndarray:
    """Dense D-BoTSW descriptors, ``(n_series, n_keypoints, 2 * n_b)``.

    Keypoints are ordered by scale then time, as in
    :func:`~dbotsw.scalespace.dense_keypoints`.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    levels = build_scale_spaces(X, sp)
    positions = dense_positions(X.shape[1], sp.tau_step)
    n_levels = levels.shape[1]
    ts = np.tile(positions, n_levels)
    js = np.repeat(np.arange(n_levels), positions.size)
    return describe_levels(levels, ts, js, dp)


def extrema_descriptors(X, sp: ScaleSpaceParams, dp: DescriptorParams):
    """BoTSW descriptors from scale-space extrema.

    Returns ``(descriptors, owner)`` where ``owner[i]`` is the row of ``X``
    that descriptor ``i`` came from; series may contribute no descriptor.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    blocks, owners = [], []
    for row, s in enumerate(X):
        ss = build_scale_space(s, sp)
        kps = detect_extrema(ss)
        if kps:
            blocks.append(describe_all(ss, kps, dp))
            owners.append(np.full(len(kps), row, dtype=np.intp))
    if not blocks:
        return np.empty((0, dp.dim)), np.empty(0, dtype=np.intp)
    return np.concatenate(blocks), np.concatenate(owners)


def extract_descriptors(X, sp: ScaleSpaceParams, dp: DescriptorParams,
                        extraction: str = "dense"):
    """Flat ``(descriptors, owner)`` for ``"dense"`` or ``"extrema"`` keypoints."""
    if extraction == "dense":
        D = dense_descriptors(X, sp, dp)
        n, m, dim = D.shape
        return D.reshape(n * m, dim), np.repeat(np.arange(n), m)
    if extraction == "extrema":
        return extrema_descriptors(X, sp, dp)
    raise ValueError(f"unknown keypoint extraction {extraction!r}")


def owner_histograms(words, owner, n_series: int, k: int) -> np.ndarray:
    """Raw word counts per series from flat word indices and their owners."""
    flat = np.asarray(owner) * k + np.asarray(words)
    return np.bincount(flat, minlength=n_series * k).reshape(n_series, k).astype(np.float64)


def dataset_to_bows(X, cb: Codebook, sp: ScaleSpaceParams, dp: DescriptorParams,
                    scheme, df: DocumentFrequency | None = None,
                    extraction: str = "dense") -> np.ndarray:
    """Normalized BoW matrix ``(n_series, k)`` for a batch of series."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    D, owner = extract_descriptors(X, sp, dp, extraction)
    H = owner_histograms(assign_many(cb, D), owner, X.shape[0], cb.k)
    return normalize(H, scheme, df)


def series_to_bow(s, cb: Codebook, sp: ScaleSpaceParams, dp: DescriptorParams,
                  scheme, df: DocumentFrequency | None = None) -> BowVector:
    scheme = NormScheme.parse(scheme)
    if (scheme is NormScheme.IDF_L2) != (df is not None):
        raise ValueError("document frequencies are required for, and only for, IDF")
    values = getattr(s, "values", s)
    return BowVector(dataset_to_bows(np.asarray(values)[None, :], cb, sp, dp, scheme, df)[0],
                     scheme)


def export_bows_csv(path, bows, labels, ids=None) -> None:
    bows = np.atleast_2d(np.asarray(bows))
    ids = range(len(bows)) if ids is None else ids
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series_id", "label"] + [f"w{i}" for i in range(bows.shape[1])])
        for sid, label, row in zip(ids, labels, bows):
            writer.writerow([sid, int(label)] + [repr(float(v)) for v in row])


def export_bows_json(path, bows, labels, ids=None) -> None:
    bows = np.atleast_2d(np.asarray(bows))
    ids = range(len(bows)) if ids is None else ids
    rows = [{"series_id": sid, "label": int(label), "values": [float(v) for v in row]}
            for sid, label, row in zip(ids, labels, bows)]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh)
