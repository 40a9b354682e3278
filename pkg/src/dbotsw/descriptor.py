"""Gradient-block descriptors of keypoints.

A keypoint ``(t, j)`` is described on scale level ``j``.  A window of
``a * n_b`` samples, ``[t - a*n_b/2, t + a*n_b/2 - 1]``, is cut into
``n_b`` blocks of ``a`` samples.  Central-difference gradients are weighted
by a Gaussian of standard deviation ``a*n_b/2`` centred on ``t``, and each
block contributes its positive and negative weighted sums, interleaved as
``[pos_0, neg_0, pos_1, neg_1, ...]``.  Samples outside the series take
replicated edge values, so their gradient is zero beyond the first sample.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scalespace import Keypoint, ScaleSpace

__all__ = [
    "DescriptorParams",
    "describe_keypoint",
    "describe_all",
    "describe_levels",
]


@dataclass(frozen=True)
class DescriptorParams:
    a: int = 4
    n_b: int = 4

    def __post_init__(self):
        if int(self.a) != self.a or self.a < 1:
            raise ValueError("block size a must be a positive integer")
        if int(self.n_b) != self.n_b or self.n_b < 1:
            raise ValueError("block count n_b must be a positive integer")
        if (self.a * self.n_b) % 2:
            raise ValueError("a * n_b must be even")

    @property
    def dim(self) -> int:
        return 2 * self.n_b

    @property
    def half_width(self) -> int:
        return self.a * self.n_b // 2


def _padded_gradients(levels: np.ndarray, margin: int) -> np.ndarray:
    """Gradients at positions ``-margin .. N-1+margin`` of edge-padded levels."""
    padded = np.pad(levels, [(0, 0)] * (levels.ndim - 1) + [(margin + 1, margin + 1)],
                    mode="edge")
    return 0.5 * (padded[..., 2:] - padded[..., :-2])


def describe_levels(levels, ts, js, dp: DescriptorParams, chunk: int = 64) -> np.ndarray:
    """Descriptors for keypoints ``(ts[i], js[i])`` on a batch of scale spaces.

    ``levels`` is ``(n_levels, N)`` or ``(n_series, n_levels, N)``; the
    output has shape ``(..., n_keypoints, 2 * n_b)`` matching the input batch.
    """
    levels = np.asarray(levels, dtype=np.float64)
    single = levels.ndim == 2
    if single:
        levels = levels[None]
    ts = np.asarray(ts, dtype=np.intp)
    js = np.asarray(js, dtype=np.intp)
    n_series, n_levels, N = levels.shape
    if ts.size and (ts.min() < 0 or ts.max() >= N or js.min() < 0 or js.max() >= n_levels):
        raise ValueError("keypoint outside the scale space")

    h = dp.half_width
    offsets = np.arange(-h, h)
    weights = np.exp(-(offsets.astype(np.float64) ** 2) / (2.0 * h * h))
    cols = ts[:, None] + offsets[None, :] + h  # index into gradients starting at -h
    rows = js[:, None]

    out = np.empty((n_series, ts.size, 2 * dp.n_b))
    for start in range(0, n_series, chunk):
        grads = _padded_gradients(levels[start:start + chunk], h)
        vals = grads[:, rows, cols] * weights  # (c, n_kp, a*n_b)
        vals = vals.reshape(vals.shape[0], ts.size, dp.n_b, dp.a)
        out[start:start + chunk, :, 0::2] = np.where(vals > 0, vals, 0.0).sum(axis=-1)
        out[start:start + chunk, :, 1::2] = np.where(vals < 0, vals, 0.0).sum(axis=-1)
    return out[0] if single else out


def describe_keypoint(ss: ScaleSpace, kp: Keypoint, dp: DescriptorParams) -> np.ndarray:
    return describe_levels(ss.levels, [kp.t], [kp.j], dp)[0]


def describe_all(ss: ScaleSpace, kps, dp: DescriptorParams) -> np.ndarray:
    """Descriptors in keypoint order, shape ``(len(kps), 2 * n_b)``."""
    kps = list(kps)
    if not kps:
        return np.empty((0, dp.dim))
    return describe_levels(ss.levels, [k.t for k in kps], [k.j for k in kps], dp)
