"""Gaussian scale space, difference-of-Gaussians and keypoint extraction.

Level ``j`` of the scale space is the input filtered with a Gaussian of
width ``k_sc**j * sigma0``.  Every level is computed from the original
series, never by re-filtering the previous level.  Keypoints come either
from strict extrema of the DoG stack (BoTSW) or from a regular grid over
time and scale (D-BoTSW).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScaleSpaceParams",
    "ScaleSpace",
    "Keypoint",
    "gaussian_kernel",
    "smooth",
    "build_scale_space",
    "dog",
    "detect_extrema",
    "dense_keypoints",
]


@dataclass(frozen=True)
class ScaleSpaceParams:
    sigma0: float = 1.6
    k_sc: float = 2.0 ** (1.0 / 3.0)
    n_scales: int = 9
    tau_step: int = 10

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not self.k_sc > 1:
            raise ValueError("k_sc must exceed 1")
        if int(self.n_scales) != self.n_scales or self.n_scales < 1:
            raise ValueError("n_scales must be a positive integer")
        if int(self.tau_step) != self.tau_step or self.tau_step < 1:
            raise ValueError("tau_step must be a positive integer")

    def sigma(self, j: int) -> float:
        return self.k_sc ** j * self.sigma0

    def levels_for(self, length: int) -> int:
        """Number of levels kept for a series of ``length`` samples.

        Levels whose width exceeds ``length / 3`` are dropped, but at least
        one level is always kept.
        """
        n = 1
        while n < self.n_scales and self.sigma(n) <= length / 3.0:
            n += 1
        return n


@dataclass(frozen=True)
class ScaleSpace:
    levels: np.ndarray  # (n_levels, N)
    params: ScaleSpaceParams

    @property
    def length(self) -> int:
        return self.levels.shape[-1]

    @property
    def n_levels(self) -> int:
        return self.levels.shape[0]


@dataclass(frozen=True, order=True)
class Keypoint:
    t: int
    j: int


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled Gaussian on ``-R..R`` with ``R = ceil(4 sigma)``, summing to 1."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    radius = int(math.ceil(4.0 * sigma))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(t * t) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def smooth(s, sigma: float) -> np.ndarray:
    """Gaussian filtering with edge-replicating boundaries.

    Works along the last axis, so a ``(n_series, N)`` batch is filtered
    row by row.  The sum is accumulated as ``s[t] + sum_i k[i] * (s[t+i] - s[t])``,
    which equals the plain convolution since the kernel sums to one, and
    keeps constant inputs bit-exact.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.shape[-1] < 2:
        raise ValueError("series must have at least 2 samples")
    kernel = gaussian_kernel(sigma)
    radius = kernel.size // 2
    n = s.shape[-1]
    pad = [(0, 0)] * (s.ndim - 1) + [(radius, radius)]
    padded = np.pad(s, pad, mode="edge")
    out = s.copy()
    for i, w in enumerate(kernel):
        if i != radius:
            out += w * (padded[..., i:i + n] - s)
    return out


def build_scale_space(s, p: ScaleSpaceParams | None = None) -> ScaleSpace:
    """Scale space of one series; ``levels[j] == smooth(s, p.sigma(j))``."""
    p = p or ScaleSpaceParams()
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError("expected a single series")
    n = p.levels_for(s.size)
    levels = np.stack([smooth(s, p.sigma(j)) for j in range(n)])
    return ScaleSpace(levels, p)


def build_scale_spaces(X, p: ScaleSpaceParams | None = None) -> np.ndarray:
    """Scale spaces of a batch ``(n_series, N)`` -> ``(n_series, n_levels, N)``."""
    p = p or ScaleSpaceParams()
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = p.levels_for(X.shape[1])
    return np.stack([smooth(X, p.sigma(j)) for j in range(n)], axis=1)


def dog(ss: ScaleSpace) -> np.ndarray:
    """``D[j] = levels[j + 1] - levels[j]``."""
    if ss.n_levels < 2:
        raise ValueError("need at least 2 scale levels for a DoG")
    return ss.levels[1:] - ss.levels[:-1]


def detect_extrema(ss: ScaleSpace) -> list[Keypoint]:
    """Strict 8-neighbour extrema of the DoG stack, sorted by ``(t, j)``.

    Boundary samples and the first/last DoG levels are never reported.  A
    keypoint found at DoG level ``j`` is described on Gaussian level ``j``.
    """
    D = dog(ss)
    if D.shape[0] < 3:
        raise ValueError("extrema detection needs at least 4 scale levels")
    n_dog, N = D.shape
    if N < 3:
        return []
    center = D[1:-1, 1:-1]
    greater = np.ones(center.shape, dtype=bool)
    smaller = np.ones(center.shape, dtype=bool)
    for dj in (-1, 0, 1):
        for dt in (-1, 0, 1):
            if dj == 0 and dt == 0:
                continue
            nb = D[1 + dj:n_dog - 1 + dj, 1 + dt:N - 1 + dt]
            greater &= center > nb
            smaller &= center < nb
    jj, tt = np.nonzero(greater | smaller)
    return sorted(Keypoint(int(t) + 1, int(j) + 1) for j, t in zip(jj, tt))


def dense_positions(length: int, tau_step: int) -> np.ndarray:
    return np.arange(0, length, tau_step)


def dense_keypoints(length: int, p: ScaleSpaceParams | None = None) -> list[Keypoint]:
    """Keypoints every ``tau_step`` samples on every kept level, sorted by ``(j, t)``."""
    p = p or ScaleSpaceParams()
    if length < 2:
        raise ValueError("series must have at least 2 samples")
    positions = dense_positions(length, p.tau_step)
    return [Keypoint(int(t), j) for j in range(p.levels_for(length)) for t in positions]
