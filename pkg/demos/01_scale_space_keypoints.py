"""Scale space and keypoints of one GunPoint series.

A series is filtered at nine Gaussian widths; differences of consecutive
levels form the DoG stack whose strict extrema are the sparse keypoints.
The dense variant simply samples every tenth time step on every level.
"""
from __future__ import annotations

import numpy as np

from dbotsw import load_ucr
from dbotsw.scalespace import (
    ScaleSpaceParams,
    build_scale_space,
    dense_keypoints,
    detect_extrema,
    dog,
    gaussian_kernel,
)

train = load_ucr("GunPoint", "train")
s = train.X[0]
params = ScaleSpaceParams()
print(f"series 0 of {train.name}: label {train.y[0]}, {s.size} samples")

#%% The filter bank
for j in range(params.n_scales):
    sigma = params.sigma(j)
    print(f"level {j}: sigma = {sigma:5.2f}, kernel taps = {gaussian_kernel(sigma).size}")

#%% Smoothing removes variance level after level
ss = build_scale_space(s, params)
print("std per level:", np.round(ss.levels.std(axis=1), 4))

#%% Extrema of the DoG stack
D = dog(ss)
kps = detect_extrema(ss)
print(f"{len(kps)} scale-space extrema; first few (t, j):", [(k.t, k.j) for k in kps[:8]])
strongest = max(kps, key=lambda k: abs(D[k.j, k.t]))
print(f"strongest response at t={strongest.t}, scale {strongest.j}: {D[strongest.j, strongest.t]:+.4f}")

#%% Dense sampling gives a fixed count per series
dense = dense_keypoints(s.size, params)
print(f"dense keypoints: {len(dense)} = {(s.size - 1) // params.tau_step + 1} positions x {ss.n_levels} scales")
