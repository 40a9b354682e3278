"""From keypoints to words.

Each keypoint is described by Gaussian-weighted sums of positive and
negative gradients over n_b blocks of a samples.  A k-means codebook then
maps each descriptor to its nearest centroid, the "word".
"""
from __future__ import annotations

import numpy as np

from dbotsw import load_ucr
from dbotsw.bow import extract_descriptors, histogram
from dbotsw.codebook import assign_many, kmeans_fit
from dbotsw.descriptor import DescriptorParams, describe_keypoint
from dbotsw.scalespace import Keypoint, ScaleSpaceParams, build_scale_space

train = load_ucr("GunPoint", "train")
sp, dp = ScaleSpaceParams(), DescriptorParams(a=4, n_b=8)

#%% One descriptor, read as [pos0, neg0, pos1, neg1, ...]
ss = build_scale_space(train.X[0], sp)
d = describe_keypoint(ss, Keypoint(t=70, j=2), dp)
print("descriptor at t=70, scale 2:")
for b in range(dp.n_b):
    print(f"  block {b}: +{d[2 * b]:.4f}  {d[2 * b + 1]:+.4f}")

#%% All training descriptors at once
D, owner = extract_descriptors(train.X, sp, dp)
print(f"{D.shape[0]} descriptors of dimension {D.shape[1]} from {len(train)} series")

#%% A 64-word codebook
cb = kmeans_fit(D, 64, seed=0)
print(f"k-means: {cb.n_iter} iterations, inertia {cb.inertia_history[0]:.3f} -> {cb.inertia:.3f}")

words = assign_many(cb, D)
usage = np.bincount(words, minlength=cb.k)
print("most used words:", np.argsort(usage)[::-1][:5], "least used count:", usage.min())

#%% Word histograms differ by class
for label in train.classes:
    rows = np.nonzero(train.y == label)[0]
    h = sum(histogram(words[owner == r], cb.k).values for r in rows) / rows.size
    print(f"class {label}: mean top words {np.argsort(h)[::-1][:5]}")
