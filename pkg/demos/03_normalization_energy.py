"""Why signed square root helps.

Raw word counts are dominated by a few frequent words.  l2 keeps that
imbalance; SSR compresses it, spreading energy across dimensions.  We
measure the spread as the standard deviation of per-dimension energies.
"""
from __future__ import annotations

import numpy as np

from dbotsw import load_ucr
from dbotsw.bow import document_frequency, extract_descriptors, normalize, owner_histograms
from dbotsw.codebook import assign_many, kmeans_fit
from dbotsw.descriptor import DescriptorParams
from dbotsw.scalespace import ScaleSpaceParams

train = load_ucr("GunPoint", "train")
D, owner = extract_descriptors(train.X, ScaleSpaceParams(), DescriptorParams(4, 8))
cb = kmeans_fit(D, 256, seed=0)
H = owner_histograms(assign_many(cb, D), owner, len(train), cb.k)
df = document_frequency(H)

#%% Energy per dimension
for scheme in ("l2", "ssr", "idf"):
    F = normalize(H, scheme, df if scheme == "idf" else None)
    energy = (F ** 2).mean(axis=0)
    print(f"{scheme:>4}: largest component {F.max():.3f}, energy std {energy.std():.5f}, "
          f"energy in top 10 words {np.sort(energy)[::-1][:10].sum():.3f}")

#%% The textbook example
print("l2 of [100, 1, 1]: ", np.round(normalize(np.array([100.0, 1, 1]), "l2"), 4))
print("ssr of [100, 1, 1]:", np.round(normalize(np.array([100.0, 1, 1]), "ssr"), 4))
