"""k-means codebooks over descriptors and nearest-word assignment."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Codebook",
    "kmeans_fit",
    "kmeans_plusplus",
    "assign",
    "assign_many",
    "save_codebook",
    "load_codebook",
    "CODEBOOK_FORMAT_VERSION",
]

CODEBOOK_FORMAT_VERSION = 1

MAX_ITER = 100
REL_TOL = 1e-4


@dataclass(frozen=True)
class Codebook:
    centroids: np.ndarray  # (k, dim)
    requested_k: int | None = None
    n_iter: int = 0
    inertia: float = float("nan")
    inertia_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        c = np.array(self.centroids, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError("codebook needs at least one centroid")
        if not np.all(np.isfinite(c)):
            raise ValueError("centroids must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "centroids", c)
        if self.requested_k is None:
            object.__setattr__(self, "requested_k", c.shape[0])

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def _sq_norms(X: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", X, X)


def _nearest(X, C, c_norms=None, chunk: int = 4096):
    """Index of and squared distance to the nearest row of ``C`` for each row of ``X``.

    Distances come from the expanded form; rows whose best candidates are
    within rounding of each other are re-resolved with exact differences so
    that ties go to the lowest index.
    """
    if c_norms is None:
        c_norms = _sq_norms(C)
    n = X.shape[0]
    labels = np.empty(n, dtype=np.intp)
    dists = np.empty(n)
    for start in range(0, n, chunk):
        Xc = X[start:start + chunk]
        d = c_norms[None, :] - 2.0 * (Xc @ C.T)
        d += _sq_norms(Xc)[:, None]
        best = d.min(axis=1)
        slack = 1e-9 * (np.abs(best) + _sq_norms(Xc) + c_norms.max()) + 1e-300
        close = d <= (best + slack)[:, None]
        lab = np.argmax(close, axis=1)
        ambiguous = np.nonzero(close.sum(axis=1) > 1)[0]
        for r in ambiguous:
            cand = np.nonzero(close[r])[0]
            diff = C[cand] - Xc[r]
            exact = np.einsum("ij,ij->i", diff, diff)
            lab[r] = cand[np.argmin(exact)]
        diff = Xc - C[lab]
        labels[start:start + chunk] = lab
        dists[start:start + chunk] = np.einsum("ij,ij->i", diff, diff)
    return labels, dists


def assign_many(cb: Codebook, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != cb.dim:
        raise ValueError(f"descriptor dimension {X.shape[-1]} does not match codebook {cb.dim}")
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.intp)
    return _nearest(X, cb.centroids)[0]


def assign(cb: Codebook, d) -> int:
    """Index of the closest centroid; ties go to the lowest index."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 1:
        raise ValueError("expected a single descriptor")
    return int(assign_many(cb, d[None, :])[0])


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: indices of ``k`` distinct initial centres."""
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_norms(X - X[chosen[0]])
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # remaining points coincide with chosen centres
            rest = np.setdiff1d(np.arange(n), chosen)
            chosen.append(int(rest[rng.integers(rest.size)]))
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r, side="right"))
            idx = min(idx, n - 1)
            while closest[idx] <= 0:  # guard against landing on a zero-mass point
                idx = (idx + 1) % n
            chosen.append(idx)
        closest = np.minimum(closest, _sq_norms(X - X[chosen[-1]]))
    return np.array(chosen)


def _fill_empty(X, C, labels, dists, k):
    """Move empty centroids onto the points farthest from their centroids."""
    counts = np.bincount(labels, minlength=k)
    empty = np.nonzero(counts == 0)[0]
    if empty.size == 0:
        return labels, dists
    labels = labels.copy()
    dists = dists.copy()
    for e in empty:
        counts = np.bincount(labels, minlength=k)
        # never strip a cluster of its last member
        movable = counts[labels] > 1
        far = int(np.argmax(np.where(movable, dists, -1.0)))
        C[e] = X[far]
        labels[far] = e
        dists[far] = 0.0
    return labels, dists


def kmeans_fit(descriptors, k: int, seed: int = 0, max_iter: int = MAX_ITER,
               tol: float = REL_TOL) -> Codebook:
    """Lloyd's k-means with k-means++ seeding.

    Stops when assignments no longer change, after ``max_iter`` rounds, or
    when inertia improves by less than ``tol`` relative.  If fewer than
    ``k`` distinct descriptors exist the distinct descriptors themselves are
    returned (``cb.k < cb.requested_k``).  The result depends only on the
    descriptors, their order, ``k`` and ``seed``.
    """
    X = np.ascontiguousarray(descriptors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a non-empty 2-D array of descriptors")
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    k = int(k)

    distinct = np.unique(X, axis=0)
    if distinct.shape[0] <= k:
        return Codebook(distinct, requested_k=k, n_iter=0, inertia=0.0,
                        inertia_history=(0.0,))

    rng = np.random.default_rng(seed)
    C = X[kmeans_plusplus(X, k, rng)].copy()
    labels = None
    history: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_labels, dists = _nearest(X, C)
        new_labels, dists = _fill_empty(X, C, new_labels, dists, k)
        inertia = float(dists.sum())
        if history:
            prev = history[-1]
            assert inertia <= prev * (1 + 1e-12) + 1e-300, "k-means inertia increased"
        history.append(inertia)
        if labels is not None and np.array_equal(labels, new_labels):
            labels = new_labels
            break
        labels = new_labels
        if len(history) > 1 and history[-2] - inertia <= tol * history[-2]:
            break
        if n_iter == max_iter:
            break
        C = _means(X, labels, k)

    return Codebook(C, requested_k=k, n_iter=n_iter, inertia=history[-1],
                    inertia_history=tuple(history))


def _means(X, labels, k):
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.stack([np.bincount(labels, weights=col, minlength=k) for col in X.T], axis=1)
    return sums / counts[:, None]


def save_codebook(cb: Codebook, path) -> None:
    header = {"format": "dbotsw-codebook", "version": CODEBOOK_FORMAT_VERSION,
              "k": cb.k, "dim": cb.dim, "requested_k": cb.requested_k}
    np.savez(path, header=np.array(json.dumps(header)), centroids=cb.centroids)


def load_codebook(path) -> Codebook:
    with np.load(path) as data:
        header = json.loads(str(data["header"]))
        centroids = data["centroids"]
    if header.get("format") != "dbotsw-codebook" or header.get("version") != CODEBOOK_FORMAT_VERSION:
        raise ValueError(f"unsupported codebook record: {header}")
    if centroids.shape != (header["k"], header["dim"]):
        raise ValueError("codebook header does not match centroid array")
    return Codebook(centroids, requested_k=header["requested_k"])

