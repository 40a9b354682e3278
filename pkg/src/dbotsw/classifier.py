"""Linear one-vs-rest SVM over BoW vectors, and the 1NN-Euclidean baseline.

Each binary problem minimises ``0.5*||w||^2 + C * sum(max(0, 1 - y_i (w.x_i + b)))``
with an unregularised bias.  It is solved in the dual by SMO with
second-order working-set selection on the linear Gram matrix, which is
cheap for the few hundred training series of a UCR split whatever the
codebook size.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numba
import numpy as np

__all__ = [
    "SvmParams",
    "LinearModel",
    "svm_train",
    "svm_predict",
    "svm_objective",
    "smo_solve",
    "ednn_classify",
    "save_model",
    "load_model",
    "MODEL_FORMAT_VERSION",
]

MODEL_FORMAT_VERSION = 1
KKT_TOL = 1e-4
_TAU = 1e-12


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")


@dataclass(frozen=True)
class LinearModel:
    classes: tuple[int, ...]
    weights: np.ndarray  # (n_classes, k)
    biases: np.ndarray  # (n_classes,)
    params: SvmParams = SvmParams()

    @property
    def k(self) -> int:
        return self.weights.shape[1]

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(_as_matrix(X))
        if X.shape[1] != self.k:
            raise ValueError(f"input dimension {X.shape[1]} does not match model {self.k}")
        return X @ self.weights.T + self.biases

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        # argmax returns the first maximum, i.e. the lowest label
        return np.asarray(self.classes)[np.argmax(scores, axis=1)]


@numba.njit(cache=True)
def _smo(K, y, C, eps, max_iter):
    n = y.size
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    while it < max_iter:
        # first index: maximal violation among the "up" set
        gmax = -np.inf
        i = -1
        for t in range(n):
            if y[t] > 0:
                if alpha[t] < C and -G[t] > gmax:
                    gmax = -G[t]
                    i = t
            else:
                if alpha[t] > 0 and G[t] > gmax:
                    gmax = G[t]
                    i = t
        gmax2 = -np.inf
        j = -1
        obj_min = np.inf
        for t in range(n):
            if y[t] > 0:
                if alpha[t] > 0:
                    if G[t] > gmax2:
                        gmax2 = G[t]
                    grad_diff = gmax + G[t]
                    if i >= 0 and grad_diff > 0:
                        quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if quad <= 0:
                            quad = _TAU
                        obj = -(grad_diff * grad_diff) / quad
                        if obj < obj_min:
                            obj_min = obj
                            j = t
            else:
                if alpha[t] < C:
                    if -G[t] > gmax2:
                        gmax2 = -G[t]
                    grad_diff = gmax - G[t]
                    if i >= 0 and grad_diff > 0:
                        quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if quad <= 0:
                            quad = _TAU
                        obj = -(grad_diff * grad_diff) / quad
                        if obj < obj_min:
                            obj_min = obj
                            j = t
        if i < 0 or j < 0 or gmax + gmax2 < eps:
            break
        it += 1

        qij = y[i] * y[j] * K[i, j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] + 2.0 * qij
            if quad <= 0:
                quad = _TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * qij
            if quad <= 0:
                quad = _TAU
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        dai = alpha[i] - ai_old
        daj = alpha[j] - aj_old
        for t in range(n):
            G[t] += y[t] * (y[i] * K[i, t] * dai + y[j] * K[j, t] * daj)

    # bias from free vectors, or the middle of the feasible interval
    ub = np.inf
    lb = -np.inf
    n_free = 0
    s_free = 0.0
    for t in range(n):
        yg = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            n_free += 1
            s_free += yg
    if n_free > 0:
        rho = s_free / n_free
    else:
        rho = 0.5 * (ub + lb)
    return alpha, -rho, it


def smo_solve(K, y, C: float, eps: float = KKT_TOL, max_iter: int | None = None):
    """Dual solution ``(alpha, b, n_iter)`` of a binary SVM on Gram matrix ``K``.

    ``y`` holds +1/-1.  The decision function is ``sum(alpha*y*K[:, x]) + b``.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if max_iter is None:
        max_iter = max(10_000_000, 100 * y.size)
    return _smo(K, y, float(C), float(eps), int(max_iter))


def _as_matrix(X) -> np.ndarray:
    if isinstance(X, np.ndarray):
        return X.astype(np.float64, copy=False)
    rows = [getattr(x, "values", x) for x in X]
    return np.asarray(rows, dtype=np.float64)


def _binary(X, K, target, C):
    alpha, b, _ = smo_solve(K, target, C)
    w = X.T @ (alpha * target)
    return w, b


def svm_train(X, y, p: SvmParams | None = None) -> LinearModel:
    """One-vs-rest linear SVM.

    Training order is a seeded permutation of the input, so results are
    bit-identical for a fixed input order and seed.  With two classes a
    single binary problem is solved and the second class gets the mirrored
    hyperplane.
    """
    p = p or SvmParams()
    X = _as_matrix(X)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ValueError("expected a 2-D feature matrix")
    if X.shape[0] != y.shape[0] or X.shape[0] < 2:
        raise ValueError("need at least 2 samples with one label each")
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise ValueError("need at least 2 classes to train an SVM")

    order = np.random.default_rng(p.seed).permutation(X.shape[0])
    Xo = np.ascontiguousarray(X[order])
    yo = y[order]
    K = Xo @ Xo.T

    weights = np.empty((len(classes), X.shape[1]))
    biases = np.empty(len(classes))
    if len(classes) == 2:
        target = np.where(yo == classes[0], 1.0, -1.0)
        w, b = _binary(Xo, K, target, p.C)
        weights[0], biases[0] = w, b
        weights[1], biases[1] = -w, -b
    else:
        for c_idx, c in enumerate(classes):
            target = np.where(yo == c, 1.0, -1.0)
            weights[c_idx], biases[c_idx] = _binary(Xo, K, target, p.C)
    return LinearModel(classes, weights, biases, p)


def svm_predict(m: LinearModel, x) -> int:
    """Label with the largest score; ties go to the lowest label."""
    values = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("expected a single vector")
    return int(m.predict(values[None, :])[0])


def svm_objective(w, b, X, target, C) -> float:
    """Primal hinge-loss objective of one binary classifier."""
    X = _as_matrix(X)
    margins = np.asarray(target) * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def ednn_classify(train, test, chunk: int = 256):
    """1-nearest-neighbour under Euclidean distance.

    Returns ``(predicted_labels, error_rate)``.  Distance ties go to the
    lowest training index.
    """
    Xtr, Xte = train.X, test.X
    if Xtr.shape[1] != Xte.shape[1]:
        raise ValueError(f"series lengths differ: train {Xtr.shape[1]}, test {Xte.shape[1]}")
    nearest = np.empty(Xte.shape[0], dtype=np.intp)
    for start in range(0, Xte.shape[0], chunk):
        diff = Xte[start:start + chunk, None, :] - Xtr[None, :, :]
        nearest[start:start + chunk] = np.argmin(np.einsum("ijk,ijk->ij", diff, diff), axis=1)
    pred = train.y[nearest]
    return pred, float(np.mean(pred != test.y))


def save_model(m: LinearModel, path) -> None:
    record = {
        "format": "dbotsw-linear-svm",
        "version": MODEL_FORMAT_VERSION,
        "classes": list(m.classes),
        "k": m.k,
        "weights": m.weights.tolist(),
        "biases": m.biases.tolist(),
        "params": {"C": m.params.C, "seed": m.params.seed},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)


def model_from_record(record: dict) -> LinearModel:
    if record.get("format") != "dbotsw-linear-svm" or record.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError("unsupported model record")
    weights = np.asarray(record["weights"], dtype=np.float64)
    if weights.shape != (len(record["classes"]), record["k"]):
        raise ValueError("model weights do not match header")
    return LinearModel(tuple(record["classes"]), weights,
                       np.asarray(record["biases"], dtype=np.float64),
                       SvmParams(**record["params"]))


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_record(json.load(fh))
