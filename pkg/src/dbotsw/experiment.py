"""Grid search, cross-validation, ensemble voting and benchmark reports.

Protocol: every ``(a, n_b, k, C)`` of the grid is scored by cross-validation
on the training split (leave-one-out below 300 training series, stratified
10-fold otherwise).  All parameter sets tied at the best CV accuracy are
refit on the full training split and vote on the test split; vote ties go
to the lowest label.

A single master seed fixes everything.  Stage seeds are derived from it
and from the grid coordinates they serve, so results do not depend on the
worker count or on evaluation order.
"""
from __future__ import annotations

import csv
import itertools
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bow import (
    DocumentFrequency,
    NormScheme,
    document_frequency,
    extract_descriptors,
    normalize,
    owner_histograms,
)
from .classifier import LinearModel, SvmParams, ednn_classify, svm_train
from .codebook import Codebook, assign_many, kmeans_fit
from .descriptor import DescriptorParams
from .scalespace import ScaleSpaceParams
from .ucr import Dataset, parse_ucr_file

__all__ = [
    "ParamSet",
    "ParamGrid",
    "Folds",
    "SetScore",
    "CvResult",
    "Pipeline",
    "EvalReport",
    "BenchmarkConfig",
    "derive_seed",
    "make_folds",
    "grid_search",
    "fit_pipeline",
    "fit_final",
    "predict_vote",
    "majority_vote",
    "run_benchmark",
]

log = logging.getLogger(__name__)

LOO_LIMIT = 300
N_FOLDS = 10

_STAGE_FOLDS = 0
_STAGE_KMEANS = 1
_STAGE_SVM = 2


def derive_seed(master: int, *keys: int) -> int:
    """Stage seed from the master seed and integer coordinates."""
    ss = np.random.SeedSequence([int(master) & 0xFFFFFFFF, *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True, order=True)
class ParamSet:
    a: int
    n_b: int
    k: int
    C: float

    def label(self) -> str:
        return f"a={self.a} n_b={self.n_b} k={self.k} C={self.C:g}"


@dataclass(frozen=True)
class ParamGrid:
    a_values: tuple[int, ...] = (4, 8)
    nb_values: tuple[int, ...] = (4, 8, 12, 16, 20)
    k_values: tuple[int, ...] = tuple(2 ** i for i in range(5, 11))
    C_values: tuple[float, ...] = (1.0, 10.0, 100.0)
    scale: ScaleSpaceParams = ScaleSpaceParams()

    def __post_init__(self):
        for name in ("a_values", "nb_values", "k_values", "C_values"):
            values = tuple(sorted(getattr(self, name)))
            if not values:
                raise ValueError(f"{name} must not be empty")
            if len(set(values)) != len(values):
                raise ValueError(f"{name} contains duplicates")
            object.__setattr__(self, name, values)

    def __iter__(self):
        for a, nb, k, C in itertools.product(self.a_values, self.nb_values,
                                             self.k_values, self.C_values):
            yield ParamSet(a, nb, k, float(C))

    def __len__(self) -> int:
        return (len(self.a_values) * len(self.nb_values)
                * len(self.k_values) * len(self.C_values))

    def blocks(self):
        return list(itertools.product(self.a_values, self.nb_values))


@dataclass(frozen=True)
class Folds:
    """Fold id per training series."""

    fold_of: np.ndarray
    n_folds: int
    method: str  # "loo" or "stratified-10"
    fallback_classes: tuple[int, ...] = ()

    def splits(self):
        for f in range(self.n_folds):
            test = self.fold_of == f
            yield f, np.nonzero(~test)[0], np.nonzero(test)[0]


def make_folds(n_train: int, labels, seed: int) -> Folds:
    """Leave-one-out below 300 series, stratified shuffled 10-fold otherwise.

    Classes with fewer than 10 members are spread over random distinct folds
    instead of being stratified; they are listed in ``fallback_classes``.
    """
    labels = np.asarray(labels)
    if n_train < 2 or labels.shape != (n_train,):
        raise ValueError("need at least 2 labeled training series")
    if n_train < LOO_LIMIT:
        return Folds(np.arange(n_train), n_train, "loo")

    rng = np.random.default_rng(seed)
    fold_of = np.empty(n_train, dtype=np.intp)
    offset = 0
    fallback = []
    for c in np.unique(labels):
        idx = rng.permutation(np.nonzero(labels == c)[0])
        if idx.size < N_FOLDS:
            fallback.append(int(c))
            fold_of[idx] = rng.choice(N_FOLDS, size=idx.size, replace=False)
        else:
            fold_of[idx] = (offset + np.arange(idx.size)) % N_FOLDS
            offset = (offset + idx.size) % N_FOLDS
    return Folds(fold_of, N_FOLDS, f"stratified-{N_FOLDS}", tuple(fallback))


@dataclass(frozen=True)
class SetScore:
    params: ParamSet
    accuracy: Fraction
    n_folds: int
    effective_k: int
    fold_correct: tuple[int, ...] = field(default=(), repr=False)


@dataclass
class CvResult:
    scores: list[SetScore]
    best: list[ParamSet]
    folds: Folds
    scheme: NormScheme
    seed: int
    extraction: str = "dense"
    scale: ScaleSpaceParams = ScaleSpaceParams()
    timings: dict = field(default_factory=dict)
    codebooks: dict = field(default_factory=dict, repr=False)

    @property
    def best_accuracy(self) -> Fraction:
        return max(s.accuracy for s in self.scores)


def _fold_scores(H, y, folds: Folds, scheme: NormScheme, C: float, svm_seed: int,
                 F_all=None):
    """Correct predictions per fold for one parameter set."""
    correct = []
    for _, tr, te in folds.splits():
        if scheme is NormScheme.IDF_L2:
            df = document_frequency(H[tr])
            F = normalize(H, scheme, df)
        else:
            F = F_all
        y_tr = y[tr]
        if np.unique(y_tr).size < 2:
            pred = np.full(te.size, y_tr[0])
        else:
            model = svm_train(F[tr], y_tr, SvmParams(C, svm_seed))
            pred = model.predict(F[te])
        correct.append(int(np.sum(pred == y[te])))
    return correct


def _cv_accuracy(correct, folds: Folds) -> Fraction:
    sizes = np.bincount(folds.fold_of, minlength=folds.n_folds)
    return sum((Fraction(c, int(s)) for c, s in zip(correct, sizes)), Fraction(0)) / folds.n_folds


def _evaluate_block(X, y, a, nb, grid: ParamGrid, scheme: NormScheme, seed: int,
                    folds: Folds, extraction: str):
    t0 = time.perf_counter()
    dp = DescriptorParams(a, nb)
    D, owner = extract_descriptors(X, grid.scale, dp, extraction)
    t_desc = time.perf_counter() - t0
    t_km = t_svm = 0.0
    scores, codebooks = [], {}
    for k in grid.k_values:
        t0 = time.perf_counter()
        cb = _fit_codebook(D, k, seed, a, nb)
        codebooks[(a, nb, k)] = cb
        H = owner_histograms(assign_many(cb, D), owner, X.shape[0], cb.k)
        t_km += time.perf_counter() - t0
        t0 = time.perf_counter()
        F_all = None if scheme is NormScheme.IDF_L2 else normalize(H, scheme)
        for C in grid.C_values:
            p = ParamSet(a, nb, k, float(C))
            correct = _fold_scores(H, y, folds, scheme, float(C),
                                   derive_seed(seed, _STAGE_SVM, a, nb, k, int(C * 1000)), F_all)
            scores.append(SetScore(p, _cv_accuracy(correct, folds), folds.n_folds,
                                   cb.k, tuple(correct)))
        t_svm += time.perf_counter() - t0
    return scores, codebooks, {"descriptors": t_desc, "kmeans": t_km, "svm_cv": t_svm}


def _fit_codebook(D, k, seed, a, nb) -> Codebook:
    if D.shape[0] == 0:
        raise ValueError("no descriptors extracted from the training set")
    return kmeans_fit(D, k, seed=derive_seed(seed, _STAGE_KMEANS, a, nb, k))


def grid_search(train: Dataset, grid: ParamGrid | None = None, scheme="ssr", seed: int = 0,
                workers: int = 1, extraction: str = "dense") -> CvResult:
    """Cross-validated score of every parameter set, in lexicographic order.

    Descriptors are computed once per ``(a, n_b)`` and the codebook once per
    ``(a, n_b, k)`` on all training descriptors; only the SVM, and the
    document frequencies for IDF, are refit inside each fold.
    """
    grid = grid or ParamGrid()
    scheme = NormScheme.parse(scheme)
    folds = make_folds(len(train), train.y, derive_seed(seed, _STAGE_FOLDS))
    X, y = np.asarray(train.X), np.asarray(train.y)
    blocks = grid.blocks()
    args = [(X, y, a, nb, grid, scheme, seed, folds, extraction) for a, nb in blocks]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_block_star, args))
    else:
        results = [_evaluate_block(*arg) for arg in args]

    scores, codebooks = [], {}
    timings = {"descriptors": 0.0, "kmeans": 0.0, "svm_cv": 0.0}
    for block_scores, block_cbs, block_t in results:
        scores.extend(block_scores)
        codebooks.update(block_cbs)
        for key, value in block_t.items():
            timings[key] += value
    scores.sort(key=lambda s: s.params)
    top = max(s.accuracy for s in scores)
    best = [s.params for s in scores if s.accuracy == top]
    log.info("grid search on %s: %d sets, best CV accuracy %.4f shared by %d",
             train.name, len(scores), float(top), len(best))
    return CvResult(scores, best, folds, scheme, seed, extraction, grid.scale, timings, codebooks)


def _evaluate_block_star(arg):
    return _evaluate_block(*arg)


@dataclass
class Pipeline:
    params: ParamSet
    scale: ScaleSpaceParams
    scheme: NormScheme
    codebook: Codebook
    model: LinearModel
    df: DocumentFrequency | None = None
    extraction: str = "dense"

    @property
    def descriptor_params(self) -> DescriptorParams:
        return DescriptorParams(self.params.a, self.params.n_b)

    def transform(self, X, descriptors=None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if descriptors is None:
            descriptors = extract_descriptors(X, self.scale, self.descriptor_params,
                                              self.extraction)
        D, owner = descriptors
        H = owner_histograms(assign_many(self.codebook, D), owner, X.shape[0], self.codebook.k)
        return normalize(H, self.scheme, self.df)

    def predict(self, X, descriptors=None) -> np.ndarray:
        return self.model.predict(self.transform(X, descriptors))


def fit_pipeline(train: Dataset, params: ParamSet, scheme="ssr", seed: int = 0,
                 scale: ScaleSpaceParams | None = None, extraction: str = "dense",
                 descriptors=None, codebook: Codebook | None = None) -> Pipeline:
    """Codebook, document frequencies and SVM for one parameter set on the full split."""
    scheme = NormScheme.parse(scheme)
    scale = scale or ScaleSpaceParams()
    a, nb, k, C = params.a, params.n_b, params.k, params.C
    if descriptors is None:
        descriptors = extract_descriptors(train.X, scale, DescriptorParams(a, nb), extraction)
    D, owner = descriptors
    cb = codebook if codebook is not None else _fit_codebook(D, k, seed, a, nb)
    H = owner_histograms(assign_many(cb, D), owner, len(train), cb.k)
    df = document_frequency(H) if scheme is NormScheme.IDF_L2 else None
    F = normalize(H, scheme, df)
    model = svm_train(F, train.y, SvmParams(C, derive_seed(seed, _STAGE_SVM, a, nb, k,
                                                           int(C * 1000))))
    return Pipeline(params, scale, scheme, cb, model, df, extraction)


def fit_final(train: Dataset, best_sets, scheme="ssr", seed: int = 0,
              scale: ScaleSpaceParams | None = None, extraction: str = "dense",
              codebooks: dict | None = None) -> list[Pipeline]:
    """One pipeline per best parameter set, fitted on the whole training split.

    ``codebooks`` may carry the codebooks of a previous :func:`grid_search`
    with the same seed; they are identical to the ones refitting would give.
    """
    best_sets = sorted(best_sets)
    if not best_sets:
        raise ValueError("need at least one parameter set")
    scale = scale or ScaleSpaceParams()
    codebooks = dict(codebooks or {})
    desc_cache = {}
    ensemble = []
    for p in best_sets:
        key = (p.a, p.n_b)
        if key not in desc_cache:
            desc_cache[key] = extract_descriptors(train.X, scale, DescriptorParams(p.a, p.n_b),
                                                  extraction)
        cb_key = (p.a, p.n_b, p.k)
        if cb_key not in codebooks:
            codebooks[cb_key] = _fit_codebook(desc_cache[key][0], p.k, seed, p.a, p.n_b)
        ensemble.append(fit_pipeline(train, p, scheme, seed, scale, extraction,
                                     desc_cache[key], codebooks[cb_key]))
    return ensemble


def majority_vote(votes, classes=None) -> np.ndarray:
    """Modal label per column of ``votes`` (n_voters, n_items); ties -> lowest label."""
    votes = np.atleast_2d(np.asarray(votes))
    classes = np.unique(votes) if classes is None else np.asarray(sorted(classes))
    counts = np.stack([(votes == c).sum(axis=0) for c in classes])
    return classes[np.argmax(counts, axis=0)]


@dataclass
class EvalReport:
    dataset: str
    error_rate: float
    n_test: int
    classes: list
    confusion: list  # confusion[i][j]: true classes[i] predicted classes[j]
    chosen_sets: list
    scheme: str
    seed: int
    timings: dict
    predictions: list
    true_labels: list
    pipeline_predictions: list = field(default_factory=list)
    cv_best_accuracy: float | None = None
    n_evaluated_sets: int | None = None
    fold_method: str | None = None
    fold_fallback_classes: list = field(default_factory=list)
    effective_k: dict = field(default_factory=dict)
    extraction: str = "dense"
    ednn_error_rate: float | None = None
    format_version: int = 1

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> EvalReport:
        return cls(**json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> EvalReport:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def write_predictions_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["series_id", "true_label", "predicted_label"])
            for i, (t, p) in enumerate(zip(self.true_labels, self.predictions)):
                writer.writerow([i, t, p])


def confusion_matrix(true, pred, classes) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    out = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true, pred):
        out[index[int(t)], index[int(p)]] += 1
    return out


def predict_vote(ensemble, test: Dataset, dataset_name: str | None = None, seed: int = 0):
    """Majority vote of the ensemble on ``test``; returns ``(labels, EvalReport)``."""
    if not ensemble:
        raise ValueError("ensemble is empty")
    t0 = time.perf_counter()
    desc_cache = {}
    votes = []
    for pipe in ensemble:
        key = (pipe.params.a, pipe.params.n_b, pipe.extraction, pipe.scale)
        if key not in desc_cache:
            desc_cache[key] = extract_descriptors(test.X, pipe.scale, pipe.descriptor_params,
                                                  pipe.extraction)
        votes.append(pipe.predict(test.X, desc_cache[key]))
    votes = np.asarray(votes)
    classes = sorted(set(int(c) for p in ensemble for c in p.model.classes) | set(test.classes))
    labels = majority_vote(votes, classes)
    conf = confusion_matrix(test.y, labels, classes)
    report = EvalReport(
        dataset=dataset_name or test.name,
        error_rate=float(len(test) - np.trace(conf)) / len(test),
        n_test=len(test),
        classes=classes,
        confusion=conf.tolist(),
        chosen_sets=[asdict(p.params) for p in ensemble],
        scheme=ensemble[0].scheme.value,
        seed=seed,
        timings={"predict": time.perf_counter() - t0},
        predictions=[int(v) for v in labels],
        true_labels=[int(v) for v in test.y],
        pipeline_predictions=votes.astype(int).tolist(),
        effective_k={p.params.label(): p.codebook.k for p in ensemble},
        extraction=ensemble[0].extraction,
    )
    return labels, report


@dataclass
class BenchmarkConfig:
    grid: ParamGrid = field(default_factory=ParamGrid)
    scheme: str = "ssr"
    seed: int = 0
    workers: int = 1
    extraction: str = "dense"
    run_ednn: bool = False
    out: str | None = None
    predictions_csv: str | None = None


def run_benchmark(train_path, test_path, config: BenchmarkConfig | None = None) -> EvalReport:
    """Parse, grid-search, refit the best sets, vote on the test split, report."""
    config = config or BenchmarkConfig()
    try:
        train = parse_ucr_file(train_path)
        test = parse_ucr_file(test_path, name=train.name)
    except (OSError, ValueError) as exc:
        raise type(exc)(f"loading {train_path} / {test_path}: {exc}") from exc
    return evaluate_dataset(train, test, config)


def evaluate_dataset(train: Dataset, test: Dataset, config: BenchmarkConfig | None = None
                     ) -> EvalReport:
    config = config or BenchmarkConfig()
    if train.length != test.length:
        raise ValueError(f"{train.name}: train length {train.length} != test length {test.length}")
    t0 = time.perf_counter()
    cv = grid_search(train, config.grid, config.scheme, config.seed, config.workers,
                     config.extraction)
    t_cv = time.perf_counter() - t0
    t0 = time.perf_counter()
    ensemble = fit_final(train, cv.best, cv.scheme, config.seed, config.grid.scale,
                         config.extraction, cv.codebooks)
    t_fit = time.perf_counter() - t0
    _, report = predict_vote(ensemble, test, train.name, config.seed)
    report.timings = {**cv.timings, "grid_search": t_cv, "fit_final": t_fit,
                      "predict": report.timings["predict"]}
    report.cv_best_accuracy = float(cv.best_accuracy)
    report.n_evaluated_sets = len(cv.scores)
    report.fold_method = cv.folds.method
    report.fold_fallback_classes = list(cv.folds.fallback_classes)
    if config.run_ednn:
        t0 = time.perf_counter()
        report.ednn_error_rate = ednn_classify(train, test)[1]
        report.timings["ednn"] = time.perf_counter() - t0
    if config.out:
        report.save(config.out)
    if config.predictions_csv:
        report.write_predictions_csv(config.predictions_csv)
    return report
