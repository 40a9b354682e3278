from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from dbotsw.bow import document_frequency, extract_descriptors, normalize, owner_histograms
from dbotsw.classifier import SvmParams, svm_train
from dbotsw.codebook import assign_many, kmeans_fit
from dbotsw.descriptor import DescriptorParams
from dbotsw.experiment import (
    BenchmarkConfig,
    EvalReport,
    ParamGrid,
    ParamSet,
    derive_seed,
    evaluate_dataset,
    fit_final,
    fit_pipeline,
    grid_search,
    make_folds,
    majority_vote,
    predict_vote,
)
from dbotsw.io import load_pipeline, save_pipeline
from dbotsw.ucr import Dataset

SMALL = ParamGrid(a_values=(4, 8), nb_values=(4, 8), k_values=(8, 16), C_values=(1, 10))


# --- folds ------------------------------------------------------------------

def test_loo_below_300():
    f = make_folds(50, np.repeat([1, 2], 25), seed=0)
    assert (f.n_folds, f.method) == (50, "loo")
    assert f.fold_of.tolist() == list(range(50))
    assert make_folds(299, np.ones(299), 0).n_folds == 299


@pytest.mark.parametrize("n", [300, 390, 1000])
def test_ten_folds_from_300(n):
    rng = np.random.default_rng(n)
    labels = rng.integers(1, 13, n)
    f = make_folds(n, labels, seed=3)
    assert (f.n_folds, f.method) == (10, "stratified-10")
    for c in np.unique(labels):
        per_fold = np.bincount(f.fold_of[labels == c], minlength=10)
        if c in f.fallback_classes:
            assert per_fold.max() <= 1
        else:
            assert per_fold.max() - per_fold.min() <= 1
    sizes = np.bincount(f.fold_of, minlength=10)
    assert sizes.sum() == n and sizes.min() > 0


def test_fold_fallback_recorded():
    labels = np.array([1] * 295 + [2] * 5)
    f = make_folds(300, labels, seed=0)
    assert f.fallback_classes == (2,)
    assert np.unique(f.fold_of[labels == 2]).size == 5


def test_folds_seeded():
    labels = np.random.default_rng(0).integers(1, 4, 400)
    assert np.array_equal(make_folds(400, labels, 7).fold_of, make_folds(400, labels, 7).fold_of)
    assert not np.array_equal(make_folds(400, labels, 7).fold_of,
                              make_folds(400, labels, 8).fold_of)
    with pytest.raises(ValueError):
        make_folds(1, [1], 0)


# --- grid -------------------------------------------------------------------

def test_default_grid_180_lexicographic():
    sets = list(ParamGrid())
    assert len(sets) == len(ParamGrid()) == 180
    assert sets == sorted(sets)
    assert sets[0] == ParamSet(4, 4, 32, 1.0) and sets[-1] == ParamSet(8, 20, 1024, 100.0)
    assert {s.k for s in sets} == {32, 64, 128, 256, 512, 1024}


def test_derive_seed_stable():
    assert derive_seed(0, 1, 4, 8, 64) == derive_seed(0, 1, 4, 8, 64)
    assert derive_seed(0, 1, 4, 8, 64) != derive_seed(1, 1, 4, 8, 64)


# --- independent CV oracle --------------------------------------------------

def cv_oracle(train, p: ParamSet, scheme, seed, scale):
    """Plain re-run of the protocol for one parameter set."""
    D, owner = extract_descriptors(train.X, scale, DescriptorParams(p.a, p.n_b))
    cb = kmeans_fit(D, p.k, seed=derive_seed(seed, 1, p.a, p.n_b, p.k))
    H = owner_histograms(assign_many(cb, D), owner, len(train), cb.k)
    folds = make_folds(len(train), train.y, derive_seed(seed, 0))
    svm_seed = derive_seed(seed, 2, p.a, p.n_b, p.k, int(p.C * 1000))
    total = Fraction(0)
    for f in range(folds.n_folds):
        te = np.nonzero(folds.fold_of == f)[0]
        tr = np.nonzero(folds.fold_of != f)[0]
        df = document_frequency(H[tr]) if scheme == "idf" else None
        F = normalize(H, scheme, df)
        model = svm_train(F[tr], train.y[tr], SvmParams(p.C, svm_seed))
        total += Fraction(int(np.sum(model.predict(F[te]) == train.y[te])), te.size)
    return total / folds.n_folds


@pytest.mark.parametrize("scheme", ["ssr", "idf"])
def test_singleton_best_matches_oracle(gunpoint, scheme):
    train = gunpoint[0].subset(np.arange(20))
    cv = grid_search(train, SMALL, scheme, seed=0)
    assert len(cv.scores) == 16
    assert [s.params for s in cv.scores] == list(SMALL)
    oracle = {p: cv_oracle(train, p, scheme, 0, SMALL.scale) for p in SMALL}
    for s in cv.scores:
        assert s.accuracy == oracle[s.params]
    top = max(oracle.values())
    assert cv.best == [p for p in SMALL if oracle[p] == top]
    if scheme == "ssr":
        assert len(cv.best) == 1


def _easy_dataset(n=10, length=60):
    rng = np.random.default_rng(0)
    t = np.arange(length)
    X = np.vstack([np.zeros((n // 2, length)),
                   np.sin(t / 3.0)[None] * (2 + rng.random((n - n // 2, 1)))])
    return Dataset(X, [1] * (n // 2) + [2] * (n - n // 2), "easy")


def test_all_tied_sets_returned():
    cv = grid_search(_easy_dataset(), ParamGrid(), "ssr", seed=0)
    assert len(cv.scores) == 180
    assert all(s.accuracy == 1 for s in cv.scores)
    assert cv.best == list(ParamGrid())


def test_bit_reproducible_and_workers(gunpoint):
    train = gunpoint[0].subset(np.arange(0, 50, 2))
    a = grid_search(train, SMALL, "ssr", seed=5)
    b = grid_search(train, SMALL, "ssr", seed=5, workers=2)
    assert [(s.params, s.accuracy, s.fold_correct) for s in a.scores] == \
           [(s.params, s.accuracy, s.fold_correct) for s in b.scores]
    for key in a.codebooks:
        assert a.codebooks[key].centroids.tobytes() == b.codebooks[key].centroids.tobytes()


def test_fit_final_reuses_identical_codebooks(gunpoint):
    train = gunpoint[0].subset(np.arange(30))
    cv = grid_search(train, SMALL, "ssr", seed=1)
    fresh = fit_final(train, cv.best, "ssr", 1, SMALL.scale)
    reused = fit_final(train, cv.best, "ssr", 1, SMALL.scale, codebooks=cv.codebooks)
    for p, q in zip(fresh, reused):
        assert p.codebook.centroids.tobytes() == q.codebook.centroids.tobytes()
        assert p.model.weights.tobytes() == q.model.weights.tobytes()


# --- voting -----------------------------------------------------------------

def test_majority_vote():
    assert majority_vote([[1], [1], [2]]).tolist() == [1]
    assert majority_vote([[7], [3]]).tolist() == [3]
    assert majority_vote([[2, 5], [5, 5], [2, 1]]).tolist() == [2, 5]
    assert majority_vote([[4, 4]], classes=[1, 4]).tolist() == [4, 4]


def test_singleton_and_identical_ensembles(gunpoint):
    train, test = gunpoint
    pipe = fit_pipeline(train, ParamSet(4, 8, 32, 10.0), "ssr", seed=0)
    single = pipe.predict(test.X)
    labels, report = predict_vote([pipe], test)
    assert np.array_equal(labels, single)
    labels3, _ = predict_vote([pipe, pipe, pipe], test)
    assert np.array_equal(labels3, single)


def test_report_consistency(coffee, tmp_path):
    train, test = coffee
    grid = ParamGrid(a_values=(4,), nb_values=(8, 12), k_values=(32, 64), C_values=(1, 10))
    cfg = BenchmarkConfig(grid=grid, seed=2, run_ednn=True, out=str(tmp_path / "r.json"),
                          predictions_csv=str(tmp_path / "p.csv"))
    report = evaluate_dataset(train, test, cfg)
    votes = np.array(report.pipeline_predictions)
    recomputed = majority_vote(votes, report.classes)
    assert recomputed.tolist() == report.predictions
    correct = int(np.sum(recomputed == np.array(report.true_labels)))
    assert report.error_rate == 1 - correct / report.n_test
    conf = np.array(report.confusion)
    assert report.error_rate == pytest.approx(1 - np.trace(conf) / report.n_test, abs=1e-15)
    assert report.n_evaluated_sets == 8 and report.fold_method == "loo"
    assert report.ednn_error_rate == 0.0
    assert {"descriptors", "kmeans", "svm_cv", "predict", "ednn"} <= set(report.timings)
    back = EvalReport.load(tmp_path / "r.json")
    assert back == report
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "series_id,true_label,predicted_label" and len(lines) == 29


def test_pipeline_file_round_trip(gunpoint, tmp_path):
    train, test = gunpoint
    for scheme in ("ssr", "idf"):
        pipe = fit_pipeline(train, ParamSet(8, 4, 64, 100.0), scheme, seed=3)
        save_pipeline(pipe, tmp_path / f"{scheme}.npz")
        back = load_pipeline(tmp_path / f"{scheme}.npz")
        assert back.params == pipe.params and back.scheme == pipe.scheme
        assert np.array_equal(back.transform(test.X), pipe.transform(test.X))
        assert np.array_equal(back.predict(test.X), pipe.predict(test.X))
