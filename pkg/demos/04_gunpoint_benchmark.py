"""The full protocol on GunPoint.

180 parameter sets are scored by leave-one-out cross-validation on the
50 training series; every set sharing the best score is refit on the full
training split and the ensemble votes on the 150 test series.  The
1NN-Euclidean baseline runs alongside.  Takes about half a minute on one
core.
"""
from __future__ import annotations

import sys

from dbotsw import load_ucr
from dbotsw.experiment import BenchmarkConfig, evaluate_dataset

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
train, test = load_ucr("GunPoint", "train"), load_ucr("GunPoint", "test")

report = evaluate_dataset(train, test, BenchmarkConfig(scheme="ssr", seed=seed, run_ednn=True))

#%% Cross-validation
print(f"{report.n_evaluated_sets} sets, {report.fold_method} CV, "
      f"best accuracy {report.cv_best_accuracy:.3f} shared by {len(report.chosen_sets)}")
for s in report.chosen_sets[:5]:
    print(f"  a={s['a']} n_b={s['n_b']} k={s['k']} C={s['C']:g}")

#%% Test error against the baseline
print(f"D-BoTSW (SSR) error {report.error_rate:.4f}, EDNN error {report.ednn_error_rate:.4f}")
print("confusion:", report.confusion)
print("seconds:", {k: round(v, 1) for k, v in report.timings.items()})
