"""Dense Bag-of-Temporal-SIFT-Words time-series classification."""
from __future__ import annotations

from .bow import NormScheme, series_to_bow
from .classifier import SvmParams, ednn_classify, svm_predict, svm_train
from .codebook import Codebook, assign, kmeans_fit
from .config import load_grid_config
from .descriptor import DescriptorParams, describe_all, describe_keypoint
from .experiment import (
    BenchmarkConfig,
    ParamGrid,
    ParamSet,
    evaluate_dataset,
    fit_final,
    fit_pipeline,
    grid_search,
    predict_vote,
    run_benchmark,
)
from .io import load_pipeline, save_pipeline
from .scalespace import ScaleSpaceParams, build_scale_space, dense_keypoints, detect_extrema
from .ucr import Dataset, TimeSeries, load_ucr, parse_ucr_file

__version__ = "0.1.0"
