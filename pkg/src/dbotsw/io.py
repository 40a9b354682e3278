"""Saving and loading fitted pipelines (codebook + document frequencies + SVM)."""
from __future__ import annotations

import json

import numpy as np

from .bow import DocumentFrequency, NormScheme
from .classifier import LinearModel, SvmParams
from .codebook import Codebook
from .experiment import ParamSet, Pipeline
from .scalespace import ScaleSpaceParams

__all__ = ["PIPELINE_FORMAT_VERSION", "save_pipeline", "load_pipeline"]

PIPELINE_FORMAT_VERSION = 1


def save_pipeline(pipe: Pipeline, path) -> None:
    header = {
        "format": "dbotsw-pipeline",
        "version": PIPELINE_FORMAT_VERSION,
        "params": {"a": pipe.params.a, "n_b": pipe.params.n_b, "k": pipe.params.k,
                   "C": pipe.params.C},
        "scale": {"sigma0": pipe.scale.sigma0, "k_sc": pipe.scale.k_sc,
                  "n_scales": pipe.scale.n_scales, "tau_step": pipe.scale.tau_step},
        "scheme": pipe.scheme.value,
        "extraction": pipe.extraction,
        "classes": list(pipe.model.classes),
        "svm": {"C": pipe.model.params.C, "seed": pipe.model.params.seed},
        "requested_k": pipe.codebook.requested_k,
        "n_train": pipe.df.n_train if pipe.df is not None else None,
    }
    arrays = {"centroids": pipe.codebook.centroids, "weights": pipe.model.weights,
              "biases": pipe.model.biases}
    if pipe.df is not None:
        arrays["df"] = pipe.df.df
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header)), **arrays)


def load_pipeline(path) -> Pipeline:
    with np.load(path) as data:
        header = json.loads(str(data["header"]))
        if header.get("format") != "dbotsw-pipeline":
            raise ValueError(f"{path}: not a pipeline file")
        if header.get("version") != PIPELINE_FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported pipeline version {header.get('version')}")
        centroids = data["centroids"]
        weights = data["weights"]
        biases = data["biases"]
        df = data["df"] if "df" in data.files else None
    model = LinearModel(tuple(header["classes"]), weights, biases, SvmParams(**header["svm"]))
    return Pipeline(
        params=ParamSet(**header["params"]),
        scale=ScaleSpaceParams(**header["scale"]),
        scheme=NormScheme(header["scheme"]),
        codebook=Codebook(centroids, requested_k=header["requested_k"]),
        model=model,
        df=DocumentFrequency(df, header["n_train"]) if df is not None else None,
        extraction=header["extraction"],
    )
