"""Naive Bayes over binary pattern features.

A sequence becomes a 0/1 vector (bit i set when pattern i subsumes it). With
class-conditional independence the log posterior of class j is linear in the
bits: ``g_j(x) = sum_i x_i * alpha_ij + beta_j`` where
``alpha_ij = ln(p_ij / (1 - p_ij))`` and
``beta_j = sum_i ln(1 - p_ij) + ln prior_j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import LabeledDataset
from .errors import FitError
from .logic import build_event_index, subsumes_sequence
from .miner import coverage

DEFAULT_SMOOTHING = 1.0


@dataclass
class BayesModel:
    p: np.ndarray          # d x Q, P(x_i = 1 | class j)
    priors: np.ndarray     # Q
    classes: tuple
    smoothing: float = DEFAULT_SMOOTHING

    @property
    def n_features(self) -> int:
        return self.p.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        return np.log(self.p) - np.log1p(-self.p)

    @property
    def log1mp(self) -> np.ndarray:
        return np.log1p(-self.p)

    @property
    def log_prior(self) -> np.ndarray:
        return np.log(self.priors)

    @property
    def beta(self) -> np.ndarray:
        return self.log1mp.sum(axis=0) + self.log_prior

    def discriminants(self, x) -> np.ndarray:
        x = _check_dims(self, x)
        return x @ self.alpha + self.beta

    def to_dict(self) -> dict:
        return {"classes": list(self.classes), "priors": self.priors.tolist(),
                "smoothing": self.smoothing, "p": self.p.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BayesModel":
        q = len(d["classes"])
        p = np.array(d["p"], dtype=np.float64).reshape(-1, q)
        return cls(p, np.array(d["priors"], dtype=np.float64), tuple(d["classes"]),
                   float(d["smoothing"]))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "BayesModel":
        return cls.from_dict(json.loads(text))


def _check_dims(model, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise ValueError(f"vector has {x.shape[0] if x.ndim else 0} bits, "
                         f"model expects {model.n_features}")
    return x


def vectorize(s, features, idx=None) -> np.ndarray:
    if idx is None:
        idx = build_event_index(s)
    return np.array([subsumes_sequence(f.pattern, s, idx) for f in features], dtype=np.uint8)


def vectorize_dataset(data: LabeledDataset, features) -> np.ndarray:
    X = np.zeros((len(data), len(features)), dtype=np.uint8)
    for c, f in enumerate(features):
        X[:, c] = coverage(f.pattern, data)
    return X


def fit_matrix(X, y, classes, smoothing: float = DEFAULT_SMOOTHING) -> BayesModel:
    """Estimate p_ij = (count_ij + eps) / (n_j + 2 eps) and priors n_j / m."""
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    X = np.asarray(X)
    y = np.asarray(y, dtype=np.int64)
    q = len(classes)
    n = np.bincount(y, minlength=q).astype(np.float64)
    empty = [c for c, k in zip(classes, n) if k == 0]
    if empty:
        raise FitError("no training sequence for class " + ", ".join(map(str, empty)))
    onehot = np.zeros((len(y), q))
    onehot[np.arange(len(y)), y] = 1.0
    counts = X.T.astype(np.float64) @ onehot
    p = (counts + smoothing) / (n[None, :] + 2 * smoothing)
    return BayesModel(p, n / n.sum(), tuple(classes), float(smoothing))


def fit(data: LabeledDataset, features, smoothing: float = DEFAULT_SMOOTHING) -> BayesModel:
    return fit_matrix(vectorize_dataset(data, features), data.y, data.classes, smoothing)


def discriminant(model: BayesModel, x, j: int) -> float:
    return float(model.discriminants(x)[j])


def predict_index(model: BayesModel, x) -> int:
    return _kernels.choose(model.discriminants(x), model.log_prior)


def predict(model: BayesModel, x):
    return model.classes[predict_index(model, x)]


def error_count_matrix(X, y, classes, cols=None, smoothing=DEFAULT_SMOOTHING) -> int:
    X = np.asarray(X, dtype=np.uint8)
    if cols is None:
        cols = range(X.shape[1])
    model = fit_matrix(X, y, classes, smoothing)
    subsets = _kernels.pack_subsets([list(cols)])
    err = _kernels.subset_errors(X, np.asarray(y, dtype=np.int64), model.alpha,
                                 model.log1mp, model.log_prior, subsets)
    return int(err[0])


def error_count(data: LabeledDataset, features, smoothing=DEFAULT_SMOOTHING) -> int:
    """Resubstitution errors of a model fitted on ``data`` with ``features``."""
    if len(data) == 0:
        raise ValueError("empty dataset")
    return error_count_matrix(vectorize_dataset(data, features), data.y, data.classes,
                              smoothing=smoothing)
