"""Training, round-robin voting and cross-validation."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .bayes import DEFAULT_SMOOTHING, BayesModel, fit_matrix, vectorize_dataset
from .dataset import LabeledDataset, LanguageBias, MinedFeature
from .errors import StratificationError
from .grasp import GraspConfig, SubsetObjective, grasp_select
from .logic import build_event_index, subsumes_sequence
from .miner import MinerConfig, make_feature, mine_frequent, passes_threshold
from .syntax import parse_background, parse_dataset, parse_pattern, serialize_patterns

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    data_path: Optional[str] = None
    background_path: Optional[str] = None
    miner: MinerConfig = field(default_factory=MinerConfig)
    grasp: GraspConfig = field(default_factory=GraspConfig)
    folds: int = 10
    round_robin: bool = True
    use_grasp: bool = True
    smoothing: float = DEFAULT_SMOOTHING
    out_dir: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("need at least 2 folds")

    @property
    def confidence_threshold(self) -> float:
        return self.miner.confidence_threshold


@dataclass
class SubModel:
    """A classifier over ``classes`` (a pair under round robin) using
    ``features`` (statistics on its own training rows)."""

    classes: tuple
    features: list
    model: BayesModel
    pool_size: int = 0
    score: Optional[int] = None
    columns: Optional[list] = None   # indices of ``features`` in the mined list

    def discriminants(self, x) -> np.ndarray:
        return self.model.discriminants(x)


def _derived_seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def fit_submodel(classes, features, X, y_labels, cfg: PipelineConfig, seed: int,
                 use_grasp: bool) -> Optional[SubModel]:
    """Train one classifier for ``classes`` from the mined features.

    ``X`` holds the cover bits of ``features`` over the training rows and
    ``y_labels`` their labels. Returns None when a class has no rows.
    """
    rows = np.array([i for i, l in enumerate(y_labels) if l in classes], dtype=np.int64)
    pos = {c: j for j, c in enumerate(classes)}
    y = np.array([pos[y_labels[i]] for i in rows], dtype=np.int64)
    if len(rows) == 0 or np.bincount(y, minlength=len(classes)).min() == 0:
        log.warning("skipping %s: a class has no training sequences", "/".join(classes))
        return None
    Xs = X[rows]
    pool, pool_feats = [], []
    for c, f in enumerate(features):
        feat = make_feature(f.pattern, Xs[:, c].astype(bool), y, classes)
        if passes_threshold(feat, cfg.confidence_threshold):
            pool.append(c)
            pool_feats.append(feat)
    Xp = Xs[:, pool]
    chosen = list(range(len(pool)))
    score = None
    if use_grasp and pool:
        obj = SubsetObjective(Xp, y, classes, cfg.smoothing)
        gcfg = replace(cfg.grasp, seed=seed, smoothing=cfg.smoothing)
        result = grasp_select(obj, gcfg)
        chosen = result.best.sorted()
        score = result.best.score
    model = fit_matrix(Xp[:, chosen], y, classes, cfg.smoothing)
    return SubModel(tuple(classes), [pool_feats[k] for k in chosen], model, len(pool), score,
                    [pool[k] for k in chosen])


def round_robin_fit(data: LabeledDataset, features, cfg: PipelineConfig, X=None,
                    seed: int = 0, use_grasp: Optional[bool] = None) -> list:
    """One classifier per unordered class pair."""
    if len(data.classes) < 2:
        raise ValueError("round robin needs at least two classes")
    use_grasp = cfg.use_grasp if use_grasp is None else use_grasp
    if X is None:
        X = vectorize_dataset(data, features)
    out = []
    for k, pair in enumerate(itertools.combinations(data.classes, 2)):
        sub = fit_submodel(pair, features, X, data.labels, cfg, _derived_seed(seed, k), use_grasp)
        if sub is not None:
            out.append(sub)
    return out


def flat_fit(data: LabeledDataset, features, cfg: PipelineConfig, X=None, seed: int = 0,
             use_grasp: Optional[bool] = None) -> list:
    use_grasp = cfg.use_grasp if use_grasp is None else use_grasp
    if X is None:
        X = vectorize_dataset(data, features)
    sub = fit_submodel(data.classes, features, X, data.labels, cfg, _derived_seed(seed, 0),
                       use_grasp)
    return [sub] if sub is not None else []


def _sub_vector(sub: SubModel, s, idx) -> np.ndarray:
    return np.array([subsumes_sequence(f.pattern, s, idx) for f in sub.features], dtype=np.uint8)


def vote(submodels, vectors, classes) -> str:
    """Majority vote; ties go to the larger summed discriminant margin, then
    to the earlier class."""
    votes = dict.fromkeys(classes, 0)
    margins = dict.fromkeys(classes, 0.0)
    for sub, x in zip(submodels, vectors):
        g = sub.discriminants(x)
        winner = _choose(sub, g)
        votes[winner] += 1
        for j, c in enumerate(sub.classes):
            others = [g[k] for k in range(len(g)) if k != j]
            margins[c] += float(g[j] - max(others)) if others else 0.0
    top = max(votes.values())
    tied = [c for c in classes if votes[c] == top]
    best = max(margins[c] for c in tied)
    return next(c for c in tied if margins[c] == best)


def _choose(sub: SubModel, g) -> str:
    from ._kernels import choose
    return sub.classes[choose(np.asarray(g), sub.model.log_prior)]


def round_robin_predict(submodels, s, classes=None, idx=None) -> str:
    if not submodels:
        raise ValueError("no trained classifiers")
    if classes is None:
        classes = list(dict.fromkeys(c for sub in submodels for c in sub.classes))
    if idx is None:
        idx = build_event_index(s)
    return vote(submodels, [_sub_vector(sub, s, idx) for sub in submodels], classes)


def _predict_rows(submodels, X, classes) -> list:
    """Predict from a cover matrix over the mined features."""
    return [vote(submodels, [X[i, sub.columns] for sub in submodels], classes)
            for i in range(X.shape[0])]


# --- cross-validation ---------------------------------------------------------

@dataclass
class EvalReport:
    classes: list
    fold_accuracies: list
    fold_selected: list
    confusion: list
    baseline_accuracies: Optional[list] = None
    baseline_confusion: Optional[list] = None
    fold_sizes: list = field(default_factory=list)
    fold_mined: list = field(default_factory=list)
    fold_pool: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies)) if self.fold_accuracies else 0.0

    @property
    def baseline_mean(self) -> Optional[float]:
        if self.baseline_accuracies is None:
            return None
        return float(np.mean(self.baseline_accuracies))

    def to_dict(self) -> dict:
        """Everything except timing, so that reports are reproducible."""
        return {
            "settings": self.settings,
            "classes": self.classes,
            "mean_accuracy": self.mean_accuracy,
            "fold_accuracies": self.fold_accuracies,
            "fold_selected_features": self.fold_selected,
            "confusion": self.confusion,
            "baseline_mean_accuracy": self.baseline_mean,
            "baseline_fold_accuracies": self.baseline_accuracies,
            "baseline_confusion": self.baseline_confusion,
            "fold_test_sizes": self.fold_sizes,
            "fold_mined_patterns": self.fold_mined,
            "fold_pool_sizes": self.fold_pool,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fold", "n_test", "accuracy", "accuracy_without_selection",
                    "mined", "pool", "selected"])
        base = self.baseline_accuracies or [None] * len(self.fold_accuracies)
        for k, acc in enumerate(self.fold_accuracies):
            w.writerow([k, self.fold_sizes[k], repr(acc),
                        "" if base[k] is None else repr(base[k]),
                        self.fold_mined[k], self.fold_pool[k], self.fold_selected[k]])
        return buf.getvalue()


def stratified_folds(data: LabeledDataset, k: int, seed: int) -> list:
    from sklearn.model_selection import StratifiedKFold
    counts = data.class_counts()
    small = [c for c, n in zip(data.classes, counts) if n < k]
    if small:
        raise StratificationError(
            f"class {', '.join(small)} has fewer than {k} sequences for {k}-fold stratification")
    skf = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed % (2 ** 32))
    return [(np.sort(tr), np.sort(te)) for tr, te in skf.split(np.zeros(len(data)), data.y)]


def _confusion(classes, truth, pred) -> np.ndarray:
    pos = {c: i for i, c in enumerate(classes)}
    m = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truth, pred):
        m[pos[t], pos[p]] += 1
    return m


def cross_validate_data(data: LabeledDataset, cfg: PipelineConfig) -> EvalReport:
    """Stratified k-fold evaluation; mining, selection and fitting only see
    the training part of each fold."""
    if cfg.out_dir:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    folds = stratified_folds(data, cfg.folds, cfg.seed)
    classes = list(data.classes)
    variants = ["grasp", "all"] if cfg.use_grasp else ["all"]
    accs = {v: [] for v in variants}
    conf = {v: np.zeros((len(classes), len(classes)), dtype=np.int64) for v in variants}
    selected, sizes, mined_counts, pool_sizes = [], [], [], []
    timing = {"folds": []}
    fitter = round_robin_fit if cfg.round_robin else flat_fit
    t_all = time.perf_counter()
    for k, (tr, te) in enumerate(folds):
        t0 = time.perf_counter()
        train, test = data.subset(tr), data.subset(te)
        covers = []
        features = mine_frequent(train, cfg.miner, covers=covers)
        X_train = (np.stack(covers, axis=1) if covers
                   else np.zeros((len(train), 0), dtype=bool)).astype(np.uint8)
        X_test = vectorize_dataset(test, features)
        if cfg.out_dir:
            Path(cfg.out_dir, f"fold_{k:02d}_patterns.txt").write_text(
                serialize_patterns(features))
        mined_counts.append(len(features))
        fold_seed = _derived_seed(cfg.seed, k)
        for v in variants:
            subs = fitter(train, features, cfg, X=X_train, seed=fold_seed,
                          use_grasp=(v == "grasp"))
            pred = _predict_rows(subs, X_test, classes) if subs else \
                [classes[0]] * len(test)
            truth = test.labels
            accs[v].append(float(np.mean([p == t for p, t in zip(pred, truth)])))
            conf[v] += _confusion(classes, truth, pred)
            if v == variants[0]:
                selected.append(sum(len(s.features) for s in subs))
                pool_sizes.append(sum(s.pool_size for s in subs))
        sizes.append(len(test))
        timing["folds"].append(time.perf_counter() - t0)
        log.info("fold %d: %s", k, {v: accs[v][-1] for v in variants})
    timing["total"] = time.perf_counter() - t_all
    primary = variants[0]
    report = EvalReport(
        classes=classes,
        fold_accuracies=accs[primary],
        fold_selected=selected,
        confusion=conf[primary].tolist(),
        baseline_accuracies=accs["all"] if cfg.use_grasp else None,
        baseline_confusion=conf["all"].tolist() if cfg.use_grasp else None,
        fold_sizes=sizes, fold_mined=mined_counts, fold_pool=pool_sizes,
        settings=_settings(cfg), timing=timing)
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        (out / "report.json").write_text(report.to_json())
        (out / "folds.csv").write_text(report.to_csv())
        (out / "timing.json").write_text(json.dumps(timing, indent=1) + "\n")
    return report


def _settings(cfg: PipelineConfig) -> dict:
    b = cfg.miner.bias
    return {"folds": cfg.folds, "seed": cfg.seed, "round_robin": cfg.round_robin,
            "grasp": cfg.use_grasp, "confidence": cfg.confidence_threshold,
            "maxiter": cfg.grasp.maxiter, "construction_size": cfg.grasp.n,
            "smoothing": cfg.smoothing, "maxsize": b.maxsize, "minfreq": b.minfreq,
            "absolute_minfreq": cfg.miner.absolute_minfreq, "max_nstep": cfg.miner.max_nstep,
            "max_dims": cfg.miner.dim_limit}


def load_inputs(cfg: PipelineConfig):
    data = parse_dataset(Path(cfg.data_path).read_text())
    bias = parse_background(Path(cfg.background_path).read_text()) \
        if cfg.background_path else LanguageBias()
    return data, bias


def cross_validate(cfg: PipelineConfig) -> EvalReport:
    data, bias = load_inputs(cfg)
    cfg = replace(cfg, miner=replace(cfg.miner, bias=bias))
    return cross_validate_data(data, cfg)


# --- model files --------------------------------------------------------------

def train(data: LabeledDataset, features, cfg: PipelineConfig) -> list:
    fitter = round_robin_fit if cfg.round_robin else flat_fit
    return fitter(data, features, cfg, seed=cfg.seed)


def dump_models(submodels, classes) -> str:
    return json.dumps({
        "classes": list(classes),
        "submodels": [{"classes": list(s.classes),
                       "features": [str(f.pattern) for f in s.features],
                       "model": s.model.to_dict()} for s in submodels],
    }, indent=1) + "\n"


def load_models(text: str):
    d = json.loads(text)
    subs = []
    for s in d["submodels"]:
        feats = [MinedFeature(parse_pattern(p), 0, {}, {}) for p in s["features"]]
        subs.append(SubModel(tuple(s["classes"]), feats, BayesModel.from_dict(s["model"])))
    return subs, d["classes"]
