"""GRASP wrapper feature selection driven by naive Bayes training error.

Each iteration draws the RCL parameter alpha, grows a subset by ``n``
randomised greedy additions, then descends with add/swap moves. With the
minimisation form used here alpha = 0 is purely greedy and alpha = 1 is
uniformly random.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .bayes import DEFAULT_SMOOTHING, fit_matrix, vectorize_dataset

# Neighbours are scored in blocks of this size; the first improving one wins.
BLOCK = 256


@dataclass(frozen=True)
class Selection:
    indices: frozenset
    score: Optional[int] = None

    def sorted(self) -> list:
        return sorted(self.indices)


@dataclass
class GraspConfig:
    maxiter: int = 50
    n: Optional[int] = None
    seed: int = 0
    alpha: Optional[float] = None   # None: drawn uniformly per iteration
    smoothing: float = DEFAULT_SMOOTHING
    holdout: float = 0.0

    def construction_size(self, pool_size: int) -> int:
        # Half the pool (at most 10) by default. Constructing the whole pool
        # would leave the add/swap neighbourhood empty.
        n = min(10, math.ceil(pool_size / 2)) if self.n is None else self.n
        return max(0, min(n, pool_size))


class SubsetObjective:
    """Memoised err_D over subsets of a fixed feature pool.

    The model is fitted on ``fit_rows`` and errors are counted on
    ``eval_rows``; both default to every row (resubstitution error).
    """

    def __init__(self, X, y, classes, smoothing=DEFAULT_SMOOTHING, fit_rows=None,
                 eval_rows=None):
        X = np.ascontiguousarray(X, dtype=np.uint8)
        y = np.asarray(y, dtype=np.int64)
        fit_rows = np.arange(len(y)) if fit_rows is None else np.asarray(fit_rows)
        eval_rows = fit_rows if eval_rows is None else np.asarray(eval_rows)
        model = fit_matrix(X[fit_rows], y[fit_rows], classes, smoothing)
        self.size = X.shape[1]
        self.X = np.ascontiguousarray(X[eval_rows])
        self.y = np.ascontiguousarray(y[eval_rows])
        self.alpha = np.ascontiguousarray(model.alpha)
        self.log1mp = np.ascontiguousarray(model.log1mp)
        self.log_prior = np.ascontiguousarray(model.log_prior)
        self.cache = {}

    @classmethod
    def from_dataset(cls, data, pool, smoothing=DEFAULT_SMOOTHING, holdout=0.0, seed=0):
        X = vectorize_dataset(data, pool)
        y = data.y
        if holdout > 0:
            from sklearn.model_selection import train_test_split
            fit_rows, eval_rows = train_test_split(np.arange(len(y)), test_size=holdout,
                                                   stratify=y, random_state=seed)
            return cls(X, y, data.classes, smoothing, np.sort(fit_rows), np.sort(eval_rows))
        return cls(X, y, data.classes, smoothing)

    def batch(self, subsets) -> list:
        subsets = [frozenset(s) for s in subsets]
        todo = list(dict.fromkeys(s for s in subsets if s not in self.cache))
        if todo:
            errs = _kernels.subset_errors(self.X, self.y, self.alpha, self.log1mp,
                                          self.log_prior, _kernels.pack_subsets(todo))
            for s, e in zip(todo, errs):
                self.cache[s] = int(e)
        return [self.cache[s] for s in subsets]

    def __call__(self, subset) -> int:
        return self.batch([subset])[0]

    def evaluate(self, subset) -> Selection:
        s = frozenset(subset)
        return Selection(s, self(s))


def construct(obj: SubsetObjective, alpha: float, n: int, rng, steps=None) -> Selection:
    """Randomised greedy construction of an ``n``-feature subset.

    If ``steps`` is a list, one record per addition is appended to it.
    """
    if obj.size == 0:
        raise ValueError("empty feature pool")
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    current = frozenset()
    for _ in range(min(n, obj.size)):
        cands = [c for c in range(obj.size) if c not in current]
        exts = [current | {c} for c in cands]
        errs = obj.batch(exts)
        lo, hi = min(errs), max(errs)
        bound = lo + alpha * (hi - lo)
        rcl = [k for k, e in enumerate(errs) if e <= bound]
        pick = rcl[int(rng.integers(len(rcl)))]
        current = exts[pick]
        if steps is not None:
            steps.append({"candidates": cands, "errors": errs, "lo": lo, "hi": hi,
                          "rcl": [cands[k] for k in rcl], "chosen": cands[pick],
                          "chosen_error": errs[pick]})
    return obj.evaluate(current)


def neighborhood(selection, pool_size: int) -> list:
    """Add moves in ascending index order, then swaps (drop i, insert k)."""
    s = frozenset(getattr(selection, "indices", selection))
    outside = [k for k in range(pool_size) if k not in s]
    moves = [s | {k} for k in outside]
    moves += [(s - {i}) | {k} for i in sorted(s) for k in outside]
    return list(dict.fromkeys(moves))


def local_search(obj: SubsetObjective, selection: Selection) -> Selection:
    """First-improvement descent to a local optimum of the add/swap
    neighbourhood."""
    current = selection if selection.score is not None else obj.evaluate(selection.indices)
    while True:
        moves = neighborhood(current, obj.size)
        better = None
        for start in range(0, len(moves), BLOCK):
            block = moves[start:start + BLOCK]
            for s, e in zip(block, obj.batch(block)):
                if e < current.score:
                    better = Selection(s, e)
                    break
            if better is not None:
                break
        if better is None:
            return current
        current = better


@dataclass
class GraspResult:
    best: Selection
    trace: list = field(default_factory=list)


TRACE_FIELDS = ("iteration", "alpha", "constructed", "local_search", "incumbent")


def grasp_select(obj: SubsetObjective, cfg: GraspConfig) -> GraspResult:
    if obj.size == 0:
        raise ValueError("empty feature pool")
    best_set, best_score = frozenset(), math.inf
    trace = []
    n = cfg.construction_size(obj.size)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.maxiter)
    for it, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        alpha = float(rng.uniform(0.0, 1.0)) if cfg.alpha is None else cfg.alpha
        built = construct(obj, alpha, n, rng)
        improved = local_search(obj, built)
        if improved.score < best_score:
            best_set, best_score = improved.indices, improved.score
        trace.append({"iteration": it, "alpha": alpha, "constructed": built.score,
                      "local_search": improved.score, "incumbent": best_score})
    if best_score == math.inf:
        best_score = obj(best_set)
    return GraspResult(Selection(best_set, int(best_score)), trace)


def write_trace(trace, fh) -> None:
    w = csv.DictWriter(fh, fieldnames=TRACE_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in trace:
        w.writerow({**row, "alpha": repr(row["alpha"])})
