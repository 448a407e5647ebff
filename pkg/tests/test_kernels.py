import os
import subprocess
import sys

import numpy as np
import pytest

from oracles import reference_errors
from relseq import _kernels
from relseq.bayes import fit_matrix

needs_numba = pytest.mark.skipif(_kernels.subset_errors_numba is None, reason="numba unavailable")


def random_problem(rng, m=40, d=8, q=3):
    X = (rng.random((m, d)) < rng.uniform(0.1, 0.7)).astype(np.uint8)
    y = rng.integers(0, q, m)
    y[:q] = np.arange(q)
    model = fit_matrix(X, y, tuple(range(q)))
    return X, y.astype(np.int64), model


def random_subsets(rng, d, k=30):
    return [sorted(rng.choice(d, size=int(rng.integers(0, d + 1)), replace=False).tolist())
            for _ in range(k)]


def run(fn, X, y, model, subsets):
    return fn(X, y, np.ascontiguousarray(model.alpha), np.ascontiguousarray(model.log1mp),
              np.ascontiguousarray(model.log_prior), _kernels.pack_subsets(subsets))


def test_numpy_kernel_matches_reference():
    rng = np.random.default_rng(0)
    for _ in range(20):
        X, y, model = random_problem(rng, q=int(rng.integers(2, 5)))
        subsets = random_subsets(rng, X.shape[1], 10)
        got = run(_kernels.subset_errors_numpy, X, y, model, subsets)
        want = []
        for s in subsets:
            # columns of the fitted model: refitting on a subset gives the same p
            want.append(reference_errors(X, y, model.p.shape[1], s))
        assert got.tolist() == want


@needs_numba
def test_backends_agree():
    rng = np.random.default_rng(1)
    for _ in range(40):
        X, y, model = random_problem(rng, m=int(rng.integers(5, 80)), d=int(rng.integers(1, 15)),
                                     q=int(rng.integers(2, 6)))
        subsets = random_subsets(rng, X.shape[1])
        a = run(_kernels.subset_errors_numpy, X, y, model, subsets)
        b = run(_kernels.subset_errors_numba, X, y, model, subsets)
        assert a.tolist() == b.tolist()


@needs_numba
def test_backends_agree_on_exact_ties():
    X = np.ones((6, 4), dtype=np.uint8)
    y = np.array([0, 1, 0, 1, 0, 1], dtype=np.int64)
    model = fit_matrix(X, y, (0, 1))
    subsets = [[], [0], [0, 1, 2, 3]]
    a = run(_kernels.subset_errors_numpy, X, y, model, subsets)
    b = run(_kernels.subset_errors_numba, X, y, model, subsets)
    assert a.tolist() == b.tolist() == [3, 3, 3]


def test_empty_batch():
    X = np.zeros((3, 2), dtype=np.uint8)
    y = np.array([0, 1, 0], dtype=np.int64)
    model = fit_matrix(X, y, (0, 1))
    out = _kernels.subset_errors_numpy(X, y, model.alpha, model.log1mp, model.log_prior,
                                       np.zeros((0, 1), dtype=np.int64))
    assert out.shape == (0,)


def test_pack_subsets():
    packed = _kernels.pack_subsets([{3, 1}, [], [2]])
    assert packed.tolist() == [[1, 3], [-1, -1], [2, -1]]
    assert _kernels.pack_subsets([[]]).shape == (1, 1)


def test_choose_breaks_ties_by_prior_then_index():
    lp = np.log(np.array([0.2, 0.5, 0.3]))
    assert _kernels.choose(np.array([1.0, 1.0, 0.0]), lp) == 1
    assert _kernels.choose(np.array([1.0, 0.5, 1.0]), lp) == 2
    assert _kernels.choose(np.array([0.0, 0.0]), np.log(np.array([0.5, 0.5]))) == 0


def test_env_flag_selects_numpy():
    code = "from relseq import _kernels as k; print(k.BACKEND, k.subset_errors_numba is None)"
    env = dict(os.environ, RELSEQ_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out == ["numpy", "True"]
