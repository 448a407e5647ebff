"""Level-wise mining of frequent relational patterns.

The search is breadth first over the refinement lattice: every level adds one
atom (non-dimensional or dimensional) to the frequent patterns of the level
before. A child can only cover sequences its parent covers, so each candidate
is tested against its parent's cover set only.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import LabeledDataset, LanguageBias, MinedFeature
from .errors import VocabularyError
from .logic import (AFTER, NEXT, NSTEP, Atom, DimAtom, Pattern, build_event_index,
                    const, dedupe_equivalent, oi_subsumes_pattern, subsumes_sequence, var)

log = logging.getLogger(__name__)

CONF_TOL = 1e-12


@dataclass
class MinerConfig:
    bias: LanguageBias = field(default_factory=LanguageBias)
    confidence_threshold: float = 1.0
    keep_all_levels: bool = True
    max_nstep: int = 3
    # None means maxsize - 1 (at least 1): enough to chain maxsize fluents.
    max_dims: Optional[int] = None
    absolute_minfreq: bool = False
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.confidence_threshold <= 1:
            raise ValueError("confidence threshold must lie in (0, 1]")

    @property
    def dim_limit(self) -> int:
        if self.max_dims is not None:
            return self.max_dims
        return max(1, self.bias.maxsize - 1)


@dataclass
class Vocabulary:
    """Predicates and constants observed in a dataset."""

    fluents: dict
    statics: dict
    constants: dict
    n_dims: int

    @property
    def predicates(self) -> dict:
        return {**self.fluents, **self.statics}


def vocabulary(data: LabeledDataset) -> Vocabulary:
    fluents, statics, consts = {}, {}, {}
    for seq in data.sequences:
        for table, atoms in ((fluents, seq.fluents), (statics, seq.statics)):
            for a in atoms:
                table[a.predicate] = a.arity
                for i, t in enumerate(a.args):
                    consts.setdefault((a.predicate, i), set()).add(t.name)
    return Vocabulary(dict(sorted(fluents.items())), dict(sorted(statics.items())),
                      {k: tuple(sorted(v)) for k, v in consts.items()}, data.dimensions)


def check_vocabulary(data: LabeledDataset, bias: LanguageBias) -> Vocabulary:
    vocab = vocabulary(data)
    missing = sorted(p for p in vocab.predicates if p not in bias.types)
    if missing:
        raise VocabularyError("predicates without type declaration: " + ", ".join(missing))
    bad = sorted(p for p, n in vocab.predicates.items() if len(bias.types[p]) != n)
    if bad:
        raise VocabularyError("type arity differs from data for: " + ", ".join(bad))
    return vocab


def variable_types(p: Pattern, bias: LanguageBias) -> dict:
    types = {}
    for a in p.atoms:
        decl = bias.types.get(a.predicate)
        if decl is None:
            continue
        for t, ty in zip(a.args, decl):
            if t.is_var:
                types.setdefault(t, ty)
    for d in p.dims:
        ty = types.get(d.src)
        if ty is not None and d.dst.is_var:
            types.setdefault(d.dst, ty)
    return types


class _Fresh:
    def __init__(self, p: Pattern):
        self.taken = {t.name for t in p.variables()}
        self.k = 0

    def __call__(self):
        while True:
            self.k += 1
            name = f"V{self.k}"
            if name not in self.taken:
                self.taken.add(name)
                return var(name)


def _atom_arguments(p, pred, types, modes, vocab, existing, fresh_names):
    """All argument tuples for a new ``pred`` atom; fresh variables may be
    shared between positions of the new atom when their types agree."""
    def extend(i, chosen, new_vars):
        if i == len(types):
            yield tuple(chosen)
            return
        mode = modes[i]
        if mode == "+" and not p.atoms:
            mode = "-"
        if mode == "#":
            for c in vocab.constants.get((pred, i), ()):
                yield from extend(i + 1, chosen + [const(c)], new_vars)
            return
        options = [v for v, ty in existing.items() if ty == types[i]]
        if mode == "-":
            options += [v for v, ty in new_vars if ty == types[i]]
        for v in options:
            yield from extend(i + 1, chosen + [v], new_vars)
        if mode == "-":
            v = fresh_names[len(new_vars)]
            yield from extend(i + 1, chosen + [v], new_vars + [(v, types[i])])
    return extend(0, [], [])


def refine(p: Pattern, bias: LanguageBias, vocab: Vocabulary,
           max_nstep: int = 3, max_dims: Optional[int] = None) -> list:
    """One-step specialisations of ``p``: one more non-dimensional atom
    (while shorter than maxsize) or one more dimensional atom leaving the
    event of a fluent already in ``p``."""
    if max_dims is None:
        max_dims = max(1, bias.maxsize - 1)
    out = []
    existing = variable_types(p, bias)
    present = set(p.atoms)
    if p.length < bias.maxsize:
        preds = list(vocab.predicates)
        if not p.atoms and bias.key_predicates:
            preds = [q for q in preds if q in bias.key_predicates]
        for pred in preds:
            types = bias.types.get(pred)
            if types is None:
                continue
            modes = bias.modes.get(pred, ("-",) * len(types))
            fresh = _Fresh(p)
            names = [fresh() for _ in types]
            for args in _atom_arguments(p, pred, types, modes, vocab, existing, names):
                a = Atom(pred, args)
                if a not in present:
                    out.append(p.with_atom(a))
    if len(p.dims) < max_dims and vocab.n_dims:
        starts = []
        for a in p.atoms:
            if a.predicate in vocab.fluents and a.args and a.args[0] not in starts:
                starts.append(a.args[0])
        kinds = [(NEXT, 1), (AFTER, 1)] + [(NSTEP, n) for n in range(2, max_nstep + 1)]
        have = set(p.dims)
        fresh = _Fresh(p)()
        for src in starts:
            ty = existing.get(src)
            targets = [v for v, t in existing.items() if v != src and t == ty and ty is not None]
            targets.append(fresh)
            for dim in range(1, vocab.n_dims + 1):
                for op, steps in kinds:
                    for dst in targets:
                        d = DimAtom(op, dim, src, dst, steps)
                        if d not in have:
                            out.append(p.with_dim(d))
    return out


def _antimonotone_ok(p: Pattern, bias: LanguageBias) -> bool:
    if any(oi_subsumes_pattern(n, p) for n in bias.negconstraints):
        return False
    preds = {a.predicate for a in p.atoms}
    if any(len(preds.intersection(g)) > 1 for g in bias.atmostone_groups):
        return False
    if bias.key_predicates and (not p.atoms or p.atoms[0].predicate not in bias.key_predicates):
        return False
    return True


def check_constraints(p: Pattern, bias: LanguageBias) -> bool:
    if not _antimonotone_ok(p, bias):
        return False
    return all(oi_subsumes_pattern(c, p) for c in bias.posconstraints)


def make_feature(p: Pattern, cover: np.ndarray, y: np.ndarray, classes) -> MinedFeature:
    freq = int(cover.sum())
    counts = np.bincount(y[cover], minlength=len(classes))
    supports = {c: int(n) for c, n in zip(classes, counts)}
    confidences = {c: (n / freq if freq else 0.0) for c, n in supports.items()}
    return MinedFeature(p, freq, supports, confidences)


def coverage(p: Pattern, data: LabeledDataset, rows=None) -> np.ndarray:
    idxs = data.indexes()
    cover = np.zeros(len(data), dtype=bool)
    for i in (range(len(data)) if rows is None else rows):
        cover[i] = subsumes_sequence(p, data.sequences[i], idxs[i])
    return cover


def compute_stats(p: Pattern, data: LabeledDataset) -> MinedFeature:
    return make_feature(p, coverage(p, data), data.y, data.classes)


_worker_data = None


def _init_worker(sequences, dims):
    global _worker_data
    _worker_data = (sequences, [build_event_index(s, dims) for s in sequences])


def _cover_rows(job):
    p, rows = job
    seqs, idxs = _worker_data
    return [i for i in rows if subsumes_sequence(p, seqs[i], idxs[i])]


def _is_frequent(freq: int, n: int, cfg: MinerConfig) -> bool:
    if cfg.absolute_minfreq:
        return freq > cfg.bias.minfreq
    return n > 0 and freq / n > cfg.bias.minfreq


def mine_frequent(data: LabeledDataset, cfg: MinerConfig, on_level=None, covers=None) -> list:
    """Every frequent, constraint-satisfying pattern as a MinedFeature, level
    by level, with OI-equivalent duplicates removed.

    ``on_level(k, features)`` receives every frequent pattern of level k
    (before the posconstraint check). When ``covers`` is a list, the boolean
    cover vector of each returned feature is appended to it.
    """
    if len(data) == 0:
        raise ValueError("cannot mine an empty dataset")
    bias = cfg.bias
    vocab = check_vocabulary(data, bias)
    y = data.y
    n = len(data)
    everything = np.arange(n)
    pool = None
    if cfg.threads > 1:
        pool = ProcessPoolExecutor(cfg.threads, initializer=_init_worker,
                                   initargs=(data.sequences, data.dimensions))
    results = []
    try:
        candidates = [(c, everything) for c in refine(Pattern(), bias, vocab, cfg.max_nstep,
                                                      cfg.dim_limit)]
        level = 1
        while candidates:
            candidates = dedupe_equivalent(_Cand(p, rows) for p, rows in candidates)
            candidates = [c for c in candidates if _antimonotone_ok(c.pattern, bias)]
            level_rows = _covers(candidates, data, pool)
            frontier = []
            seen = []
            for cand, rows in zip(candidates, level_rows):
                if not _is_frequent(len(rows), n, cfg):
                    continue
                cover = np.zeros(n, dtype=bool)
                cover[rows] = True
                feat = make_feature(cand.pattern, cover, y, data.classes)
                frontier.append((cand.pattern, np.asarray(rows, dtype=np.int64)))
                seen.append(feat)
                if not all(oi_subsumes_pattern(c, cand.pattern) for c in bias.posconstraints):
                    continue
                if cfg.keep_all_levels or cand.pattern.length == bias.maxsize:
                    results.append(feat)
                    if covers is not None:
                        covers.append(cover)
            if on_level is not None:
                on_level(level, seen)
            log.debug("level %d: %d candidates, %d frequent", level, len(candidates),
                      len(frontier))
            candidates = [(c, rows) for p, rows in frontier
                          for c in refine(p, bias, vocab, cfg.max_nstep, cfg.dim_limit)]
            level += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return results


@dataclass
class _Cand:
    pattern: Pattern
    rows: np.ndarray


def _covers(candidates, data, pool) -> list:
    if pool is None:
        seqs, idxs = data.sequences, data.indexes()
        return [[i for i in c.rows if subsumes_sequence(c.pattern, seqs[i], idxs[i])]
                for c in candidates]
    jobs = [(c.pattern, list(c.rows)) for c in candidates]
    return list(pool.map(_cover_rows, jobs, chunksize=max(1, len(jobs) // 64)))


def passes_threshold(f: MinedFeature, threshold: float) -> bool:
    return f.freq > 0 and f.best_confidence >= threshold - CONF_TOL


def mine(data: LabeledDataset, cfg: MinerConfig) -> list:
    """Frequent patterns whose best class confidence reaches the threshold."""
    return [f for f in mine_frequent(data, cfg)
            if passes_threshold(f, cfg.confidence_threshold)]


def restat(features, data: LabeledDataset) -> list:
    """Recompute statistics of already-mined patterns on another dataset."""
    return [compute_stats(f.pattern, data) for f in features]
