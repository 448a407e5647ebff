"""Planted-motif synthetic datasets.

Every class owns a motif: a run of ``motif_length`` consecutive events
carrying fixed symbols. A sequence is random filler with its class motif
planted at a random offset; no other class's motif is allowed to appear.
With probability ``noise`` a sequence carries a different class's motif
instead, so the Bayes-optimal accuracy on balanced data is ``1 - noise``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset, LanguageBias
from .logic import Atom, RelationalSequence, const


@dataclass
class SyntheticProblem:
    data: LabeledDataset
    bias: LanguageBias
    motifs: list


def _contains(seq, motif) -> bool:
    L = len(motif)
    return any(tuple(seq[i:i + L]) == motif for i in range(len(seq) - L + 1))


def make_motifs(n_classes: int, motif_length: int, alphabet, rng) -> list:
    motifs = []
    tries = 0
    while len(motifs) < n_classes:
        tries += 1
        if tries > 10000:
            raise ValueError("alphabet too small for distinct motifs")
        m = tuple(str(x) for x in rng.choice(alphabet, size=motif_length,
                                              replace=motif_length > len(alphabet)))
        if m in motifs:
            continue
        if any(_contains(m, o) or _contains(o, m) for o in motifs):
            continue
        motifs.append(m)
    return motifs


def generate_synthetic(n_classes: int, per_class: int, motif_length: int = 2,
                       noise: float = 0.0, seed: int = 0, length: int = 6,
                       n_symbols: int = None, statics: bool = True) -> SyntheticProblem:
    """Build a planted-motif dataset with a matching language bias."""
    if motif_length < 1:
        raise ValueError("motif length must be at least 1")
    if length < motif_length:
        raise ValueError("sequences shorter than the motif")
    rng = np.random.default_rng(seed)
    n_symbols = n_symbols or max(4, n_classes + 2)
    alphabet = list(string.ascii_lowercase[:n_symbols])
    motifs = make_motifs(n_classes, motif_length, alphabet, rng)
    classes = [f"c{k + 1}" for k in range(n_classes)]
    sequences, labels = [], []
    for k, label in enumerate(classes):
        for r in range(per_class):
            planted = k
            if n_classes > 1 and rng.random() < noise:
                planted = int(rng.choice([j for j in range(n_classes) if j != k]))
            while True:
                filler = [str(x) for x in rng.choice(alphabet, size=length - motif_length)]
                at = int(rng.integers(0, len(filler) + 1))
                symbols = filler[:at] + list(motifs[planted]) + filler[at:]
                if not any(_contains(symbols, m) for j, m in enumerate(motifs) if j != planted):
                    break
            events = [f"e{i + 1}" for i in range(length)]
            fluents = frozenset(Atom("f", (const(e), const(s))) for e, s in zip(events, symbols))
            stat = frozenset()
            if statics:
                stat = frozenset({Atom("origin", (const(f"o{int(rng.integers(1, 3))}"),))})
            sequences.append(RelationalSequence(f"{label}_{r + 1}", fluents, stat,
                                                {1: tuple(events)}))
            labels.append(label)
    data = LabeledDataset(sequences, labels, tuple(classes) if per_class else (), 1)
    bias = LanguageBias(maxsize=motif_length, minfreq=0.1,
                        types={"f": ("event", "symbol"), "origin": ("source",)},
                        modes={"f": ("-", "#"), "origin": ("#",)})
    return SyntheticProblem(data, bias, motifs)


def motif_pattern_text(motif) -> str:
    """The chain pattern that recognises ``motif``."""
    parts = [f"f(E{i + 1},{s})" for i, s in enumerate(motif)]
    parts += [f"next(1,E{i + 1},E{i + 2})" for i in range(len(motif) - 1)]
    return ", ".join(parts)
