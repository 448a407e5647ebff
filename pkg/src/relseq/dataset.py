"""Containers shared by the parser, the miner and the classifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .logic import Pattern, RelationalSequence, build_event_index


@dataclass
class LabeledDataset:
    sequences: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    classes: tuple = ()
    dimensions: int = 0

    def __post_init__(self):
        if len(self.sequences) != len(self.labels):
            raise ValueError("sequences and labels differ in length")
        if not self.classes:
            self.classes = tuple(dict.fromkeys(self.labels))
        if not self.dimensions:
            self.dimensions = max((max(s.orders, default=0) for s in self.sequences), default=0)
        self._indexes = None

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(zip(self.sequences, self.labels))

    @property
    def y(self) -> np.ndarray:
        """Labels as indices into ``classes``."""
        pos = {c: i for i, c in enumerate(self.classes)}
        return np.array([pos[l] for l in self.labels], dtype=np.int64)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=len(self.classes)).astype(np.int64)

    def indexes(self) -> list:
        if self._indexes is None:
            self._indexes = [build_event_index(s, self.dimensions) for s in self.sequences]
        return self._indexes

    def subset(self, rows, classes: Optional[tuple] = None) -> "LabeledDataset":
        rows = list(rows)
        sub = LabeledDataset([self.sequences[i] for i in rows], [self.labels[i] for i in rows],
                             tuple(classes) if classes is not None else self.classes,
                             self.dimensions)
        if self._indexes is not None:
            sub._indexes = [self._indexes[i] for i in rows]
        return sub

    def restrict_to(self, classes) -> "LabeledDataset":
        keep = set(classes)
        rows = [i for i, l in enumerate(self.labels) if l in keep]
        return self.subset(rows, tuple(c for c in self.classes if c in keep))


@dataclass
class LanguageBias:
    maxsize: int = 5
    minfreq: float = 0.1
    types: dict = field(default_factory=dict)
    modes: dict = field(default_factory=dict)
    negconstraints: list = field(default_factory=list)
    posconstraints: list = field(default_factory=list)
    atmostone_groups: list = field(default_factory=list)
    key_predicates: Optional[list] = None


@dataclass
class MinedFeature:
    pattern: Pattern
    freq: int
    supports: dict
    confidences: dict

    @property
    def best_confidence(self) -> float:
        return max(self.confidences.values(), default=0.0)

    def is_jumping(self) -> bool:
        return self.freq > 0 and sum(1 for v in self.supports.values() if v > 0) == 1
