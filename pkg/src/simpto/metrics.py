"""Confusion matrices, their exhaustive enumeration, and TPR/FPR rates."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb, prod
from typing import Hashable, Iterator, Sequence

import numpy as np

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class LabelSet:
    """Ordered class labels with their test-set counts.

    ``positive`` is the index of the positive class, used only when K = 2.
    """

    labels: tuple
    counts: tuple
    positive: int = 0

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.labels) < 2:
            raise ValueError("a label set needs at least two classes")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"labels must be distinct: {self.labels}")
        if len(self.counts) != len(self.labels):
            raise ValueError("one count per label is required")
        if any(c < 0 for c in self.counts):
            raise ValueError(f"counts must be nonnegative: {self.counts}")
        if sum(self.counts) <= 0:
            raise ValueError("counts must sum to a positive test-set size")
        if not 0 <= self.positive < len(self.labels):
            raise ValueError(f"positive index {self.positive} out of range")

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def size(self) -> int:
        return sum(self.counts)

    def index(self, label: Hashable) -> int:
        try:
            return self._lookup()[label]
        except KeyError:
            raise ValueError(f"label {label!r} is not in the label set {self.labels}") from None

    def _lookup(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    @classmethod
    def from_actuals(cls, actuals: Sequence, labels: Sequence, positive: int = 0) -> "LabelSet":
        lookup = {lab: i for i, lab in enumerate(labels)}
        counts = [0] * len(lookup)
        for a in actuals:
            if a not in lookup:
                raise ValueError(f"label {a!r} is not in the label set {tuple(labels)}")
            counts[lookup[a]] += 1
        return cls(tuple(labels), tuple(counts), positive)

    def actual_sequence(self) -> list:
        """Labels repeated by their counts, in label order."""
        return [lab for lab, c in zip(self.labels, self.counts) for _ in range(c)]


@dataclass(frozen=True)
class ConfusionMatrix:
    """entries[i][j] = number of instances of class i predicted as class j."""

    entries: tuple
    label_set: LabelSet

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        k = self.label_set.k
        if len(rows) != k or any(len(r) != k for r in rows):
            raise ValueError(f"confusion matrix must be {k}x{k}")
        for i, row in enumerate(rows):
            if any(v < 0 for v in row):
                raise ValueError("confusion matrix entries must be nonnegative")
            if sum(row) != self.label_set.counts[i]:
                raise ValueError(
                    f"row {i} sums to {sum(row)}, expected class count {self.label_set.counts[i]}"
                )

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def column_sums(self) -> tuple:
        return tuple(sum(col) for col in zip(*self.entries))

    def is_diagonal(self) -> bool:
        return all(v == 0 for i, r in enumerate(self.entries) for j, v in enumerate(r) if i != j)

    def __str__(self):
        return "|".join(" ".join(str(v) for v in row) for row in self.entries)


@dataclass(frozen=True)
class RateProfile:
    """Per-class TPR and FPR.

    ``present`` marks classes with a positive test count; absent classes are
    left out of macro averages.
    """

    tpr: tuple
    fpr: tuple
    present: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "tpr", tuple(self.tpr))
        object.__setattr__(self, "fpr", tuple(self.fpr))
        if len(self.tpr) != len(self.fpr):
            raise ValueError("tpr and fpr vectors must have the same length")
        for name, vec in (("tpr", self.tpr), ("fpr", self.fpr)):
            for v in vec:
                if not 0 <= v <= 1:
                    raise ValueError(f"{name} value {v} outside [0, 1]")
        if self.present is None:
            object.__setattr__(self, "present", (True,) * len(self.tpr))
        else:
            object.__setattr__(self, "present", tuple(bool(p) for p in self.present))
            if len(self.present) != len(self.tpr):
                raise ValueError("present mask must match the rate vectors")

    @property
    def k(self) -> int:
        return len(self.tpr)


def build_confusion(actual: Sequence, predicted: Sequence, labels: LabelSet) -> ConfusionMatrix:
    if len(actual) != len(predicted):
        raise ValueError(f"length mismatch: {len(actual)} actual vs {len(predicted)} predicted")
    if len(actual) == 0:
        raise ValueError("at least one prediction is required")
    lookup = labels._lookup()
    k = labels.k
    m = [[0] * k for _ in range(k)]
    for a, p in zip(actual, predicted):
        for lab in (a, p):
            if lab not in lookup:
                raise ValueError(f"label {lab!r} is not in the label set {labels.labels}")
        m[lookup[a]][lookup[p]] += 1
    row_counts = tuple(sum(r) for r in m)
    if row_counts != labels.counts:
        # counts follow the scored sequence, not whatever the caller passed
        labels = LabelSet(labels.labels, row_counts, labels.positive)
    return ConfusionMatrix(tuple(map(tuple, m)), labels)


def rates_one_vs_rest(m: ConfusionMatrix, exact: bool = False) -> RateProfile:
    """Per-class rates treating each class in turn as the positive one.

    A class with zero test count gets tpr 0 and is excluded from macro
    averages; a class whose "rest" population is empty gets fpr 0. With
    ``exact=True`` the rates are :class:`fractions.Fraction`.
    """
    counts = m.label_set.counts
    n = m.label_set.size
    cols = m.column_sums()
    div = Fraction if exact else (lambda a, b: a / b)
    zero = Fraction(0) if exact else 0.0
    tpr, fpr = [], []
    for i, c in enumerate(counts):
        tp = m.entries[i][i]
        tpr.append(div(tp, c) if c > 0 else zero)
        rest = n - c
        fpr.append(div(cols[i] - tp, rest) if rest > 0 else zero)
    return RateProfile(tuple(tpr), tuple(fpr), tuple(c > 0 for c in counts))


def binary_rates(m: ConfusionMatrix, exact: bool = False) -> tuple:
    """(TPR, FPR) of the designated positive class of a 2x2 matrix."""
    if m.label_set.k != 2:
        raise ValueError(f"binary rates need K = 2, got K = {m.label_set.k}")
    pos = m.label_set.positive
    neg = 1 - pos
    tp, fn = m.entries[pos][pos], m.entries[pos][neg]
    fp, tn = m.entries[neg][pos], m.entries[neg][neg]
    div = Fraction if exact else (lambda a, b: a / b)
    zero = Fraction(0) if exact else 0.0
    tpr = div(tp, tp + fn) if tp + fn else zero
    fpr = div(fp, fp + tn) if fp + tn else zero
    return tpr, fpr


def macro_rates(p: RateProfile) -> tuple:
    idx = [i for i, ok in enumerate(p.present) if ok]
    if not idx:
        raise ValueError("no class with a positive count to average over")
    n = len(idx)
    return sum(p.tpr[i] for i in idx) / n, sum(p.fpr[i] for i in idx) / n


# -- enumeration ------------------------------------------------------------


@lru_cache(maxsize=None)
def compositions(n: int, k: int) -> tuple:
    """All k-part weak compositions of n, in lexicographic order."""
    if k == 1:
        return ((n,),)
    return tuple((first,) + rest for first in range(n + 1) for rest in compositions(n - first, k - 1))


def _n_compositions(n: int, k: int) -> int:
    return comb(n + k - 1, k - 1)


def count_confusion_matrices(labels: LabelSet) -> int:
    total = prod(_n_compositions(c, labels.k) for c in labels.counts)
    if total > INT64_MAX:
        raise OverflowError(f"{total} confusion matrices exceed the 64-bit index range")
    return total


def composition_rank(parts: Sequence[int]) -> int:
    """Lexicographic rank of a weak composition among those of sum(parts)."""
    k = len(parts)
    rem = sum(parts)
    rank = 0
    for pos in range(k - 1):
        left = k - pos - 1
        for v in range(parts[pos]):
            rank += _n_compositions(rem - v, left)
        rem -= parts[pos]
    return rank


def composition_unrank(rank: int, n: int, k: int) -> tuple:
    parts = []
    rem = n
    for pos in range(k - 1):
        left = k - pos - 1
        v = 0
        while True:
            block = _n_compositions(rem - v, left)
            if rank < block:
                break
            rank -= block
            v += 1
        parts.append(v)
        rem -= v
    parts.append(rem)
    return tuple(parts)


def matrix_index(m: ConfusionMatrix) -> int:
    """Position of ``m`` in :func:`enumerate_confusion_matrices` order."""
    k = m.label_set.k
    idx = 0
    for row, c in zip(m.entries, m.label_set.counts):
        idx = idx * _n_compositions(c, k) + composition_rank(row)
    return idx


def matrix_at(labels: LabelSet, index: int) -> ConfusionMatrix:
    total = count_confusion_matrices(labels)
    if not 0 <= index < total:
        raise IndexError(f"matrix index {index} outside [0, {total})")
    k = labels.k
    rows = []
    for c in reversed(labels.counts):
        size = _n_compositions(c, k)
        index, r = divmod(index, size)
        rows.append(composition_unrank(r, c, k))
    return ConfusionMatrix(tuple(reversed(rows)), labels)


def enumerate_confusion_matrices(
    labels: LabelSet, start: int = 0, stop: int | None = None
) -> Iterator[ConfusionMatrix]:
    """Every K x K matrix whose rows sum to the class counts.

    Rows are weak compositions; matrices come in lexicographic order of their
    rows (first row most significant). ``start``/``stop`` select an index
    range so the stream can be partitioned.
    """
    per_row = [compositions(c, labels.k) for c in labels.counts]
    if start == 0 and stop is None:
        for rows in product(*per_row):
            yield ConfusionMatrix(rows, labels)
        return
    total = count_confusion_matrices(labels)
    stop = total if stop is None else min(stop, total)
    for i in range(start, stop):
        yield matrix_at(labels, i)
