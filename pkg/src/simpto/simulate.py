"""Simulated classifier predictions at controlled TPR/FPR levels.

These scalar routines are the reference behaviour. The grid runner uses the
batched kernels in :mod:`simpto.kernels`, which must reproduce them draw for
draw.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from .metrics import LabelSet, RateProfile
from .seeding import TAG_SIMULATION, SeedSpec

Draw = Callable[[], float]


@dataclass(frozen=True)
class SimulatedPrediction:
    actual: Hashable
    predicted: Hashable


@dataclass
class Diagnostics:
    """Counts draws that hit the all-zero-FPR fallback of the multiclass rule."""

    degenerate: int = 0


def _check_rate(name: str, value: float) -> None:
    if not 0 <= value <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def simulate_binary(
    actual: Hashable,
    tpr: float,
    fpr: float,
    draw: Draw,
    positive: Hashable = "positive",
    negative: Hashable = "negative",
) -> Hashable:
    _check_rate("tpr", tpr)
    _check_rate("fpr", fpr)
    r = draw()
    if actual == positive:
        return positive if r <= tpr else negative
    if actual == negative:
        return negative if r <= 1.0 - fpr else positive
    raise ValueError(f"actual class {actual!r} is neither {positive!r} nor {negative!r}")


def simulate_multiclass(
    actual: Hashable,
    labels: LabelSet | Sequence,
    profile: RateProfile,
    draw: Draw,
    diagnostics: Diagnostics | None = None,
) -> Hashable:
    """Predict ``actual`` with probability tpr[actual]; otherwise pick another
    class with probability proportional to its FPR.

    Two uniforms are consumed per call. Other classes are scanned in label
    order. If every other class has FPR 0 the wrong class is chosen uniformly.
    """
    names = labels.labels if isinstance(labels, LabelSet) else tuple(labels)
    if not names:
        raise ValueError("empty label set")
    if len(profile.tpr) != len(names):
        raise ValueError(f"profile has {len(profile.tpr)} classes, label set has {len(names)}")
    for i in range(len(names)):
        _check_rate("tpr", profile.tpr[i])
        _check_rate("fpr", profile.fpr[i])
    try:
        a = names.index(actual)
    except ValueError:
        raise ValueError(f"label {actual!r} is not in the label set {names}") from None

    r = draw()
    r2 = draw()
    if r <= profile.tpr[a]:
        return actual
    others = [i for i in range(len(names)) if i != a]
    if not others:
        return actual
    s = 0.0
    for o in others:
        s += profile.fpr[o]
    if not s > 0:
        if diagnostics is not None:
            diagnostics.degenerate += 1
        pick = min(int(r2 * len(others)), len(others) - 1)
        return names[others[pick]]
    q = 0.0
    for o in others:
        q += profile.fpr[o] / s
        if r2 <= q:
            return names[o]
    return names[others[-1]]


def branch_probabilities_binary(actual, tpr, fpr, positive="positive", negative="negative") -> dict:
    """Exact output law of :func:`simulate_binary` (pass Fractions for exact arithmetic)."""
    if actual == positive:
        return {positive: tpr, negative: 1 - tpr}
    return {negative: 1 - fpr, positive: fpr}


def branch_probabilities_multiclass(actual, labels: LabelSet | Sequence, profile: RateProfile) -> dict:
    """Exact output law of :func:`simulate_multiclass`, ignoring float rounding."""
    names = labels.labels if isinstance(labels, LabelSet) else tuple(labels)
    a = names.index(actual)
    out = {lab: 0 * profile.tpr[a] for lab in names}
    out[actual] = profile.tpr[a]
    miss = 1 - profile.tpr[a]
    others = [i for i in range(len(names)) if i != a]
    s = sum(profile.fpr[o] for o in others)
    for o in others:
        if s > 0:
            share = profile.fpr[o] / s
        else:
            share = Fraction(1, len(others)) if isinstance(miss, Fraction) else 1 / len(others)
        out[names[o]] += miss * share
    return out


def simulate_dataset(
    actuals: Sequence,
    labels: LabelSet,
    profile: RateProfile,
    seed: SeedSpec,
    cell: int,
    rep: int,
    diagnostics: Diagnostics | None = None,
) -> list[SimulatedPrediction]:
    """Simulate one prediction per actual label.

    Instance ``i`` draws from the stream keyed by (seed, cell, rep, i), so the
    output depends only on those indices.
    """
    if profile.k != labels.k:
        raise ValueError(f"profile has {profile.k} classes, label set has {labels.k}")
    out = []
    if labels.k == 2:
        pos = labels.positive
        positive, negative = labels.labels[pos], labels.labels[1 - pos]
        tpr, fpr = profile.tpr[pos], profile.fpr[pos]
    for i, a in enumerate(actuals):
        draw = seed.stream(TAG_SIMULATION, cell, rep, i)
        if labels.k == 2:
            p = simulate_binary(a, tpr, fpr, draw, positive, negative)
        else:
            p = simulate_multiclass(a, labels, profile, draw, diagnostics)
        out.append(SimulatedPrediction(a, p))
    return out
