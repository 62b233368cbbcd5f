"""Numpy implementation of the batched simulation kernels.

Used when the compiled extension is unavailable. Results are bit-identical
to ``_ckernel``: same stream keys, same comparison order, same sequential
float accumulation.
"""
import numpy as np

from .seeding import derive_array, uniform_at_array

BACKEND = "python"


def _predict(actual, tpr, fpr, positive, keys):
    """Predicted class index per entry of ``keys`` (actual broadcasts to it)."""
    actual = np.broadcast_to(actual, keys.shape)
    u0 = uniform_at_array(keys, 0)
    k = len(tpr)
    if positive >= 0:
        neg = 1 - positive
        t = float(tpr[positive])
        keep_neg = 1.0 - float(fpr[positive])
        is_pos = actual == positive
        pred = np.where(
            is_pos,
            np.where(u0 <= t, positive, neg),
            np.where(u0 <= keep_neg, neg, positive),
        ).astype(np.int64)
        return pred, 0

    u1 = uniform_at_array(keys, 1)
    pred = actual.astype(np.int64, copy=True)
    miss = ~(u0 <= np.asarray(tpr, dtype=np.float64)[actual])
    degenerate = 0
    for c in range(k):
        mask = miss & (actual == c)
        if not mask.any():
            continue
        others = [o for o in range(k) if o != c]
        s = 0.0
        for o in others:
            s += float(fpr[o])
        if not s > 0:
            degenerate += int(mask.sum())
            pick = np.minimum((u1[mask] * len(others)).astype(np.int64), len(others) - 1)
            pred[mask] = np.asarray(others, dtype=np.int64)[pick]
            continue
        chosen = np.full(keys.shape, -1, dtype=np.int64)
        q = 0.0
        for o in others:
            q += float(fpr[o]) / s
            sel = mask & (chosen < 0) & (u1 <= q)
            chosen[sel] = o
        chosen[mask & (chosen < 0)] = others[-1]
        pred[mask] = chosen[mask]
    return pred, degenerate


def simulate_labels(actual, tpr, fpr, positive, rep_key):
    actual = np.ascontiguousarray(actual, dtype=np.int64)
    idx = np.arange(actual.shape[0], dtype=np.uint64)
    keys = derive_array(np.full(actual.shape[0], rep_key, dtype=np.uint64), idx)
    return _predict(actual, tpr, fpr, positive, keys)


def simulate_cell(actual, tpr, fpr, positive, cell_key, reps, durations, weights):
    actual = np.ascontiguousarray(actual, dtype=np.int64)
    durations = np.ascontiguousarray(durations, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    n = actual.shape[0]
    k = len(tpr)
    rep_keys = derive_array(np.full(reps, cell_key, dtype=np.uint64), np.arange(reps, dtype=np.uint64))
    keys = derive_array(
        np.repeat(rep_keys[:, None], n, axis=1), np.broadcast_to(np.arange(n, dtype=np.uint64), (reps, n))
    )
    pred, degenerate = _predict(actual, tpr, fpr, positive, keys)

    flat = (np.arange(reps, dtype=np.int64)[:, None] * k + actual[None, :]) * k + pred
    conf = np.bincount(flat.ravel(), minlength=reps * k * k).reshape(reps, k, k)

    ratio = weights[pred] / durations[None, :]
    job = np.broadcast_to(np.arange(n), (reps, n))
    order = np.lexsort((job, -ratio), axis=-1)
    completion = np.cumsum(durations[order], axis=1)
    contrib = weights[actual][order] * completion
    totals = np.cumsum(contrib, axis=1)[:, -1]
    return conf.astype(np.int64), totals, degenerate
