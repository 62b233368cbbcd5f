"""Kernel backend selection.

The compiled extension is used when importable; set ``SIMPTO_PURE_PYTHON=1``
to force the numpy fallback. Both backends expose:

``simulate_labels(actual, tpr, fpr, positive, rep_key) -> (pred, degenerate)``
    One simulated label per actual class index; instance ``i`` reads the
    stream ``derive(rep_key, i)``. ``positive >= 0`` selects the binary rule
    with that class as positive, ``-1`` the multiclass rule.

``simulate_cell(actual, tpr, fpr, positive, cell_key, reps, durations, weights)``
    Repeats ``simulate_labels`` with ``rep_key = derive(cell_key, rep)`` and
    returns per-repetition confusion counts, the TWCT of the WSPT order built
    from predicted weights (evaluated with actual weights), and the number of
    degenerate multiclass draws.
"""
import os

from . import _pykernel

BACKENDS = {"python": _pykernel}

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None
else:
    BACKENDS["cython"] = _ckernel

if _ckernel is not None and os.environ.get("SIMPTO_PURE_PYTHON", "") in ("", "0"):
    _active = _ckernel
else:
    _active = _pykernel

BACKEND = _active.BACKEND
simulate_labels = _active.simulate_labels
simulate_cell = _active.simulate_cell


def get_backend(name: str | None = None):
    """Kernel module by name, or the active one."""
    if name is None:
        return _active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
