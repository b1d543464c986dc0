"""Hot numeric kernels.

Every kernel exists twice: an explicit loop compiled with numba and a
vectorised numpy twin. The loop versions are used when numba imports and
``HLPS_DISABLE_NUMBA`` is unset (or ``0``/``false``); otherwise the numpy
versions are bound. Both variants are always reachable through
``IMPLEMENTATIONS`` so tests and benchmarks can compare them.

Inputs are float64 arrays; callers are responsible for the conversion.
"""
from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("HLPS_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def _njit(fn):
    if not HAVE_NUMBA:  # pragma: no cover
        return fn
    return numba.njit(cache=False, nogil=True)(fn)


# --- coordinate sums ---------------------------------------------------


def _coord_sum_loop(points):
    sx = 0.0
    sy = 0.0
    for i in range(points.shape[0]):
        sx += points[i, 0]
        sy += points[i, 1]
    return sx, sy


def _coord_sum_numpy(points):
    # per-column reductions; sum(axis=0) on an (n, 2) array is ~10x slower
    return float(points[:, 0].sum()), float(points[:, 1].sum())


# --- disc membership ---------------------------------------------------


def _within_radius_loop(xs, ys, cx, cy, radius):
    r2 = radius * radius
    out = np.empty(xs.shape[0], dtype=np.bool_)
    for i in range(xs.shape[0]):
        dx = xs[i] - cx
        dy = ys[i] - cy
        out[i] = dx * dx + dy * dy <= r2
    return out


def _within_radius_numpy(xs, ys, cx, cy, radius):
    dx = xs - cx
    dy = ys - cy
    return dx * dx + dy * dy <= radius * radius


# --- Monte Carlo lens counting -----------------------------------------


def _count_in_both_loop(xs, ys, ax, ay, ar, bx, by, br):
    ar2 = ar * ar
    br2 = br * br
    n = 0
    for i in range(xs.shape[0]):
        dax = xs[i] - ax
        day = ys[i] - ay
        if dax * dax + day * day > ar2:
            continue
        dbx = xs[i] - bx
        dby = ys[i] - by
        if dbx * dbx + dby * dby <= br2:
            n += 1
    return n


def _count_in_both_numpy(xs, ys, ax, ay, ar, bx, by, br):
    in_a = (xs - ax) ** 2 + (ys - ay) ** 2 <= ar * ar
    in_b = (xs - bx) ** 2 + (ys - by) ** 2 <= br * br
    return int(np.count_nonzero(in_a & in_b))


IMPLEMENTATIONS = {
    "coord_sum": {"numpy": _coord_sum_numpy},
    "within_radius": {"numpy": _within_radius_numpy},
    "count_in_both": {"numpy": _count_in_both_numpy},
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["coord_sum"]["numba"] = _njit(_coord_sum_loop)
    IMPLEMENTATIONS["within_radius"]["numba"] = _njit(_within_radius_loop)
    IMPLEMENTATIONS["count_in_both"]["numba"] = _njit(_count_in_both_loop)

BACKEND = "numba" if USE_NUMBA else "numpy"

coord_sum = IMPLEMENTATIONS["coord_sum"][BACKEND]
within_radius = IMPLEMENTATIONS["within_radius"][BACKEND]
count_in_both = IMPLEMENTATIONS["count_in_both"][BACKEND]


def warmup() -> None:
    """Trigger JIT compilation of the active kernels."""
    pts = np.zeros((2, 2))
    xs = np.zeros(2)
    coord_sum(pts)
    within_radius(xs, xs, 0.0, 0.0, 1.0)
    count_in_both(xs, xs, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0)
