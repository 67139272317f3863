"""Backend selection for the sphere kernels.

``SPINMUR_BACKEND=numpy`` (or ``SPINMUR_NO_NUMBA=1``) forces the pure
numpy/Python path; otherwise the numba-compiled loops are used when numba
imports. Both backends are importable side by side for benchmarking.
"""
from __future__ import annotations

import math
import os
import types

import numpy as np

from . import _loops
from .entropy import LOG2E, PROB_FLOOR


def _want_numba() -> bool:
    if os.environ.get("SPINMUR_NO_NUMBA", "").strip() not in ("", "0"):
        return False
    return os.environ.get("SPINMUR_BACKEND", "numba").strip().lower() != "numpy"


def error_batch_numpy(tt, tv, mt, mv, pts):
    """Vectorized error function for states ``pts`` of shape (N, 3)."""
    dp = pts @ tv.T
    dq = pts @ mv.T
    total = np.zeros(pts.shape[0])
    bad = np.zeros(pts.shape[0], dtype=bool)
    for p, q in ((tt + dp, mt + dq), ((1.0 - tt) - dp, (1.0 - mt) - dq)):
        p = np.minimum(p, 1.0)
        live = p >= PROB_FLOOR
        bad |= np.any(live & (q < PROB_FLOOR), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(live, p * (np.log(np.where(live, p, 1.0)) - np.log(np.where(live, np.maximum(q, PROB_FLOOR), 1.0))), 0.0)
        total += terms.sum(axis=1)
    out = np.maximum(total, 0.0) * LOG2E
    out[bad] = np.inf
    return out


def sphere_grid_numpy(n_theta, n_phi):
    th = np.pi * (np.arange(n_theta) + 0.5) / n_theta
    ph = 2.0 * np.pi * np.arange(n_phi) / n_phi
    st, ct = np.sin(th)[:, None], np.cos(th)[:, None]
    body = np.stack([st * np.cos(ph), st * np.sin(ph), np.broadcast_to(ct, (n_theta, n_phi))], axis=-1).reshape(-1, 3)
    return np.vstack([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], body])


def _make_numba():
    try:
        import numba
    except ImportError:  # pragma: no cover - exercised only without numba
        return None
    jit = numba.njit(cache=True, nogil=True)
    error_at = jit(_loops.error_at)
    grad_at = jit(_loops.grad_at)
    # rebind module globals so compiled callers see compiled callees
    ns = dict(_loops.__dict__)
    ns.update(error_at=error_at, grad_at=grad_at)
    compiled = {}
    for name in ("sphere_grid", "error_batch_loop", "pick_starts", "ascend", "sphere_sup_loop"):
        fn = types.FunctionType(getattr(_loops, name).__code__, ns, name)
        compiled[name] = jit(fn)
        ns[name] = compiled[name]
    return types.SimpleNamespace(
        name="numba",
        sphere_grid=compiled["sphere_grid"],
        error_batch=compiled["error_batch_loop"],
        sphere_sup=compiled["sphere_sup_loop"],
        error_at=error_at,
    )


numpy_backend = types.SimpleNamespace(
    name="numpy",
    sphere_grid=sphere_grid_numpy,
    error_batch=error_batch_numpy,
    sphere_sup=_loops.sphere_sup_loop,
    error_at=_loops.error_at,
)

_lazy: dict = {}


def __getattr__(name):
    # numba is imported and the kernels compiled (or loaded from cache) on first use
    if name == "numba_backend":
        if name not in _lazy:
            _lazy[name] = _make_numba()
        return _lazy[name]
    if name == "backend":
        if name not in _lazy:
            nb = __getattr__("numba_backend") if _want_numba() else None
            _lazy[name] = nb if nb is not None else numpy_backend
        return _lazy[name]
    raise AttributeError(name)


def get_backend(name: str | None = None):
    if name is None:
        return __getattr__("backend")
    if name == "numba":
        nb = __getattr__("numba_backend")
        if nb is None:
            raise RuntimeError("numba is not available")
        return nb
    if name == "numpy":
        return numpy_backend
    raise ValueError(f"unknown backend {name!r}")


_GRIDS: dict = {}


def sphere_sup(tt, tv, mt, mv, n_theta=32, n_phi=64, seeds=None, max_starts=6, max_iter=500, gtol=1e-10, be=None):
    """Maximum of the error function over the unit sphere.

    Grid scan, then gradient ascent from the best separated grid points and
    from ``seeds``. Returns ``(value, argmax, iterations, last_gain)``.
    """
    be = be or get_backend()
    tt, tv, mt, mv = (np.ascontiguousarray(a, dtype=float) for a in (tt, tv, mt, mv))
    key = (be.name, n_theta, n_phi)
    pts = _GRIDS.get(key)
    if pts is None:
        pts = _GRIDS[key] = be.sphere_grid(n_theta, n_phi)
    vals = be.error_batch(tt, tv, mt, mv, pts)
    if np.isinf(vals).any():
        i = int(np.argmax(vals))
        return math.inf, pts[i].copy(), 0, math.inf
    if seeds is None:
        seeds = np.zeros((0, 3))
    seeds = np.ascontiguousarray(seeds, dtype=float).reshape(-1, 3)
    min_angle = 2.0 * math.pi / max(n_theta, n_phi / 2)
    f, x, it, gain = be.sphere_sup(tt, tv, mt, mv, pts, vals, seeds, max_starts, min_angle, max_iter, gtol)
    return float(f), np.asarray(x), int(it), float(gain)
