"""Kernel backend selection.

Two interchangeable kernel implementations exist: numba-compiled loops
(:mod:`gacrypt._numba_kernels`) and a pure numpy/Python fallback
(:mod:`gacrypt._numpy_kernels`).  The active one is chosen at import time
from the ``GACRYPT_BACKEND`` environment variable (``numba`` or ``numpy``);
unset, numba is used when importable.  ``set_backend`` switches at runtime,
which the benchmark command uses to compare both.

All entry points take int64 residue arrays; moduli up to 2**61 are supported
by the machine-word kernels.  Wider moduli are routed to the exact fallback
regardless of the active backend.
"""

from __future__ import annotations

import os

import numpy as np

from . import _numpy_kernels

MACHINE_WORD_Q_LIMIT = 1 << 61

_FALLBACK = _numpy_kernels
_active_name = None
_active = None


def _load(name):
    if name == "numba":
        from . import _numba_kernels

        return _numba_kernels
    if name == "numpy":
        return _numpy_kernels
    raise ValueError(f"unknown backend {name!r} (expected 'numba' or 'numpy')")


def set_backend(name):
    """Select the kernel implementation by name ('numba' or 'numpy')."""
    global _active_name, _active
    _active = _load(name)
    _active_name = name


def backend_name():
    return _active_name


def available_backends():
    names = ["numpy"]
    try:
        import numba  # noqa: F401

        names.insert(0, "numba")
    except ImportError:
        pass
    return names


def set_num_threads(n):
    """Propagate a thread count to the numba parallel kernels (no-op on numpy)."""
    if _active_name == "numba":
        import numba

        numba.set_num_threads(max(1, int(n)))


_env = os.environ.get("GACRYPT_BACKEND", "").strip().lower()
if _env:
    set_backend(_env)
else:
    try:
        set_backend("numba")
    except ImportError:
        set_backend("numpy")


def _impl_for(q):
    if q >= MACHINE_WORD_Q_LIMIT:
        return _FALLBACK
    return _active


def _as3d(a):
    a = np.ascontiguousarray(a, dtype=np.int64)
    return a.reshape((1,) + a.shape) if a.ndim == 2 else a


def matmul(a, b, q):
    """Batched matrix product mod q; a leading batch axis of 1 broadcasts."""
    return _impl_for(q).matmul_batch(_as3d(a), _as3d(b), q)


def inverses(a, q):
    """Batched matrix inverses mod q.  Returns (inverses, ok-flags)."""
    return _impl_for(q).inv_batch(_as3d(a), q)


def ranks(a, q):
    return _impl_for(q).rank_batch(_as3d(a), q)


def full_rank_flags(a, q):
    """Batched invertibility test (uint8 flags); cheaper than full rank."""
    return _impl_for(q).fullrank_batch(_as3d(a), q)


def dets(a, q):
    return _impl_for(q).det_batch(_as3d(a), q)


def rref(a, q):
    """Reduced row echelon form of a single matrix mod q.  Returns (rref, rank)."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    return _impl_for(q).rref_single(a, q)


def glat_apply(m1, m2, m3, t, q):
    """Batched change of basis on 3-tensors: one matrix per mode per item."""
    t = np.ascontiguousarray(t, dtype=np.int64)
    if t.ndim == 3:
        t = t.reshape((1,) + t.shape)
    return _impl_for(q).glat_batch(_as3d(m1), _as3d(m2), _as3d(m3), t, q)


def warmup():
    """Trigger JIT compilation of every kernel on a tiny problem."""
    q = 5
    a = np.array([[[1, 2], [3, 4]]], dtype=np.int64)
    t = np.arange(8, dtype=np.int64).reshape(1, 2, 2, 2) % q
    matmul(a, a, q)
    inverses(a, q)
    ranks(a, q)
    full_rank_flags(a, q)
    dets(a, q)
    rref(a[0], q)
    glat_apply(a, a, a, t, q)
    qm = (1 << 61) - 1
    b = np.array([[[qm - 2, 7], [1, qm - 1]]], dtype=np.int64)
    tm = t.astype(np.int64)
    matmul(b, b, qm)
    inverses(b, qm)
    glat_apply(b, b, b, tm, qm)
