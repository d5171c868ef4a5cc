"""Kernel backend selection.

Two implementations of the hot kernels exist:

* ``dsmopt.numlin._numba_kernels`` -- scalar loops compiled with
  ``numba.njit`` (default when numba imports cleanly),
* ``dsmopt.numlin._numpy_kernels`` -- the same algorithms written as
  vectorised numpy batch operations.

``DSMOPT_BACKEND`` selects between them: ``numba``, ``numpy`` or ``auto``
(the default).  Both backends run the identical rotation/pivot schedule, so
they agree to ~1e-12 relative; each is bit-deterministic for fixed inputs.

``DSMOPT_THREADS`` is a worker-count hint used by the sweep driver; it never
changes numerical results (per-tone outputs are written to per-tone slots
and reduced in fixed index order).
"""

import os
import warnings

_NUMBA_OK = None


def numba_available():
    """True when numba imports and can compile (checked once per process)."""
    global _NUMBA_OK
    if _NUMBA_OK is None:
        try:
            import numba  # noqa: F401

            _NUMBA_OK = True
        except Exception as exc:  # pragma: no cover - exercised only without numba
            warnings.warn(f"numba unavailable ({exc}); falling back to numpy kernels")
            _NUMBA_OK = False
    return _NUMBA_OK


def backend_name():
    """Resolve the active backend name from DSMOPT_BACKEND."""
    choice = os.environ.get("DSMOPT_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if numba_available() else "numpy"
    if choice == "numba":
        if not numba_available():
            raise RuntimeError("DSMOPT_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"DSMOPT_BACKEND must be auto|numba|numpy, got {choice!r}")


def get_kernels():
    """Return the kernel module for the currently selected backend."""
    if backend_name() == "numba":
        from dsmopt.numlin import _numba_kernels as k
    else:
        from dsmopt.numlin import _numpy_kernels as k
    return k


def thread_hint(default=1):
    """Worker-count hint from DSMOPT_THREADS (>=1); `default` when unset."""
    raw = os.environ.get("DSMOPT_THREADS", "").strip()
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        return default
    return max(1, n)
