"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise (or when the
environment variable ``SIXV_PURE=1`` is set) the numpy/pure-Python fallback
is used. ``set_backend`` switches at runtime, mainly for tests and the
benchmark.
"""

import os

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_state = {"name": None}


def available():
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "cython")
    return names


def set_backend(name):
    if name == "cython" and _compiled is None:
        raise RuntimeError("compiled kernels are not available")
    if name not in ("cython", "python"):
        raise ValueError(f"unknown backend {name!r}")
    _state["name"] = name


def backend():
    return _state["name"]


set_backend("python" if _compiled is None or os.environ.get("SIXV_PURE") == "1"
            else "cython")


def sweep_faces(h, nbr, wdiag, order, u, ptable, classes=None):
    """Update faces in ``order`` in place.

    When ``classes`` (a list of non-interacting face groups whose
    concatenation is ``order``) is given, the python backend vectorises over
    each group; the result is the same as the sequential update.
    """
    if _state["name"] == "cython":
        _compiled.sweep(h, nbr, wdiag, order, u, ptable)
    elif classes is not None:
        for faces in classes:
            _fallback.sweep_class(h, nbr, wdiag, faces, u, ptable)
    else:
        _fallback.sweep(h, nbr, wdiag, order, u, ptable)


def has_winding_cycle(mask, eu, ev, ew, n):
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if _state["name"] == "cython":
        return bool(_compiled.has_winding_cycle(mask, eu, ev, ew, n))
    return _fallback.has_winding_cycle(mask, eu, ev, ew, n)
