"""Stencil kernel backend selection.

The compiled extension is preferred; the numpy implementation is the
fallback.  Set COEXMIN_BACKEND=python (or =cython) to force a choice,
e.g. for the backend-comparison benchmark.
"""

import os

from . import _pystencil

_forced = os.environ.get("COEXMIN_BACKEND", "").strip().lower()

if _forced == "python":
    _impl = _pystencil
    BACKEND = "python"
else:
    try:
        from . import _stencil as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise ImportError(
                "COEXMIN_BACKEND=cython requested but the compiled extension "
                "is not available; reinstall with a C compiler present"
            ) from None
        _impl = _pystencil
        BACKEND = "python"

laplacian = _impl.laplacian
face_energy_density = _impl.face_energy_density
logistic_energy_arrays = _impl.logistic_energy_arrays
logistic_grad_arrays = _impl.logistic_grad_arrays

__all__ = [
    "BACKEND",
    "laplacian",
    "face_energy_density",
    "logistic_energy_arrays",
    "logistic_grad_arrays",
]
