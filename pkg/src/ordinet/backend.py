"""Numerics backend selection.

The hot inner kernels (head transforms and loss fusions evaluated once per
training step) exist in two variants: explicit loops compiled with numba,
and vectorized numpy. The active variant is chosen once at import time from
the ORDINET_BACKEND environment variable:

    ORDINET_BACKEND=auto    use numba when importable, else numpy (default)
    ORDINET_BACKEND=numba   require numba, fail if missing
    ORDINET_BACKEND=numpy   force the pure-numpy path

`kernels.set_backend` can flip the choice at runtime, which the backend
benchmark uses to time both paths in one process.
"""

import os

_CHOICES = ("auto", "numba", "numpy")

_requested = os.environ.get("ORDINET_BACKEND", "auto").strip().lower()
if _requested not in _CHOICES:
    raise ValueError(
        f"ORDINET_BACKEND must be one of {_CHOICES}, got {_requested!r}"
    )

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

if _requested == "numba" and not HAVE_NUMBA:
    raise ImportError("ORDINET_BACKEND=numba but numba is not importable")

USE_NUMBA = HAVE_NUMBA if _requested == "auto" else _requested == "numba"


def requested_backend() -> str:
    return _requested
