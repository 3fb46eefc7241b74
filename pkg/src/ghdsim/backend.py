"""Selection of the numeric backend for the hot render kernels.

Two interchangeable kernel implementations exist: a numba @njit per-pixel
loop and a vectorized pure-numpy one. The active backend is chosen by the
GHDSIM_BACKEND environment variable:

    GHDSIM_BACKEND=numba   force numba (error if numba is unavailable)
    GHDSIM_BACKEND=numpy   force the pure-numpy fallback
    GHDSIM_BACKEND=auto    numba if importable, else numpy (default)

Both backends consume identical precomputed sample arrays and perform the
same floating-point operations per ray, so they produce identical images.
"""

import os

_VALID = ("auto", "numba", "numpy")

_override: str | None = None


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def set_backend(name: str | None) -> None:
    """Override the backend for this process (None restores the env choice)."""
    if name is not None and name not in _VALID:
        raise ValueError(f"unknown backend {name!r}, expected one of {_VALID}")
    global _override
    _override = name


def active_backend() -> str:
    """Resolve the backend actually used for the next kernel call."""
    choice = _override or os.environ.get("GHDSIM_BACKEND", "auto")
    if choice not in _VALID:
        raise ValueError(
            f"GHDSIM_BACKEND={choice!r} is not valid, expected one of {_VALID}"
        )
    if choice == "auto":
        return "numba" if _numba_available() else "numpy"
    if choice == "numba" and not _numba_available():
        raise RuntimeError("GHDSIM_BACKEND=numba but numba is not importable")
    return choice
