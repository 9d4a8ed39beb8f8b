"""Backend selection for the numeric kernels.

Set ``DECAYRANK_DISABLE_NUMBA=1`` to force the vectorized numpy kernels even
when numba is importable.
"""
import os

_FLAG = "DECAYRANK_DISABLE_NUMBA"


def _truthy(value: str) -> bool:
    return value.strip().lower() not in ("", "0", "false", "no", "off")


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def use_numba() -> bool:
    if _truthy(os.environ.get(_FLAG, "")):
        return False
    return numba_available()
