"""Hot loops behind the walk simulator and the enumeration oracle.

The numba kernels are used when numba is importable, unless the environment
variable ``DECAYRANK_DISABLE_NUMBA`` is set, in which case the vectorized
numpy kernels are used instead.
"""
from .._accel import use_numba

if use_numba():
    from .numba_impl import enumerate_support, simulate_walk, weighted_central_sums

    BACKEND = "numba"
else:
    from .numpy_impl import enumerate_support, simulate_walk, weighted_central_sums

    BACKEND = "numpy"

__all__ = ["BACKEND", "enumerate_support", "simulate_walk", "weighted_central_sums"]
