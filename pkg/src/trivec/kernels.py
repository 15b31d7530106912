"""Selects the compiled kernels when available, numpy fallback otherwise.

Import-time selection keeps the rest of the package backend-agnostic; the
active lane is reported by :func:`backend_name`. ``benchmarks/bench_kernels.py``
compares the two lanes when both are present.
"""

from __future__ import annotations

try:
    from ._kernels import BACKEND, actuator_sweep, rigid_substeps

    COMPILED = True
except ImportError:
    from ._kernels_py import BACKEND, actuator_sweep, rigid_substeps

    COMPILED = False

__all__ = ["COMPILED", "actuator_sweep", "rigid_substeps", "backend_name"]


def backend_name() -> str:
    """``"compiled"`` when the Cython extension is active, ``"python"`` otherwise."""
    return BACKEND
