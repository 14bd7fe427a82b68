"""Select the compiled kernel when importable, else the pure-Python one."""

import os

BACKEND = "python"

if not os.environ.get("SBCLIFT_PURE_PYTHON"):
    try:
        from ._kernel import SearchKernel, violation_matrix  # noqa: F401

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._pykernel import SearchKernel, violation_matrix  # noqa: F401

from . import _pykernel as pure  # noqa: E402,F401  reference backend, always importable

__all__ = ["BACKEND", "SearchKernel", "violation_matrix", "pure"]
