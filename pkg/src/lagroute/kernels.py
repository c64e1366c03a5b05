"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``LAGROUTE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("LAGROUTE_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

python_route_block = _pykernels.route_block
compiled_route_block = _compiled.route_block if _compiled is not None else None

if _compiled is not None:
    route_block = _compiled.route_block
    BACKEND = "cython"
else:
    route_block = _pykernels.route_block
    BACKEND = "python"
