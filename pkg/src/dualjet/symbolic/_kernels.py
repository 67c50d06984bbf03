"""Kernel backend selection.

The compiled extension is used when it imports; setting the environment
variable ``DUALJET_PURE_PYTHON=1`` forces the pure-Python kernels.
"""

import os

if os.environ.get("DUALJET_PURE_PYTHON", "").strip() not in ("", "0"):
    from ._pykernels import *  # noqa: F401,F403
    from ._pykernels import BACKEND
else:
    try:
        from ._ckernels import *  # noqa: F401,F403
        from ._ckernels import BACKEND
    except ImportError:
        from ._pykernels import *  # noqa: F401,F403
        from ._pykernels import BACKEND

__all__ = [
    "BACKEND",
    "mono_mul",
    "poly_mul",
    "poly_addmul",
    "poly_addscaled",
    "poly_scale",
    "poly_diff",
    "poly_atoms",
    "poly_eval",
    "poly_eval_points",
]
