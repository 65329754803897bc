"""Hot loops: IPD match play and simple-path sums.

The compiled extension is used when it imports; otherwise the pure-Python
twin is used. Set ``GENAUTO_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels
from ._pykernels import ALLC, ALLD, PROB, TFT, VINDICTIVE

BACKEND = "python"
run_matches = _pykernels.run_matches
simple_path_sums = _pykernels.simple_path_sums

if os.environ.get("GENAUTO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:
        _ckernels = None
    else:
        BACKEND = "cython"
        run_matches = _ckernels.run_matches
        simple_path_sums = _ckernels.simple_path_sums
else:
    _ckernels = None

__all__ = [
    "BACKEND",
    "run_matches",
    "simple_path_sums",
    "TFT",
    "VINDICTIVE",
    "ALLC",
    "ALLD",
    "PROB",
]
