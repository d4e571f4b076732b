"""Numeric kernels for classifier training and scoring.

The compiled extension (``_speedups``, Cython) is used when it was built;
otherwise the pure-Python implementation takes over. Both run the exact
same arithmetic in the same order. Set PROTOREL_PURE=1 to force the
fallback. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

if os.environ.get("PROTOREL_PURE"):
    from . import pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "cython"
    except ImportError:
        from . import pure as _impl

        BACKEND = "pure"

sgd_epochs = _impl.sgd_epochs
score_rows = _impl.score_rows
