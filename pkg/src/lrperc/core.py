"""Backend selection for the hot kernels.

The compiled extension ``lrperc._core`` is used when importable; otherwise,
or when the environment variable ``LRPERC_PURE`` is set to a non-empty value
other than ``0``, the pure-Python twin ``lrperc._pycore`` is used. Both give
identical results.
"""
from __future__ import annotations

import os

from . import _pycore

pure = _pycore

if os.environ.get("LRPERC_PURE", "0") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _core as compiled
    except ImportError:  # extension not built
        compiled = None

backend = compiled if compiled is not None else pure
BACKEND_NAME = "compiled" if compiled is not None else "python"

sample_edges_skip = backend.sample_edges_skip
sample_edges_pairwise = backend.sample_edges_pairwise
build_csr = backend.build_csr
bfs = backend.bfs
eccentricities = backend.eccentricities
diameter_exact = backend.diameter_exact
degrees = backend.degrees
connected_sets = backend.connected_sets
replicate_bfs = backend.replicate_bfs
replicate_diameter = backend.replicate_diameter
