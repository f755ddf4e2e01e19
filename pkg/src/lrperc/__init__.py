"""Simulation toolkit for long-range percolation on Z^d with connection
probabilities decaying like ``beta / |u - v|^(2d)``.

Submodules: :mod:`kernel`, :mod:`sampler`, :mod:`graph`, :mod:`estimators`,
:mod:`structure`, :mod:`oracle`, :mod:`acceptance` and :mod:`cli`.
"""
from .core import BACKEND_NAME
from .kernel import Family, KernelSpec
from .rng import StreamKey, seed_derivation
from .sampler import BoxSpec, Configuration

__version__ = "0.1.0"

__all__ = ["BACKEND_NAME", "Family", "KernelSpec", "StreamKey", "seed_derivation", "BoxSpec",
           "Configuration", "__version__"]
