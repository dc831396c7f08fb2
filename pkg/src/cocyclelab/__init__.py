"""GL(2, R) cocycles over hyperbolic toral automorphisms: periodic data, Livsic solvers,
invariant structures, reductions to model cocycles and cohomology tests."""

from . import cocycle, cohomology, fields, livsic, structures, torus
from .cocycle import Cocycle
from .torus import LatticeAutomorphism

__version__ = "0.1.0"

__all__ = ["cocycle", "cohomology", "fields", "livsic", "structures", "torus", "Cocycle", "LatticeAutomorphism"]
