"""Numerical laboratory for orbital counting in discrete subgroups of SL(d, R).

Enumerate group elements of Schottky-type representations, compute norm,
Cartan, Jordan and Iwasawa data, and estimate exponential growth rates by
three independent routes: orbital counting fits, primitive spectral
counting, and the pressure equation of a symbolic roof function.
"""

__version__ = "0.1.0"

from . import cocycles, counting, groups, linalg, reps, thermo  # noqa: F401
from .errors import OrbitCountError  # noqa: F401
