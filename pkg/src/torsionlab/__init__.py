"""torsionlab: higher Reidemeister torsion of chain-complex families,
characteristic-class corrections, tube-type functions, and generating-function
fronts over sampled base manifolds."""

__version__ = "0.1.0"

from . import basegrid, chainkit, charclass, famtor, genfront, tubefun  # noqa: F401
from .chainkit import BasedComplex, UnitTag, fr_torsion, is_acyclic  # noqa: F401
from .famtor import ChainFamily, TorsionResult, circle_bundle_family, torsion_form  # noqa: F401
