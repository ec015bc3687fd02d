"""Monte Carlo laboratory for SLE conformal-radius observables.

Chordal and two-sided radial SLE in the upper half-plane, simulated with
an adaptive slit-map discretization of the Loewner equation (half-plane
capacity growing at rate a = 2/kappa, so the driving function is a
standard Brownian motion).  Note this time scale is kappa-dependent and
differs from the rate-2 capacity convention used elsewhere.
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .params import SleParams, make_params, invariant_density

__all__ = ["SleParams", "make_params", "invariant_density", "backend_name",
           "__version__"]
