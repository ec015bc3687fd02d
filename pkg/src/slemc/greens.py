"""Closed-form Green's function, its martingale observable, and checks.

The chordal Green's function in the upper half-plane (curve from 0 to
infinity) is G(x+iy) = y^{d-2} sin^beta(theta); in a general domain it is
Upsilon^{d-2} S^beta, conformally covariant with weight 2-d.  Along the
flow, M_t(z) = Upsilon_t^{d-2} S_t^beta is a local martingale, so G is
annihilated by the one-point operator

    L = a(d-2)(x^2-y^2)/(x^2+y^2)^2
        + a (x d_x - y d_y)/(x^2+y^2) + (1/2) d_xx,

which pde_residual_one_point verifies by central finite differences.
"""

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError
from .loewner import MarkedPoint
from .params import SleParams


@dataclass(frozen=True)
class GreensValue:
    upsilon: float
    sine: float
    value: float


def green_halfplane(z: complex, params: SleParams) -> float:
    """G(z) = Im(z)^{d-2} * sin(arg z)^beta for z in the upper half-plane."""
    z = complex(z)
    if z.imag <= 0.0:
        raise DomainError(f"z must have Im > 0, got {z}")
    sine = z.imag / abs(z)
    return z.imag ** (params.d - 2.0) * sine ** params.beta


def green_from_state(mark: MarkedPoint, params: SleParams) -> GreensValue:
    """Martingale observable M_t(z) = Upsilon_t^{d-2} S_t^beta of a mark.

    A swallowed mark carries value 0: once the point is disconnected the
    curve can never reach it, so its contribution to any Green's
    expectation vanishes.
    """
    ups = mark.upsilon
    sine = mark.sine
    if mark.status == "swallowed":
        return GreensValue(upsilon=ups, sine=sine, value=0.0)
    return GreensValue(upsilon=ups, sine=sine,
                       value=ups ** (params.d - 2.0) * sine ** params.beta)


def scaling_check(z: complex, r: float, params: SleParams):
    """Conformal covariance under the dilation f(w) = r*w.

    Returns (lhs, rhs) = (G(z), r^{2-d} G(r z)); they agree to rounding.
    """
    if r <= 0.0:
        raise DomainError("dilation factor must be positive")
    lhs = green_halfplane(z, params)
    rhs = r ** (2.0 - params.d) * green_halfplane(r * complex(z), params)
    return lhs, rhs


def pde_residual_one_point(x: float, y: float, h: float, params: SleParams) -> float:
    """Central finite-difference residual of L G at (x, y), spacing h.

    Decays as O(h^2) since L G = 0 exactly.  The stencil must stay inside
    the half-plane and away from the boundary singularity (|x|/y < 50).
    """
    if y <= 0.0:
        raise DomainError("y must be positive")
    if abs(x) / y >= 50.0:
        raise DomainError("evaluation point too close to the boundary singularity")
    if h <= 0.0 or y - h <= 0.0:
        raise DomainError("stencil leaves the upper half-plane")

    def g(xx, yy):
        return green_halfplane(complex(xx, yy), params)

    g0 = g(x, y)
    gx = (g(x + h, y) - g(x - h, y)) / (2.0 * h)
    gy = (g(x, y + h) - g(x, y - h)) / (2.0 * h)
    gxx = (g(x + h, y) - 2.0 * g0 + g(x - h, y)) / (h * h)

    a = params.a
    d = params.d
    r2 = x * x + y * y
    return (a * (d - 2.0) * (x * x - y * y) / (r2 * r2) * g0
            + a * (x * gx - y * gy) / r2
            + 0.5 * gxx)
