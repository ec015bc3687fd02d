"""Discretized chordal Loewner flow.

The flow dg_t/dt = a / (g_t - U_t) is advanced by exact vertical-slit
updates for piecewise-constant driving: in tip-centered coordinates
Z = g_t(z) - U_t a step of length dt with driving jump dU is

    Z' = sqrt((Z - dU)^2 + 2 a dt),   branch with Im >= 0,

which is unconditionally stable.  Capacity time is normalized so the
half-plane capacity grows at rate a = 2/kappa; under the chordal law the
driving is then a standard Brownian motion (variance dt per step), NOT
the rate-2 convention.  Driving paths come from a counter-based Philox
bridge, so they are reproducible and refinable: halving dt yields a
dyadic refinement of the same Brownian path.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ._kernels import backend
from ._kernels import pure as _scalar
from .errors import BranchError, DomainError, PointSwallowedError, StepSizeError
from .params import SleParams

DEFAULT_SWALLOW_TOL = 1e-9


def _dyadic_level(dt: float) -> int:
    """Level L with 2^-L = dt; driving steps live on the dyadic grid."""
    level = round(-math.log2(dt))
    if not 0 <= level <= _scalar.ABS_LMAX or 2.0 ** (-level) != dt:
        raise DomainError(f"dt must be a dyadic 2^-L with 0 <= L <= {_scalar.ABS_LMAX}, got {dt}")
    return level


@dataclass(frozen=True)
class DrivingPath:
    """Driving function sampled on a uniform capacity-time grid.

    ``increments[k]`` is U(t_{k+1}) - U(t_k) with t_k = k*dt.  Under the
    chordal law the increments are i.i.d. N(0, dt).
    """

    dt: float
    increments: np.ndarray

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=np.float64)
        object.__setattr__(self, "increments", inc)
        if self.dt <= 0.0:
            raise DomainError("dt must be positive")
        if inc.ndim != 1 or len(inc) < 1:
            raise DomainError("increments must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(inc)):
            raise DomainError("increments must be finite")

    @property
    def t_max(self) -> float:
        return self.dt * len(self.increments)

    @property
    def n_steps(self) -> int:
        return len(self.increments)

    @classmethod
    def brownian(cls, t_max: float, dt: float, seed: int, path_id: int = 0) -> "DrivingPath":
        """Chordal driving -B_t sampled from the dyadic bridge.

        The same (seed, path_id) with dt/2 yields a refinement of the same
        Brownian path.  dt must be a dyadic fraction 2^-L of capacity time.
        """
        level = _dyadic_level(dt)
        n = int(math.ceil(t_max / dt - 1e-12))
        bridge = _scalar._Bridge(seed, path_id)
        inc = np.empty(n)
        for k in range(n):
            inc[k] = -bridge.incr(level, k)
        return cls(dt=dt, increments=inc)


@dataclass
class MarkedPoint:
    """Per-point state under the flow: Z = g_t(z0) - U_t and |g_t'(z0)|."""

    z0: complex
    Z: complex
    abs_g_prime: float = 1.0
    status: str = "active"
    t_status: Optional[float] = None

    @classmethod
    def at(cls, z0: complex) -> "MarkedPoint":
        z0 = complex(z0)
        if z0.imag <= 0.0:
            raise DomainError(f"marked point must have Im > 0, got {z0}")
        return cls(z0=z0, Z=z0)

    @property
    def upsilon(self) -> float:
        """Conformal radius Im(Z)/|g'|; frozen at its last value once swallowed."""
        return self.Z.imag / self.abs_g_prime

    @property
    def sine(self) -> float:
        return self.Z.imag / abs(self.Z)

    @property
    def active(self) -> bool:
        return self.status == "active"


@dataclass(frozen=True)
class CurveTrace:
    """Sampled trace points gamma(t_k), in the closed upper half-plane."""

    times: np.ndarray
    points: np.ndarray

    def to_csv(self, path) -> None:
        """Write columns (t, re, im), one row per sample."""
        with open(path, "w") as f:
            f.write("t,re,im\n")
            for t, z in zip(self.times, self.points):
                f.write(f"{t:.17g},{z.real:.17g},{z.imag:.17g}\n")


@dataclass(frozen=True)
class StopRule:
    """Stop at a fixed capacity horizon and/or when a designated mark's
    conformal radius drops to ``upsilon``."""

    horizon: Optional[float] = None
    mark: Optional[int] = None
    upsilon: Optional[float] = None

    def __post_init__(self):
        if self.horizon is None and self.upsilon is None:
            raise DomainError("stop rule needs a horizon or an upsilon target")
        if (self.upsilon is None) != (self.mark is None):
            raise DomainError("upsilon target needs a designated mark index")


@dataclass(frozen=True)
class StopReport:
    reason: str          # 'horizon' | 'upsilon' | 'all_swallowed'
    step: int
    t: float


def slit_step(Z: complex, dU: float, dt: float, a: float,
              swallow_tol: float = DEFAULT_SWALLOW_TOL) -> complex:
    """Exact Loewner update for constant driving: sqrt((Z-dU)^2 + 2 a dt).

    Branch chosen with Im >= 0.  Raises PointSwallowedError when the point
    is captured by the slit (the update lands on the real axis: the
    radicand is real with nonnegative real part).
    """
    if dt < 0.0:
        raise DomainError("dt must be nonnegative")
    if Z.imag <= 0.0:
        raise DomainError("slit_step needs Im(Z) > 0")
    wre = Z.real - dU
    wim = Z.imag
    valre = wre * wre - wim * wim + 2.0 * a * dt
    valim = 2.0 * wre * wim
    sre, sim = _scalar.csqrt_im(valre, valim)
    if sim < swallow_tol * max(1.0, abs(sre)):
        raise PointSwallowedError(
            f"point captured by the slit (radicand {valre:.3g}+{valim:.3g}i)")
    return complex(sre, sim)


def deriv_step(Z_before: complex, dU: float, dt: float, a: float) -> float:
    """|dZ'/dZ| of one slit step: |Z_before - dU| / |Z_after|.

    Accumulating the product over steps yields |g_t'(z)|.
    """
    Z_after = slit_step(Z_before, dU, dt, a)
    wre = Z_before.real - dU
    wim = Z_before.imag
    return math.sqrt((wre * wre + wim * wim) / (Z_after.real ** 2 + Z_after.imag ** 2))


def evolve(path: DrivingPath, marks: Sequence[MarkedPoint], params: SleParams,
           stop: StopRule, swallow_tol: float = DEFAULT_SWALLOW_TOL,
           max_upsilon_drop: float = 0.5):
    """Advance marked points step-by-step along an explicit driving path.

    Pure function: returns (new_marks, StopReport); inputs are unchanged.
    Raises StepSizeError when a single step changes the conformal radius
    of an active mark by more than ``max_upsilon_drop`` relative, which
    indicates the path's dt is too coarse near that point.
    """
    a = params.a
    states = [replace(mk) for mk in marks]
    if stop.upsilon is not None and not 0 <= stop.mark < len(states):
        raise DomainError("designated mark index out of range")

    n_limit = path.n_steps
    if stop.horizon is not None:
        n_limit = min(n_limit, int(math.ceil(stop.horizon / path.dt - 1e-12)))

    def _report(reason, k):
        return StopReport(reason=reason, step=k, t=k * path.dt)

    if stop.upsilon is not None and states[stop.mark].upsilon <= stop.upsilon:
        return states, _report("upsilon", 0)

    for k in range(n_limit):
        dU = float(path.increments[k])
        any_active = False
        for mk in states:
            if not mk.active:
                continue
            ups_before = mk.upsilon
            try:
                Z_new = slit_step(mk.Z, dU, path.dt, a, swallow_tol)
            except PointSwallowedError:
                mk.status = "swallowed"
                mk.t_status = (k + 1) * path.dt
                continue
            wre = mk.Z.real - dU
            wim = mk.Z.imag
            mk.abs_g_prime *= math.sqrt(
                (wre * wre + wim * wim) / (Z_new.real ** 2 + Z_new.imag ** 2))
            mk.Z = Z_new
            any_active = True
            ups_after = mk.upsilon
            if ups_after > ups_before * (1.0 + 1e-12):
                raise StepSizeError("conformal radius increased within one step")
            if ups_after < (1.0 - max_upsilon_drop) * ups_before:
                raise StepSizeError(
                    f"step {k}: upsilon dropped {ups_before:.4g} -> {ups_after:.4g}; "
                    "dt too coarse near the point")
        if stop.upsilon is not None:
            des = states[stop.mark]
            if des.active and des.upsilon <= stop.upsilon:
                des.status = "cutoff"
                des.t_status = (k + 1) * path.dt
                return states, _report("upsilon", k + 1)
        if not any_active and states and all(not mk.active for mk in states):
            return states, _report("all_swallowed", k + 1)
    return states, _report("horizon", n_limit)


def trace(path: DrivingPath, params: SleParams, subsample: int = 1) -> CurveTrace:
    """Reconstruct the curve gamma(t_k) by backward composition of inverse
    slit maps (cost O(n^2 / subsample))."""
    if path.n_steps < 1:
        raise DomainError("path must have at least one step")
    idx = np.arange(0, path.n_steps + 1, subsample, dtype=np.int64)
    if idx[-1] != path.n_steps:
        idx = np.append(idx, path.n_steps)
    dts = np.full(path.n_steps, path.dt)
    pts = backend.trace_points(path.increments, dts, params.a, idx)
    if not np.all(pts.imag >= -1e-12):
        raise BranchError(int(idx[np.argmin(pts.imag)]))
    return CurveTrace(times=idx * path.dt, points=pts)


def min_distance_to_trace(tr: CurveTrace, z: complex) -> float:
    """Euclidean distance from z to the sampled trace union the real axis."""
    d = np.abs(tr.points - z).min()
    return min(float(d), z.imag)
