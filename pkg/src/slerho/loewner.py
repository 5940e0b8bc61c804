"""Loewner chains driven by Bessel processes.

The driving triple (W, O, Y) is built deterministically from a sampled Bessel
path: Y = sqrt(kappa) X, O is the image of the origin under the chain (it
drifts left, dO/dt = 2/(O - W) = -2/Y), and W = Y + O.  Traces are produced
by backward composition of elementary vertical-slit maps, each treating the
driving as constant (midpoint value) over one step of capacity dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bessel import BesselPath, BesselSpec
from .errors import DomainError, SwallowedError, TraceError
from .exponents import KappaRho


@dataclass(frozen=True)
class SleRhoSpec:
    """SLE(kappa,rho) started from (start_o, start_w); the gap start_w-start_o
    is the usual start distance a >= 0."""

    kr: KappaRho
    start_o: float = 0.0
    start_w: float = 0.0

    def __post_init__(self):
        if self.start_o > self.start_w:
            raise DomainError(
                f"need start_o <= start_w, got ({self.start_o}, {self.start_w})"
            )

    @property
    def gap(self) -> float:
        return self.start_w - self.start_o

    def bessel_spec(self) -> BesselSpec:
        return BesselSpec(self.kr.dimension, self.gap / math.sqrt(self.kr.kappa))


@dataclass
class DrivingPath:
    """Driving triple on a uniform grid, with the running integral of 1/Y^2.

    W - O == Y holds exactly (bitwise) at every index by construction; Y
    equals sqrt(kappa) X up to one rounding.
    """

    dt: float
    W: np.ndarray
    O: np.ndarray
    Y: np.ndarray
    kappa: float
    rho: float
    inv_y_sq: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.W) - 1

    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.W))


@dataclass
class Trace:
    """Discretized curve points with their capacity time stamps."""

    points: np.ndarray
    capacities: np.ndarray


@dataclass(frozen=True)
class GDerivAtZero:
    """Spatial derivative of the chain at the origin, exp(-2 int ds/Y^2)."""

    value: float


def driving_from_bessel(path: BesselPath, kappa: float, offset: float = 0.0) -> DrivingPath:
    """Turn a Bessel path of dimension d into the driving triple of an
    SLE(kappa, rho) with rho = kappa(nu + 1/2) - 2, translated by `offset`."""
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    d = path.spec.dimension
    if not d > 1:
        raise DomainError(f"driving needs dimension > 1 (rho > -2), got d={d}")
    rho = kappa * (path.spec.nu + 0.5) - 2.0
    sk = math.sqrt(kappa)
    O = offset - (2.0 / sk) * path.inv_integral
    W = sk * path.values + O
    Y = W - O  # re-derived so the invariant holds exactly in floats
    return DrivingPath(
        dt=path.dt,
        W=W,
        O=O,
        Y=Y,
        kappa=kappa,
        rho=rho,
        inv_y_sq=path.inv_sq_integral / kappa,
    )


def trace_from_driving(dp: DrivingPath, stride: int = 1, upto: int | None = None) -> Trace:
    """Backward-composition trace.  With stride > 1 the curve is evaluated at
    every stride-th grid time (coarse-fine option; cost O(N^2/stride))."""
    n = dp.n_steps if upto is None else upto
    if n < 1:
        raise DomainError("empty driving path")
    ks = np.arange(stride, n + 1, stride, dtype=np.int64)
    if len(ks) == 0 or ks[-1] != n:
        ks = np.append(ks, n)
    tips = _kernels.backward_tips(dp.W, dp.dt, ks)
    bad = np.flatnonzero(~np.isfinite(tips))
    if len(bad):
        raise TraceError(int(ks[bad[0]]))
    points = np.concatenate(([complex(dp.W[0], 0.0)], tips))
    capacities = np.concatenate(([0.0], dp.dt * ks))
    return Trace(points=points, capacities=capacities)


def g_prime_at_zero(dp: DrivingPath, upto: int | None = None) -> GDerivAtZero:
    """exp(-2 int_0^t ds/Y^2) from the path's own accumulator; nonincreasing
    in t and equal to 1 at t = 0."""
    k = dp.n_steps if upto is None else upto
    if not 0 <= k <= dp.n_steps:
        raise DomainError(f"index {k} outside the grid")
    zero_hits = np.flatnonzero(dp.Y[: k + 1] <= 0.0)
    if len(zero_hits):
        raise SwallowedError(int(zero_hits[0]), "Y hit 0 before the requested time")
    return GDerivAtZero(value=float(np.exp(-2.0 * dp.inv_y_sq[k])))


def forward_map_eval(dp: DrivingPath, z: complex, upto: int | None = None) -> complex:
    """Evaluate the composed forward chain at z (step-constant driving)."""
    k = dp.n_steps if upto is None else upto
    if not 0 <= k <= dp.n_steps:
        raise DomainError(f"index {k} outside the grid")
    z = complex(z)
    if z.imag < 0:
        raise DomainError("argument must lie in the closed upper half-plane")
    zr, zi, flag, step = _kernels.forward_point(dp.W, dp.dt, z.real, z.imag, k)
    if flag == 1:
        raise SwallowedError(step)
    if flag == 2:
        raise TraceError(step)
    return complex(zr, zi)


def first_hit_step(
    dp: DrivingPath,
    slit_x: float,
    slit_y: float,
    stride: int = 1,
    refine_r: float | None = None,
) -> tuple[int, float]:
    """First step at which the trace polyline crosses the vertical slit
    [slit_x, slit_x + i slit_y], or -1; also the minimum polyline distance.

    Coarse windows within `refine_r` of the slit are re-traced at unit stride.
    """
    if refine_r is None:
        refine_r = 6.0 * math.sqrt(stride * dp.dt)
    hit, dist = _kernels.restriction_hits(
        dp.W.reshape(1, -1), dp.dt, stride, slit_x, slit_y, refine_r
    )
    return int(hit[0]), float(dist[0])


def polyline_is_simple(points: np.ndarray) -> bool:
    """True if no two non-adjacent segments of the polyline properly cross."""
    pts = np.asarray(points, dtype=complex)
    return not _kernels.polyline_self_intersects(
        np.ascontiguousarray(pts.real), np.ascontiguousarray(pts.imag)
    )
