"""Explicit slit-hull maps, numerical map-out of discretized arcs, and the
boundary observables entering the restriction martingale.

Hulls are vertical slits A = [x, x+iy] attached to the positive axis, whose
normalized removal map is explicit, plus their forward images under a Loewner
chain, which are mapped out numerically by composing elementary vertical-slit
steps ("zipper") from the arc's foot to its tip.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, loewner
from .errors import DomainError, GeometryError, HullHitError
from .exponents import bar_alpha


@dataclass(frozen=True)
class SlitHull:
    """Vertical segment [x, x+iy], bounded away from the negative half-line."""

    x: float
    y: float

    def __post_init__(self):
        if not self.x > 0:
            raise GeometryError(f"slit foot must be on the positive axis, got x={self.x}")
        if not self.y > 0:
            raise GeometryError(f"slit height must be positive, got y={self.y}")

    @property
    def diameter(self) -> float:
        return self.y


def _branch_sqrt(w: complex, y: float) -> complex:
    """sqrt(w^2 + y^2) with the branch asymptotic to w at infinity."""
    s = cmath.sqrt(w * w + y * y)
    if s.imag < 0.0 or (s.imag == 0.0 and w.real < 0.0):
        s = -s
    return s


def slit_phi(A: SlitHull, z: complex) -> complex:
    """Removal map of the slit, fixing 0 and asymptotic to z at infinity:
    phi(z) = x + sqrt((z-x)^2 + y^2) - (x - sqrt(x^2 + y^2))."""
    z = complex(z)
    if z.imag < 0:
        raise DomainError("argument must lie in the closed upper half-plane")
    w = z - A.x
    if abs(w.real) < 1e-14 * max(1.0, A.x) and 0.0 <= z.imag < A.y:
        raise GeometryError(f"{z} lies on the slit")
    raw = A.x + _branch_sqrt(w, A.y)
    raw0 = A.x - math.hypot(A.x, A.y)
    return raw - raw0


def slit_phi_prime_at_zero(A: SlitHull) -> float:
    """phi'(0) = x/sqrt(x^2+y^2), in (0, 1)."""
    return A.x / math.hypot(A.x, A.y)


class ArcPolyline:
    """A simple arc in the closed upper half-plane with its first point on the
    real axis (the foot)."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=complex)
        if pts.ndim != 1 or len(pts) == 0:
            raise GeometryError("an arc needs at least one point")
        scale = max(1.0, float(np.max(np.abs(pts))))
        if abs(pts[0].imag) > 1e-9 * scale:
            raise GeometryError(f"arc foot {pts[0]} is not on the real axis")
        pts[0] = complex(pts[0].real, 0.0)
        if np.any(pts.imag < -1e-9 * scale):
            raise GeometryError("arc leaves the closed upper half-plane")
        if len(pts) > 2 and _kernels.polyline_self_intersects(
            np.ascontiguousarray(pts.real), np.ascontiguousarray(pts.imag)
        ):
            raise GeometryError("arc is self-intersecting")
        self.points = pts

    def __len__(self):
        return len(self.points)

    @property
    def diameter(self) -> float:
        if len(self.points) < 2:
            return 0.0
        return float(np.max(np.abs(self.points - self.points[0])))

    @classmethod
    def from_slit(cls, A: SlitHull, samples: int = 200) -> "ArcPolyline":
        heights = np.linspace(0.0, A.y, samples)
        return cls(A.x + 1j * heights)


@dataclass
class MapChain:
    """Composition of elementary vertical-slit removal maps (u_j, v_j) plus a
    final real shift; each elementary map is z + O(1/z) at infinity, so the
    chain is normalized up to the tracked shift."""

    us: np.ndarray
    vs: np.ndarray
    shift: float = 0.0

    def __len__(self):
        return len(self.us)

    def eval(self, z: complex) -> complex:
        z = complex(z)
        zr, zi = _kernels.chain_eval(self.us, self.vs, z.real, z.imag, 1.0)
        return complex(zr + self.shift, zi)

    def eval_real(self, x: float) -> float:
        zr, _ = _kernels.chain_eval(self.us, self.vs, float(x), 0.0, -1.0 if x < self._foot() else 1.0)
        return zr + self.shift

    def deriv_real(self, x: float) -> float:
        _, d = _kernels.chain_deriv_real(self.us, self.vs, float(x))
        return d

    def _foot(self) -> float:
        return float(self.us[0]) if len(self.us) else 0.0

    def capacity(self) -> float:
        return float(0.5 * np.sum(self.vs**2))


def zipper_map_out(arc: ArcPolyline) -> MapChain:
    """Numerical removal map of a sampled arc, normalized z + o(1).

    Peels the arc from its foot: each step removes the vertical slit through
    the current image of the next sample point.
    """
    if len(arc) < 2:
        return MapChain(us=np.empty(0), vs=np.empty(0))
    pts = arc.points
    if np.any(~np.isfinite(pts)):
        raise GeometryError("arc contains non-finite points")
    us, vs = _kernels.zipper_chain(
        np.ascontiguousarray(pts.real), np.ascontiguousarray(pts.imag)
    )
    return MapChain(us=us, vs=vs)


def zipper_residual(arc: ArcPolyline, chain: MapChain) -> float:
    """Maximum distance from the real axis of the arc's midpoints after the
    map-out, as a fraction of the arc diameter (self-consistency report)."""
    if len(arc) < 2:
        return 0.0
    mids = 0.5 * (arc.points[:-1] + arc.points[1:])
    worst = 0.0
    for m in mids:
        worst = max(worst, abs(chain.eval(m).imag))
    return worst / max(arc.diameter, 1e-300)


@dataclass(frozen=True)
class HQuantities:
    """Boundary observables of the chain-normalized removal map h of the
    evolved hull: values and derivatives at the driving and origin images."""

    hw: float
    ho: float
    hpw: float
    hpo: float


def h_quantities(
    dp: loewner.DrivingPath,
    t_index: int,
    A: SlitHull,
    samples: int = 200,
    check_hit: bool = True,
) -> HQuantities:
    """Map-out observables of g_t(A) at time index t_index.

    Pushes a sampled boundary of A through the forward chain, zips the image
    arc out, and evaluates h and h' at W_t and O_t.  Raises HullHitError when
    the trace crosses A before t_index.
    """
    if not 0 <= t_index <= dp.n_steps:
        raise DomainError(f"index {t_index} outside the grid")
    if check_hit and t_index > 0:
        hit, _ = loewner.first_hit_step(dp, A.x, A.y)
        if 0 <= hit <= t_index:
            raise HullHitError(hit)
    arc0 = ArcPolyline.from_slit(A, samples)
    if t_index == 0:
        image = arc0
    else:
        out = np.empty(len(arc0), dtype=complex)
        for i, z in enumerate(arc0.points):
            out[i] = loewner.forward_map_eval(dp, z, upto=t_index)
        image = ArcPolyline(out)
    chain = zipper_map_out(image)
    w = float(dp.W[t_index])
    o = float(dp.O[t_index])
    return HQuantities(
        hw=chain.eval_real(w),
        ho=chain.eval_real(o),
        hpw=chain.deriv_real(w),
        hpo=chain.deriv_real(o),
    )


def martingale_M(q: HQuantities, W: float, O: float, rho: float) -> float:
    """Bounded restriction observable at kappa = 8/3:

        M = h'(O)^alpha * h'(W)^(5/8) * ((h(W)-h(O))/(W-O))^(3 rho/8)

    with alpha the conditioning exponent of rho.
    """
    if W == O:
        raise DomainError("degenerate configuration: W equals O")
    alpha = bar_alpha(8.0 / 3.0, rho)
    ratio = (q.hw - q.ho) / (W - O)
    if not (q.hpw > 0 and q.hpo > 0 and ratio > 0):
        raise DomainError(f"map-out produced non-contractive factors: {q}, ratio={ratio}")
    return q.hpo**alpha * q.hpw ** (5.0 / 8.0) * ratio ** (3.0 * rho / 8.0)
