"""Closed-form exponent calculus for SLE(kappa,rho) processes.

Every function here is a pure composition of square roots and rational
functions, evaluated in double precision.  Validity regions are enforced
with :class:`~slerho.errors.DomainError` rather than sentinel values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

from .errors import DomainError

_SQRT_1_24 = math.sqrt(1.0 / 24.0)


@dataclass(frozen=True)
class KappaRho:
    """Parameter pair of an SLE(kappa,rho) process.

    Derived quantities: Bessel index ``nu = (rho+2)/kappa - 1/2`` and
    dimension ``d = 2 + 2*nu = 1 + 2(rho+2)/kappa``.
    """

    kappa: float
    rho: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not self.rho > -2:
            raise DomainError(f"rho must exceed -2, got {self.rho}")

    @property
    def nu(self) -> float:
        return (self.rho + 2.0) / self.kappa - 0.5

    @property
    def dimension(self) -> float:
        return 2.0 + 2.0 * self.nu

    @property
    def hits_zero(self) -> bool:
        """True when the underlying Bessel process hits the origin (d < 2)."""
        return self.dimension < 2.0


@dataclass(frozen=True)
class ExponentDomainFlag:
    """Marks whether a formula's derivation needs a non-hitting Bessel,
    i.e. rho >= -2 + kappa/2 (dimension >= 2)."""

    requires_d_ge_2: bool


# Formulas whose validity region includes the d >= 2 constraint.
DOMAIN_FLAGS = {
    "bar_rho": ExponentDomainFlag(True),
    "bar_sigma": ExponentDomainFlag(True),
    "escape_exponent": ExponentDomainFlag(False),
    "bar_eta": ExponentDomainFlag(False),
    "bar_alpha": ExponentDomainFlag(False),
}


def _nu_of(kappa: float, rho: float) -> float:
    return (rho + 2.0) / kappa - 0.5


def u_map(a: float) -> float:
    """Cascade coordinate U(a) = sqrt(a + 1/24) - sqrt(1/24), increasing, U(0)=0."""
    if a < 0:
        raise DomainError(f"u_map requires a >= 0, got {a}")
    return math.sqrt(a + 1.0 / 24.0) - _SQRT_1_24


def u_inverse(y: float) -> float:
    """Exact inverse of :func:`u_map` on [0, inf): (y + sqrt(1/24))^2 - 1/24."""
    if y < 0:
        raise DomainError(f"u_inverse requires y >= 0, got {y}")
    return (y + _SQRT_1_24) ** 2 - 1.0 / 24.0


def cascade_xi(a: Iterable[float]) -> float:
    """Multi-argument non-intersection exponent U^{-1}(U(a_1)+...+U(a_p)).

    Symmetric in its arguments and associative: cascading cascades equals
    one flat cascade.
    """
    values = list(a)
    if not values:
        raise ValueError("cascade_xi requires at least one argument")
    return u_inverse(math.fsum(u_map(v) for v in values))


def xi_pair(u: float, alpha: float) -> float:
    """Two-argument exponent ((sqrt(24u+1) + sqrt(24a+1) - 1)^2 - 1)/24.

    Extends the cascade formula down to arguments >= -1/24.
    """
    if 24.0 * u + 1.0 < 0:
        raise DomainError(f"xi_pair requires u >= -1/24, got u={u}")
    if 24.0 * alpha + 1.0 < 0:
        raise DomainError(f"xi_pair requires alpha >= -1/24, got alpha={alpha}")
    root = math.sqrt(24.0 * u + 1.0) + math.sqrt(24.0 * alpha + 1.0) - 1.0
    return (root * root - 1.0) / 24.0


def bar_lambda(kappa: float) -> float:
    """Loop-soup intensity (8-3k)(6-k)/(12k) used to decorate SLE_k, k <= 8/3.

    Vanishes exactly at kappa = 8/3, where decoration is loop-free.
    """
    if not 0 < kappa:
        raise DomainError(f"bar_lambda requires kappa > 0, got {kappa}")
    if kappa > 8.0 / 3.0:
        raise DomainError(
            f"bar_lambda is only defined for kappa <= 8/3 (loop-soup decoration), got {kappa}"
        )
    return (8.0 - 3.0 * kappa) * (6.0 - kappa) / (12.0 * kappa)


def bar_eta(kappa: float, rho: float) -> float:
    """One-sided restriction exponent (rho+2)(rho+6-kappa)/(4 kappa)."""
    KappaRho(kappa, rho)
    return (rho + 2.0) * (rho + 6.0 - kappa) / (4.0 * kappa)


def bar_alpha(kappa: float, rho: float) -> float:
    """Exponent rho(rho+4-kappa)/(4 kappa) of the restriction sample an
    SLE_kappa is conditioned to avoid in order to become SLE(kappa,rho)."""
    KappaRho(kappa, rho)
    return rho * (rho + 4.0 - kappa) / (4.0 * kappa)


def min_alpha(kappa: float) -> float:
    """Lower bound -(4-kappa)^2/(16 kappa) on the avoidance-weighting exponent.

    This is the rho-independent bound; :func:`bar_rho` additionally enforces
    nonnegativity of its radicand, which does depend on rho.  Both are
    reported when a domain violation is raised.
    """
    if not kappa > 0:
        raise DomainError(f"min_alpha requires kappa > 0, got {kappa}")
    return -((4.0 - kappa) ** 2) / (16.0 * kappa)


def _radicand(kappa: float, rho: float, alpha: float) -> float:
    nu = _nu_of(kappa, rho)
    rad = 4.0 * alpha / kappa + nu * nu
    if rad < 0:
        raise DomainError(
            "reweighting not normalizable: alpha={} is below -kappa*nu^2/4={} "
            "for (kappa={}, rho={}); the rho-free bound is min_alpha(kappa)={}".format(
                alpha, -kappa * nu * nu / 4.0, kappa, rho, min_alpha(kappa)
            )
        )
    return rad


def _require_d_ge_2(kappa: float, rho: float, name: str):
    if rho < -2.0 + kappa / 2.0:
        raise DomainError(
            f"{name} requires d >= 2, i.e. rho >= -2 + kappa/2 "
            f"(got kappa={kappa}, rho={rho})"
        )


def bar_rho(kappa: float, rho: float, alpha: float) -> float:
    """Parameter kappa*sqrt(4a/k + nu^2) + k/2 - 2 of the SLE obtained by
    conditioning SLE(kappa,rho) to avoid a one-sided restriction sample of
    exponent alpha.  Always >= -2 + kappa/2."""
    KappaRho(kappa, rho)
    _require_d_ge_2(kappa, rho, "bar_rho")
    return kappa * math.sqrt(_radicand(kappa, rho, alpha)) + kappa / 2.0 - 2.0


def bar_sigma(kappa: float, rho: float, alpha: float) -> float:
    """Decay exponent sqrt(4a/k + nu^2) - nu of the avoidance probability;
    identically equal to (bar_rho(kappa,rho,alpha) - rho)/kappa."""
    KappaRho(kappa, rho)
    _require_d_ge_2(kappa, rho, "bar_sigma")
    return math.sqrt(_radicand(kappa, rho, alpha)) - _nu_of(kappa, rho)


def hide_one_sided(eta: float, beta: float) -> float:
    """One-sided hiding exponent between restriction samples of exponents
    eta and beta:  (sqrt(24b + (3-E)^2) + (3-E))/4 with E = sqrt(1+24 eta).

    A single formula valid for all eta > 0; continuous across eta = 1/3,
    decreasing in eta and increasing in beta.
    """
    if not eta > 0:
        raise DomainError(f"hide_one_sided requires eta > 0, got {eta}")
    if not beta > 0:
        raise DomainError(f"hide_one_sided requires beta > 0, got {beta}")
    e = math.sqrt(1.0 + 24.0 * eta)
    return 0.25 * (math.sqrt(24.0 * beta + (3.0 - e) ** 2) + (3.0 - e))


def dual_rho(kappa: float, rho: float) -> float:
    """Parameter kappa - 4 - rho of the process conditioned to escape the
    negative half-line (an involution in rho)."""
    KappaRho(kappa, rho)
    star = kappa - 4.0 - rho
    if not star > -2:
        raise DomainError(
            f"dual_rho(kappa={kappa}, rho={rho}) = {star} falls outside rho > -2"
        )
    return star


def escape_exponent(kappa: float, rho: float) -> float:
    """Decay exponent 2 - d = 1 - 2(rho+2)/kappa of the probability that the
    curve avoids the negative half-line; only defined when d < 2."""
    KappaRho(kappa, rho)
    d = 1.0 + 2.0 * (rho + 2.0) / kappa
    if not d < 2:
        raise DomainError(
            f"escape_exponent requires d < 2, i.e. rho < -2 + kappa/2 "
            f"(got kappa={kappa}, rho={rho}, d={d})"
        )
    return 2.0 - d


def rho_p(p: int) -> float:
    """Drift parameter 2(p-1) of the right-most of p mutually avoiding curves."""
    _check_p(p)
    return 2.0 * (p - 1)


def eta_p_83(p: int) -> float:
    """Restriction exponent p(3p+2)/8 of p mutually avoiding SLE_{8/3} curves."""
    _check_p(p)
    return p * (3.0 * p + 2.0) / 8.0


def eta_p_kappa(kappa: float, p: int) -> float:
    """Restriction exponent p(2p+4-kappa)/(2 kappa) of the p-fold construction
    at general kappa."""
    if not kappa > 0:
        raise DomainError(f"eta_p_kappa requires kappa > 0, got {kappa}")
    _check_p(p)
    return p * (2.0 * p + 4.0 - kappa) / (2.0 * kappa)


def mutual_avoid(kappa: float, p: int) -> float:
    """Exponent p(p-1)/kappa of the mutual-avoidance event between p curves
    started at nearby points."""
    if not kappa > 0:
        raise DomainError(f"mutual_avoid requires kappa > 0, got {kappa}")
    _check_p(p)
    return p * (p - 1.0) / kappa


def _check_p(p: int):
    if not (isinstance(p, (int,)) and p >= 1):
        raise DomainError(f"p must be an integer >= 1, got {p!r}")


def hide_two_sided(eta: float, beta: float) -> float:
    """Two-sided hiding exponent (sqrt(24b + (E-6)^2) - (E-6))/2 with
    E = sqrt(1+24 eta); defined for eta > 5/8, beta >= 5/8."""
    if not eta > 5.0 / 8.0:
        raise DomainError(f"hide_two_sided requires eta > 5/8, got {eta}")
    if not beta >= 5.0 / 8.0:
        raise DomainError(f"hide_two_sided requires beta >= 5/8, got {beta}")
    e = math.sqrt(1.0 + 24.0 * eta)
    return 0.5 * (math.sqrt(24.0 * beta + (e - 6.0) ** 2) - (e - 6.0))


def no_cut_delta(eta: float) -> float:
    """No-cut-point exponent 6 - sqrt(1+24 eta) for eta in (5/8, 35/24].

    Zero at eta = 35/24, above which samples almost surely have no cut point.
    """
    _check_cut_domain(eta)
    return 6.0 - math.sqrt(1.0 + 24.0 * eta)


def eta_prime(eta: float) -> float:
    """Exponent eta + 6 - sqrt(1+24 eta) of the measure conditioned to have
    no cut point; satisfies sqrt(1+24 eta) + sqrt(1+24 eta') = 12."""
    _check_cut_domain(eta)
    return eta + no_cut_delta(eta)


def _check_cut_domain(eta: float):
    if not (5.0 / 8.0 < eta <= 35.0 / 24.0):
        raise DomainError(
            f"cut-point exponents require eta in (5/8, 35/24], got {eta}"
        )


def mixed_hat_tau(eta: float, beta: float) -> float:
    """Mixed two-sided hiding exponent (9 - B - E + 2 sqrt((B-3)^2+(E-3)^2-1))/4
    with B = sqrt(1+24 beta), E = sqrt(1+24 eta); symmetric in its arguments."""
    if not eta >= 5.0 / 8.0:
        raise DomainError(f"mixed_hat_tau requires eta >= 5/8, got {eta}")
    if not beta >= 5.0 / 8.0:
        raise DomainError(f"mixed_hat_tau requires beta >= 5/8, got {beta}")
    b = math.sqrt(1.0 + 24.0 * beta)
    e = math.sqrt(1.0 + 24.0 * eta)
    return (9.0 - b - e + 2.0 * math.sqrt((b - 3.0) ** 2 + (e - 3.0) ** 2 - 1.0)) / 4.0


def radial_hide(n: float, p: float) -> float:
    """Radial hiding exponent ((sqrt(24p + (sqrt(1+24n)-6)^2) + 5)^2 - 4)/48.

    Invariant under n -> eta_prime(n) and equal for n = 1 and n = 2.
    """
    if not n > 0:
        raise DomainError(f"radial_hide requires n > 0, got {n}")
    if not p > 0:
        raise DomainError(f"radial_hide requires p > 0, got {p}")
    e = math.sqrt(1.0 + 24.0 * n)
    return ((math.sqrt(24.0 * p + (e - 6.0) ** 2) + 5.0) ** 2 - 4.0) / 48.0


def bm_hiding(n: int, m: int) -> float:
    """Exponent of the event that n planar Brownian motions are hidden from
    the right by m others across a growing strip, all staying in the upper
    half-plane:

        n + m + (sqrt(24n + (M-3)^2) - (M-3))/4,   M = sqrt(1+24m).

    The event is combinatorial, so integer n >= 1, m >= 1 are the intended
    inputs; non-integer values and the degenerate n = 0 (pure survival,
    exponent m) are accepted with a warning.
    """
    if n < 0:
        raise DomainError(f"bm_hiding requires n >= 0, got {n}")
    if m < 1:
        raise DomainError(f"bm_hiding requires m >= 1, got {m}")
    if n == 0:
        warnings.warn(
            "bm_hiding with n=0 degenerates to the pure half-plane survival "
            "exponent m",
            stacklevel=2,
        )
    if float(n) != int(n) or float(m) != int(m):
        warnings.warn(
            "bm_hiding is defined by a path-counting event; non-integer "
            "arguments use the analytic continuation of the formula",
            stacklevel=2,
        )
    mm = math.sqrt(1.0 + 24.0 * m)
    return n + m + 0.25 * (math.sqrt(24.0 * n + (mm - 3.0) ** 2) - (mm - 3.0))
