"""Bessel process simulation and change-of-measure weights.

Two samplers are provided.  :func:`sample_path` integrates the process on a
fine uniform grid (Euler-Maruyama on log X, which preserves positivity, with
adaptive substeps near the origin) and accumulates the pathwise integrals of
1/X and 1/X^2 that every downstream computation needs.  :func:`sample_exact`
draws single-time marginals exactly through the squared-process transition
law and serves as the distributional oracle for the grid scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .errors import DomainError, UnsupportedError


@dataclass(frozen=True)
class BesselSpec:
    """Dimension d >= 1 (index nu = (d-2)/2) and start point x0 >= 0."""

    dimension: float
    x0: float

    def __post_init__(self):
        if not self.dimension >= 1.0:
            raise DomainError(f"dimension must be >= 1, got {self.dimension}")
        if not self.x0 >= 0.0:
            raise DomainError(f"x0 must be >= 0, got {self.x0}")

    @property
    def nu(self) -> float:
        return (self.dimension - 2.0) / 2.0


@dataclass
class BesselPath:
    """A sampled trajectory on a uniform grid together with the running
    trapezoid integrals of 1/X and 1/X^2 (accumulated on the finer adaptive
    substep grid).

    For a zero start the inverse integrals diverge at time 0+; accumulation
    then begins at the first grid time (see the sampler notes).
    """

    spec: BesselSpec
    dt: float
    values: np.ndarray
    inv_integral: np.ndarray
    inv_sq_integral: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.values) - 1

    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    def restarted(self, start: int, stop: int | None = None) -> "BesselPath":
        """Sub-path on [start, stop] re-based as a path from values[start]."""
        stop = self.n_steps if stop is None else stop
        if not 0 <= start < stop <= self.n_steps:
            raise ValueError(f"invalid slice [{start}, {stop}]")
        vals = self.values[start : stop + 1].copy()
        return BesselPath(
            spec=BesselSpec(self.spec.dimension, float(vals[0])),
            dt=self.dt,
            values=vals,
            inv_integral=self.inv_integral[start : stop + 1] - self.inv_integral[start],
            inv_sq_integral=self.inv_sq_integral[start : stop + 1] - self.inv_sq_integral[start],
        )


@dataclass(frozen=True)
class GirsanovWeight:
    """Radon-Nikodym factor turning an index-nu path law into index mu:
    (X_t/x)^(mu-nu) * exp(-(mu^2-nu^2)/2 * int ds/X^2)."""

    nu_from: float
    mu_to: float
    weight: float


def _steps_of(T: float, dt: float) -> int:
    if not 0 < dt <= T:
        raise DomainError(f"need 0 < dt <= T, got dt={dt}, T={T}")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        raise DomainError(f"T={T} is not an integer multiple of dt={dt}")
    return n


def sample_path(spec: BesselSpec, T: float, dt: float, stream: int) -> BesselPath:
    """Sample one trajectory on the uniform grid {0, dt, ..., T}.

    `stream` is an integer RNG stream key; identical keys reproduce identical
    paths regardless of batching.
    """
    if spec.dimension < 2.0:
        # the process hits 0 and any scheme must pick a reflected or absorbed
        # variant, which is out of scope; marginals are available exactly
        raise UnsupportedError(
            "pathwise sampling needs dimension >= 2; use sample_exact for "
            f"marginals of dimension {spec.dimension}"
        )
    n = _steps_of(T, dt)
    X, I1, I2 = _kernels.bessel_paths(spec.nu, spec.x0, n, dt, stream, 0, 1)
    return BesselPath(spec, dt, X[0], I1[0], I2[0])


def sample_exact(spec: BesselSpec, t: float, n: int, stream: int) -> np.ndarray:
    """Draw n exact marginal values X_t: X_t^2/t is noncentral chi-square
    with d degrees of freedom and noncentrality x0^2/t."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    rng = np.random.default_rng(np.random.PCG64(stream))
    if spec.x0 == 0.0:
        z = rng.chisquare(spec.dimension, size=n)
    else:
        z = rng.noncentral_chisquare(spec.dimension, spec.x0**2 / t, size=n)
    return np.sqrt(t * z)


def girsanov_weight(path: BesselPath, mu_to: float) -> GirsanovWeight:
    """Change-of-measure weight of one path toward index mu_to.

    Multiplicative over path concatenation; identically 1 when mu equals the
    path's own index.
    """
    x0 = path.spec.x0
    if x0 <= 0.0:
        raise DomainError("density singular at start 0")
    nu = path.spec.nu
    w = weight_values(
        np.asarray([path.values[-1]]),
        np.asarray([path.inv_sq_integral[-1]]),
        x0,
        nu,
        mu_to,
    )[0]
    return GirsanovWeight(nu_from=nu, mu_to=mu_to, weight=float(w))


def weight_values(x_t: np.ndarray, inv_sq: np.ndarray, x0: float, nu: float, mu: float) -> np.ndarray:
    """Vectorized Girsanov weights from path summaries."""
    if x0 <= 0.0:
        raise DomainError("density singular at start 0")
    return (x_t / x0) ** (mu - nu) * np.exp(-0.5 * (mu**2 - nu**2) * inv_sq)


def neg_moment_from_zero(mu: float, q: float, t: float) -> float:
    """E[X_t^(-q)] for a dimension 2+2mu process started from 0.

    X_t/sqrt(t) is chi-distributed with d = 2+2mu degrees of freedom, so the
    moment is t^(-q/2) 2^(-q/2) Gamma((d-q)/2)/Gamma(d/2), finite iff q < d.
    """
    if mu < 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    d = 2.0 + 2.0 * mu
    if not q < d:
        raise DomainError(f"moment diverges: q={q} >= dimension {d}")
    return float(t ** (-q / 2.0) * 2.0 ** (-q / 2.0) * np.exp(gammaln((d - q) / 2.0) - gammaln(d / 2.0)))
