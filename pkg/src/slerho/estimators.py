"""Monte Carlo verification experiments.

Every experiment is a pure function of its parameters and an :class:`MCConfig`;
identical configs reproduce byte-identical CSV output.  Sampling is split into
blocks whose RNG streams are keyed by (seed, absolute path index), so block
size never changes results.

CSV schemas (consumed by the plotting package):

* z-table:    experiment,label,lhs,lhs_stderr,rhs,rhs_stderr,z,n,seed,config_hash
* decay:      experiment,scale,estimate,stderr,n,slope,slope_stderr,target_slope,seed,config_hash
* martingale: experiment,t,estimate,stderr,n,m0,seed,config_hash
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, conformal, loewner
from .bessel import neg_moment_from_zero, weight_values
from .errors import DomainError, ExperimentInvalidError
from .exponents import KappaRho, bar_eta, bar_rho, bar_sigma, bm_hiding

K83 = 8.0 / 3.0


@dataclass(frozen=True)
class MCConfig:
    """Reproducibility contract of one experiment run."""

    n_paths: int
    dt: float
    T: float
    seed: int
    params: tuple = ()

    def __post_init__(self):
        if self.n_paths < 1:
            raise DomainError("n_paths must be positive")
        if not 0 < self.dt <= self.T:
            raise DomainError(f"need 0 < dt <= T, got dt={self.dt}, T={self.T}")

    def get(self, name: str, default: float) -> float:
        for key, value in self.params:
            if key == name:
                return value
        return default

    def with_params(self, **kw) -> "MCConfig":
        merged = dict(self.params)
        merged.update(kw)
        return MCConfig(self.n_paths, self.dt, self.T, self.seed, tuple(sorted(merged.items())))

    def config_hash(self) -> str:
        payload = {
            "n_paths": self.n_paths,
            "dt": self.dt,
            "T": self.T,
            "seed": self.seed,
            "params": list(self.params),
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]

    @classmethod
    def from_json(cls, path: str) -> "MCConfig":
        with open(path) as fh:
            raw = json.load(fh)
        return cls(
            n_paths=int(raw["n_paths"]),
            dt=float(raw["dt"]),
            T=float(raw["T"]),
            seed=int(raw["seed"]),
            params=tuple(sorted((k, float(v)) for k, v in raw.get("params", {}).items())),
        )


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int
    metadata: dict = field(default_factory=dict, compare=False)


def _estimate(values: np.ndarray, experiment: str, cfg: MCConfig) -> Estimate:
    n = len(values)
    return Estimate(
        mean=float(np.mean(values)),
        stderr=float(np.std(values) / math.sqrt(n)),
        n=n,
        metadata={"experiment": experiment, "config_hash": cfg.config_hash()},
    )


def _binomial_estimate(count: int, n: int, experiment: str, cfg: MCConfig) -> Estimate:
    p = count / n
    return Estimate(
        mean=p,
        stderr=math.sqrt(max(p * (1.0 - p), 0.0) / n),
        n=n,
        metadata={"experiment": experiment, "config_hash": cfg.config_hash()},
    )


def _pooled_z(a: Estimate, b: Estimate) -> float:
    denom = math.hypot(a.stderr, b.stderr)
    if denom == 0.0:
        return 0.0 if a.mean == b.mean else math.inf
    return abs(a.mean - b.mean) / denom


def _steps(cfg: MCConfig) -> int:
    n = int(round(cfg.T / cfg.dt))
    if abs(n * cfg.dt - cfg.T) > 1e-9 * cfg.T:
        raise DomainError(f"T={cfg.T} is not an integer multiple of dt={cfg.dt}")
    return n


# ---------------------------------------------------------------------------
# exact identity between the two one-dimensional estimators
# ---------------------------------------------------------------------------


@dataclass
class IdentityCheck:
    lhs: Estimate
    rhs: Estimate
    z: float
    kappa: float
    rho: float
    alpha: float
    a: float


def verify_bessel_identity(kappa: float, rho: float, alpha: float, a: float, cfg: MCConfig) -> IdentityCheck:
    """Avoidance probability computed two ways: as E[exp(-2 alpha int ds/Y^2)]
    over the driving of the process itself, and as the reweighting moment
    E[(x/X~_T)^(mu-nu)] of the conditioned process started at the same point.
    The two estimators are each other's oracle; the identity is exact."""
    kr = KappaRho(kappa, rho)
    if kr.dimension < 2:
        raise DomainError(f"identity needs d >= 2 (rho >= -2 + kappa/2), got d={kr.dimension}")
    if not a > 0:
        raise DomainError(f"start gap must be positive, got {a}")
    sigma = bar_sigma(kappa, rho, alpha)  # validates the radicand
    nu = kr.nu
    mu = sigma + nu
    x = a / math.sqrt(kappa)
    n = cfg.n_paths
    steps = _steps(cfg)

    if alpha == 0.0:
        lhs_vals = np.ones(n)
        rhs_vals = np.ones(n)
    else:
        _, _, i2 = _kernels.bessel_summaries(nu, x, steps, cfg.dt, cfg.seed, 0, n)
        lhs_vals = np.exp(-2.0 * alpha * i2 / kappa)
        from .bessel import BesselSpec, sample_exact

        tilde = sample_exact(BesselSpec(2.0 + 2.0 * mu, x), cfg.T, n, cfg.seed ^ 0x5DEECE66D)
        rhs_vals = (x / tilde) ** (mu - nu)

    lhs = _estimate(lhs_vals, "bessel-identity-lhs", cfg)
    rhs = _estimate(rhs_vals, "bessel-identity-rhs", cfg)
    return IdentityCheck(lhs=lhs, rhs=rhs, z=_pooled_z(lhs, rhs), kappa=kappa, rho=rho, alpha=alpha, a=a)


# ---------------------------------------------------------------------------
# restriction formula by direct trace avoidance
# ---------------------------------------------------------------------------


@dataclass
class RestrictionCheck:
    p_hat: Estimate
    target: float
    target_finite_a: float
    horizons: dict
    truncation_bias_bar: float
    near_hit_fraction: float
    rho: float
    a: float
    hull: conformal.SlitHull


def _still_driving(a: float) -> loewner.DrivingPath:
    zeros = np.zeros(1)
    return loewner.DrivingPath(
        dt=1.0, W=np.array([a]), O=zeros, Y=np.array([a]),
        kappa=K83, rho=0.0, inv_y_sq=zeros,
    )


def finite_gap_target(rho: float, A: conformal.SlitHull, a: float) -> float:
    """Start-gap-corrected avoidance probability M_0 from the explicit map."""
    q = conformal.h_quantities(_still_driving(a), 0, A, samples=400)
    return conformal.martingale_M(q, a, 0.0, rho)


def verify_restriction(rho: float, A: conformal.SlitHull, a: float, cfg: MCConfig) -> RestrictionCheck:
    """Fraction of traces avoiding the slit versus phi'(0)^eta.

    Traces are truncated at capacity T; avoidance fractions at T/4 and T/2 are
    reported alongside, and their spread is the truncation bias bar."""
    kr = KappaRho(K83, rho)
    if kr.dimension < 2:
        raise DomainError(f"restriction run needs rho >= -2/3, got {rho}")
    if not a > 0:
        raise DomainError(f"start gap must be positive, got {a}")
    if A.x < 10.0 * a:
        warnings.warn(
            f"slit foot {A.x} is within 10 start gaps of the origin; the "
            "finite-gap correction will be large",
            stacklevel=2,
        )
    n = cfg.n_paths
    steps = _steps(cfg)
    stride = int(cfg.get("trace_stride", 16))
    refine_r = cfg.get("refine_radius", 3.0 * math.sqrt(stride * cfg.dt))
    near_tol = cfg.get("near_tol", math.sqrt(cfg.dt))
    block = int(cfg.get("block_size", 250))
    x0 = a / math.sqrt(K83)
    sk = math.sqrt(K83)

    hit_steps = np.empty(n, dtype=np.int64)
    min_dists = np.empty(n)
    for start in range(0, n, block):
        nb = min(block, n - start)
        X, I1, _ = _kernels.bessel_paths(kr.nu, x0, steps, cfg.dt, cfg.seed, start, nb)
        W = sk * X - (2.0 / sk) * I1
        hits, dists = _kernels.restriction_hits(W, cfg.dt, stride, A.x, A.y, refine_r)
        hit_steps[start : start + nb] = hits
        min_dists[start : start + nb] = dists

    horizons = {}
    for frac in (0.25, 0.5, 1.0):
        k_lim = int(round(frac * steps))
        avoided = int(np.sum((hit_steps < 0) | (hit_steps > k_lim)))
        horizons[frac * cfg.T] = _binomial_estimate(avoided, n, "restriction", cfg)
    p_hat = horizons[cfg.T]
    bias_bar = abs(horizons[0.5 * cfg.T].mean - p_hat.mean)
    avoiding = hit_steps < 0
    near = avoiding & (min_dists < near_tol)
    return RestrictionCheck(
        p_hat=p_hat,
        target=conformal.slit_phi_prime_at_zero(A) ** bar_eta(K83, rho),
        target_finite_a=finite_gap_target(rho, A, a),
        horizons=horizons,
        truncation_bias_bar=bias_bar,
        near_hit_fraction=float(np.sum(near)) / n,
        rho=rho,
        a=a,
        hull=A,
    )


# ---------------------------------------------------------------------------
# martingale stationarity
# ---------------------------------------------------------------------------


@dataclass
class MartingaleCheckpoint:
    t: float
    estimate: Estimate
    m0: float


@dataclass
class MartingaleResult:
    checkpoints: list
    m0: float
    zipper_failure_rate: float
    max_m: float
    hit_fraction: float


def martingale_check(
    rho: float,
    A: conformal.SlitHull,
    a: float,
    checkpoint_times,
    cfg: MCConfig,
) -> MartingaleResult:
    """E[M_t] across checkpoints against M_0; paths that hit the hull before a
    checkpoint contribute 0 there.  A zipper failure rate above 1% marks the
    experiment invalid."""
    if not rho > 0:
        raise DomainError(f"bounded martingale check needs rho > 0, got {rho}")
    kr = KappaRho(K83, rho)
    n = cfg.n_paths
    steps = _steps(cfg)
    check_steps = np.array(sorted(int(round(t / cfg.dt)) for t in checkpoint_times), dtype=np.int64)
    if check_steps[0] < 1 or check_steps[-1] > steps:
        raise DomainError("checkpoints outside the time grid")
    m_samples = int(cfg.get("arc_samples", 200))
    stride = int(cfg.get("trace_stride", 4))
    refine_r = cfg.get("refine_radius", 3.0 * math.sqrt(stride * cfg.dt))
    block = int(cfg.get("block_size", 500))
    x0 = a / math.sqrt(K83)
    sk = math.sqrt(K83)
    kmax = int(check_steps[-1])

    arc0 = conformal.ArcPolyline.from_slit(A, m_samples)
    z0r = np.ascontiguousarray(arc0.points.real)
    z0i = np.ascontiguousarray(arc0.points.imag)
    nc = len(check_steps)

    m_values = np.zeros((nc, n))
    fail_count = 0
    survive_any = 0
    max_m = 0.0
    alpha = None
    for start in range(0, n, block):
        nb = min(block, n - start)
        X, I1, _ = _kernels.bessel_paths(kr.nu, x0, kmax, cfg.dt, cfg.seed, start, nb)
        O = -(2.0 / sk) * I1
        W = sk * X + O
        hits, _ = _kernels.restriction_hits(W, cfg.dt, stride, A.x, A.y, refine_r)
        out_r = np.empty((nb, nc, m_samples))
        out_i = np.empty((nb, nc, m_samples))
        okflags = np.empty(nb, dtype=np.int64)
        _kernels.forward_push_block(W, cfg.dt, z0r, z0i, check_steps, out_r, out_i, okflags)
        for ci, k in enumerate(check_steps):
            surviving = (hits < 0) | (hits > k)
            idx = np.flatnonzero(surviving)
            if len(idx) == 0:
                continue
            qout = np.empty((len(idx), 4))
            fail = np.empty(len(idx), dtype=np.int64)
            _kernels.zipper_probe_block(
                np.ascontiguousarray(out_r[idx, ci, :]),
                np.ascontiguousarray(out_i[idx, ci, :]),
                np.ascontiguousarray(W[idx, k]),
                np.ascontiguousarray(O[idx, k]),
                qout,
                fail,
            )
            bad = (fail == 1) | (okflags[idx] == 0)
            hw, ho, hpw, hpo = qout[:, 0], qout[:, 1], qout[:, 2], qout[:, 3]
            ratio = (hw - ho) / (W[idx, k] - O[idx, k])
            valid = (~bad) & (hpw > 0) & (hpo > 0) & (ratio > 0)
            if alpha is None:
                from .exponents import bar_alpha

                alpha = bar_alpha(K83, rho)
            m_block = np.zeros(len(idx))
            m_block[valid] = (
                hpo[valid] ** alpha
                * hpw[valid] ** 0.625
                * ratio[valid] ** (0.375 * rho)
            )
            m_values[ci, start + idx] = m_block
            fail_count += int(np.sum(~valid))
            if len(m_block):
                max_m = max(max_m, float(np.max(m_block)))
        survive_any += int(np.sum((hits < 0) | (hits > check_steps[0])))

    m0 = finite_gap_target(rho, A, a)
    failure_rate = fail_count / max(survive_any, 1)
    checkpoints = [
        MartingaleCheckpoint(
            t=float(k * cfg.dt),
            estimate=_estimate(m_values[ci], "martingale", cfg),
            m0=m0,
        )
        for ci, k in enumerate(check_steps)
    ]
    hit_fraction = float(np.mean(m_values[-1] == 0.0))
    if failure_rate > 0.01:
        raise ExperimentInvalidError(
            f"zipper failure rate {failure_rate:.2%} exceeds 1%"
        )
    return MartingaleResult(
        checkpoints=checkpoints,
        m0=m0,
        zipper_failure_rate=failure_rate,
        max_m=max_m,
        hit_fraction=hit_fraction,
    )


# ---------------------------------------------------------------------------
# importance sampling across the conditioning relation
# ---------------------------------------------------------------------------

FUNCTIONALS = {
    "gap_above": lambda y, c: (y > c).astype(float),
    "capped_gap": lambda y, c: np.minimum(y, c),
}


@dataclass
class ReweightCheck:
    direct: Estimate
    reweighted: Estimate
    z: float
    kappa: float
    rho: float
    rho_bar: float
    alpha: float
    functional_id: str


def importance_sampling_check(
    kappa: float, rho: float, alpha: float, functional_id: str, cfg: MCConfig
) -> ReweightCheck:
    """The conditioned process is itself an SLE(kappa, rho_bar): a bounded
    functional of the driving gap has the same mean under direct simulation at
    rho_bar and under reweighted simulation at rho."""
    if functional_id not in FUNCTIONALS:
        raise DomainError(f"unknown functional {functional_id!r}; known: {sorted(FUNCTIONALS)}")
    kr = KappaRho(kappa, rho)
    rho_bar = bar_rho(kappa, rho, alpha)
    kr_bar = KappaRho(kappa, rho_bar)
    if kr.dimension < 2 or kr_bar.dimension < 2:
        raise DomainError("both the source and target process need d >= 2")
    a = cfg.get("a", 1.0)
    c = cfg.get("threshold", 1.0)
    x0 = a / math.sqrt(kappa)
    n = cfg.n_paths
    steps = _steps(cfg)
    func = FUNCTIONALS[functional_id]
    nu = kr.nu
    mu = kr_bar.nu

    yT, _, _ = _kernels.bessel_summaries(mu, x0, steps, cfg.dt, cfg.seed, 0, n)
    direct_vals = func(math.sqrt(kappa) * yT, c)
    direct = _estimate(direct_vals, f"reweighting-direct-{functional_id}", cfg)

    xT, _, i2 = _kernels.bessel_summaries(nu, x0, steps, cfg.dt, cfg.seed ^ 0x2545F4914F6CDD1D, 0, n)
    w = weight_values(xT, i2, x0, nu, mu)
    f_vals = func(math.sqrt(kappa) * xT, c)
    wbar = float(np.mean(w))
    est = float(np.sum(w * f_vals) / np.sum(w))
    influence = w * (f_vals - est) / wbar
    reweighted = Estimate(
        mean=est,
        stderr=float(np.std(influence) / math.sqrt(n)),
        n=n,
        metadata={
            "experiment": f"reweighting-weighted-{functional_id}",
            "config_hash": cfg.config_hash(),
            "weight_normalization": wbar,
        },
    )
    return ReweightCheck(
        direct=direct,
        reweighted=reweighted,
        z=_pooled_z(direct, reweighted),
        kappa=kappa,
        rho=rho,
        rho_bar=rho_bar,
        alpha=alpha,
        functional_id=functional_id,
    )


# ---------------------------------------------------------------------------
# decay-exponent fits
# ---------------------------------------------------------------------------


@dataclass
class DecayFit:
    scales: np.ndarray
    probabilities: list
    slope: float
    slope_stderr: float


def estimate_decay(scales, probabilities) -> DecayFit:
    """Weighted least-squares slope of log p on log scale; weights are the
    delta-method inverse variances of log p."""
    scales = np.asarray(scales, dtype=float)
    if len(scales) < 3:
        raise DomainError("need at least 3 scales for a decay fit")
    means = np.array([p.mean for p in probabilities])
    errs = np.array([p.stderr for p in probabilities])
    if np.any(means <= 0):
        raise DomainError("all probability estimates must be positive")
    if np.max(scales) / np.min(scales) < 10.0 * (1.0 - 1e-12):
        warnings.warn("scales span less than one decade; slope may be unreliable", stacklevel=2)
    x = np.log(scales)
    y = np.log(means)
    if np.all(errs == 0.0):
        wts = np.ones_like(y)
    else:
        var_log = np.where(errs > 0, (errs / means) ** 2, np.min((errs[errs > 0] / means[errs > 0]) ** 2))
        wts = 1.0 / var_log
    sw = np.sum(wts)
    xbar = np.sum(wts * x) / sw
    ybar = np.sum(wts * y) / sw
    sxx = np.sum(wts * (x - xbar) ** 2)
    slope = float(np.sum(wts * (x - xbar) * (y - ybar)) / sxx)
    if np.all(errs == 0.0):
        slope_stderr = 0.0
    else:
        slope_stderr = float(1.0 / math.sqrt(sxx))
    return DecayFit(scales=scales, probabilities=list(probabilities), slope=slope, slope_stderr=slope_stderr)


@dataclass
class DecayExperiment:
    fit: DecayFit
    target_slope: float
    dt_bias: float
    constant: float


def bessel_identity_decay(kappa: float, rho: float, alpha: float, scales, cfg: MCConfig) -> DecayExperiment:
    """Small-gap decay of the avoidance probability: the fitted slope targets
    mu - nu, with the dt sensitivity |slope(dt) - slope(2dt)| reported."""
    sigma = bar_sigma(kappa, rho, alpha)
    nu = KappaRho(kappa, rho).nu
    mu = sigma + nu

    def run(dt):
        ests = []
        for i, a in enumerate(scales):
            shifted = MCConfig(cfg.n_paths, dt, cfg.T, cfg.seed + 1000 * (i + 1), cfg.params)
            chk = verify_bessel_identity(kappa, rho, alpha, a, shifted)
            ests.append(chk.lhs)
        return estimate_decay(scales, ests)

    fit = run(cfg.dt)
    coarse = run(2.0 * cfg.dt)
    constant = (kappa * cfg.T) ** ((nu - mu) / 2.0) * neg_moment_from_zero(mu, mu - nu, 1.0)
    return DecayExperiment(
        fit=fit,
        target_slope=sigma,
        dt_bias=abs(fit.slope - coarse.slope),
        constant=constant,
    )


# ---------------------------------------------------------------------------
# planar Brownian hiding
# ---------------------------------------------------------------------------


@dataclass
class HidingResult:
    fit: DecayFit
    target_exponent: float
    counts: list
    overflow: list
    step_std: float
    raster_h: float


def brownian_hiding_experiment(n_hidden: int, m_hiders: int, R_list, cfg: MCConfig) -> HidingResult:
    """Fraction of samples in which all walks reach height R inside the upper
    half-plane and the first n walks never face the flood fill entering the
    strip from the right; the fitted decay exponent targets the closed form."""
    if n_hidden < 1 or m_hiders < 1:
        raise DomainError("need at least one hidden walk and one hider")
    R_list = sorted(float(r) for r in R_list)
    if R_list[0] <= 1.0:
        raise DomainError("strip heights must exceed the lower edge at 1")
    step = cfg.get("step_std", 0.02)
    h = cfg.get("raster_h", 2.0 * step)
    if h < step:
        raise DomainError(
            f"raster cells ({h}) finer than the walk step ({step}) leave "
            "rasterization gaps"
        )
    n = cfg.n_paths
    ests = []
    counts = []
    overflow = []
    for i, R in enumerate(R_list):
        halfwidth = cfg.get("window_halfwidth", 4.0 + 3.0 * R)
        hide, survive, over = _kernels.bm_hiding_counts(
            n_hidden, m_hiders, R, step, h, halfwidth, n, cfg.seed + 7919 * i
        )
        counts.append((int(hide), int(survive)))
        overflow.append(int(over))
        ests.append(_binomial_estimate(int(hide), n, "bm-hiding", cfg))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = estimate_decay(R_list, ests)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # integer warning already documented
        target = bm_hiding(n_hidden, m_hiders)
    return HidingResult(
        fit=fit,
        target_exponent=target,
        counts=counts,
        overflow=overflow,
        step_std=step,
        raster_h=h,
    )


# ---------------------------------------------------------------------------
# CSV / JSON emission
# ---------------------------------------------------------------------------

ZTABLE_HEADER = "experiment,label,lhs,lhs_stderr,rhs,rhs_stderr,z,n,seed,config_hash"
DECAY_HEADER = "experiment,scale,estimate,stderr,n,slope,slope_stderr,target_slope,seed,config_hash"
MARTINGALE_HEADER = "experiment,t,estimate,stderr,n,m0,seed,config_hash"


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_rows(path: str, header: str, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_ztable_csv(path: str, experiment: str, entries, cfg: MCConfig) -> None:
    """entries: iterable of (label, lhs: Estimate, rhs_mean, rhs_stderr, z)."""
    rows = [
        (experiment, label, lhs.mean, lhs.stderr, rhs_mean, rhs_stderr, z, lhs.n, cfg.seed, cfg.config_hash())
        for label, lhs, rhs_mean, rhs_stderr, z in entries
    ]
    _write_rows(path, ZTABLE_HEADER, rows)


def write_decay_csv(path: str, experiment: str, fit: DecayFit, target_slope: float, cfg: MCConfig) -> None:
    rows = [
        (
            experiment, float(scale), est.mean, est.stderr, est.n,
            fit.slope, fit.slope_stderr, target_slope, cfg.seed, cfg.config_hash(),
        )
        for scale, est in zip(fit.scales, fit.probabilities)
    ]
    _write_rows(path, DECAY_HEADER, rows)


def write_martingale_csv(path: str, experiment: str, result: MartingaleResult, cfg: MCConfig) -> None:
    rows = [
        (experiment, cp.t, cp.estimate.mean, cp.estimate.stderr, cp.estimate.n, cp.m0, cfg.seed, cfg.config_hash())
        for cp in result.checkpoints
    ]
    _write_rows(path, MARTINGALE_HEADER, rows)


def write_summary_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)

    def default(obj):
        if isinstance(obj, Estimate):
            return {"mean": obj.mean, "stderr": obj.stderr, "n": obj.n, **obj.metadata}
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, conformal.SlitHull):
            return {"x": obj.x, "y": obj.y}
        return str(obj)

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=default)
        fh.write("\n")
