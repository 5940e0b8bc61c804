"""Command-line interface.

Exit codes: 0 success, 2 parameter/domain errors, 3 experiment-invalid flags.
Numeric flags accept exact rationals written as p/q (e.g. --kappa 8/3).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import bessel, conformal, estimators, exponents, loewner
from .errors import DomainError, ExperimentInvalidError, GeometryError, SlerhoError


def rational(text: str) -> float:
    """Parse a float or an exact p/q literal."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as err:
        raise argparse.ArgumentTypeError(f"not a number or p/q literal: {text!r}") from err


def rational_list(text: str):
    return [rational(part) for part in text.split(",") if part.strip()]


def fmt(value: float) -> str:
    """12 significant digits, annotated with the exact rational when one fits."""
    body = f"{value:.12g}"
    frac = Fraction(value).limit_denominator(4096)
    if 1 < frac.denominator <= 64 and abs(float(frac) - value) <= 1e-12 * max(1.0, abs(value)):
        body += f" (= {frac.numerator}/{frac.denominator})"
    return body


def out_dir(args) -> str:
    if getattr(args, "out", None):
        return args.out
    return os.environ.get("SLE_RHO_OUT", "results")


def build_config(args) -> estimators.MCConfig:
    if getattr(args, "config", None):
        cfg = estimators.MCConfig.from_json(args.config)
        overrides = {}
        for name in ("n_paths", "dt", "T", "seed"):
            val = getattr(args, name, None)
            if val is not None:
                overrides[name] = val
        if overrides:
            cfg = estimators.MCConfig(
                n_paths=int(overrides.get("n_paths", cfg.n_paths)),
                dt=float(overrides.get("dt", cfg.dt)),
                T=float(overrides.get("T", cfg.T)),
                seed=int(overrides.get("seed", cfg.seed)),
                params=cfg.params,
            )
        return cfg
    return estimators.MCConfig(
        n_paths=int(args.n_paths),
        dt=float(args.dt),
        T=float(args.T),
        seed=int(args.seed),
    )


def add_budget_flags(sub, n_paths, dt, T):
    sub.add_argument("--n-paths", dest="n_paths", type=int, default=n_paths,
                     help=f"Monte Carlo sample count (default {n_paths})")
    sub.add_argument("--dt", type=rational, default=dt,
                     help=f"uniform time step of the grid scheme (default {dt})")
    sub.add_argument("--T", type=rational, default=T,
                     help=f"time horizon / capacity of each path (default {T})")
    sub.add_argument("--seed", type=int, default=1,
                     help="RNG seed; identical seeds reproduce outputs exactly (default 1)")
    sub.add_argument("--config", help="JSON file with n_paths/dt/T/seed/params (flags override)")
    sub.add_argument("--out", help="output directory (default $SLE_RHO_OUT or ./results)")


# ---------------------------------------------------------------------------
# exponent
# ---------------------------------------------------------------------------


def cmd_exponent(args) -> int:
    lines = []

    def emit(name, value):
        lines.append(f"{name}={fmt(value)}")

    kappa, rho, alpha = args.kappa, args.rho, args.alpha
    eta, beta = args.eta, args.beta
    n, m, p = args.n, args.m, args.p

    if kappa is not None:
        emit("min_alpha", exponents.min_alpha(kappa))
        if kappa <= 8.0 / 3.0:
            emit("bar_lambda", exponents.bar_lambda(kappa))
    if kappa is not None and rho is not None:
        kr = exponents.KappaRho(kappa, rho)
        emit("nu", kr.nu)
        emit("dimension", kr.dimension)
        emit("bar_eta", exponents.bar_eta(kappa, rho))
        emit("bar_alpha", exponents.bar_alpha(kappa, rho))
        if kappa - 4.0 - rho > -2.0:
            emit("dual_rho", exponents.dual_rho(kappa, rho))
        if kr.dimension < 2.0:
            emit("escape_exponent", exponents.escape_exponent(kappa, rho))
        if alpha is not None:
            emit("bar_rho", exponents.bar_rho(kappa, rho, alpha))
            emit("bar_sigma", exponents.bar_sigma(kappa, rho, alpha))
    elif alpha is not None:
        raise DomainError("--alpha needs both --kappa and --rho")
    if kappa is not None and p is not None:
        emit("eta_p_kappa", exponents.eta_p_kappa(kappa, p))
        emit("mutual_avoid", exponents.mutual_avoid(kappa, p))
    if p is not None:
        emit("rho_p", exponents.rho_p(p))
        emit("eta_p_83", exponents.eta_p_83(p))
    if eta is not None and beta is not None:
        if args.two_sided:
            emit("hide_two_sided", exponents.hide_two_sided(eta, beta))
            emit("mixed_hat_tau", exponents.mixed_hat_tau(eta, beta))
        else:
            emit("hide_one_sided", exponents.hide_one_sided(eta, beta))
    if eta is not None and 5.0 / 8.0 < eta <= 35.0 / 24.0:
        emit("no_cut_delta", exponents.no_cut_delta(eta))
        emit("eta_prime", exponents.eta_prime(eta))
    if n is not None and m is not None:
        emit("bm_hiding", exponents.bm_hiding(n, m))
    if n is not None and p is not None:
        emit("radial_hide", exponents.radial_hide(n, p))

    if not lines:
        raise DomainError("no applicable formulas for the given parameter subset")
    print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    kr = exponents.KappaRho(args.kappa, args.rho)
    spec = loewner.SleRhoSpec(kr, 0.0, args.a)
    path = bessel.sample_path(spec.bessel_spec(), T=args.T, dt=args.dt, stream=args.seed)
    dp = loewner.driving_from_bessel(path, args.kappa)
    directory = out_dir(args)
    os.makedirs(directory, exist_ok=True)
    written = []
    if args.what in ("driving", "both"):
        target = os.path.join(directory, f"driving_seed{args.seed}.csv")
        rows = zip(dp.times(), dp.W, dp.O, dp.Y)
        estimators._write_rows(target, "t,W,O,Y", ((t, w, o, y) for t, w, o, y in rows))
        written.append(target)
    if args.what in ("trace", "both"):
        tr = loewner.trace_from_driving(dp, stride=args.stride)
        target = os.path.join(directory, f"trace_seed{args.seed}.csv")
        rows = zip(tr.capacities, tr.points.real, tr.points.imag)
        estimators._write_rows(target, "t,re_z,im_z", ((t, re, im) for t, re, im in rows))
        written.append(target)
    for name in written:
        print(name)
    return 0


# ---------------------------------------------------------------------------
# verification experiments
# ---------------------------------------------------------------------------


def cmd_verify_identity(args) -> int:
    cfg = build_config(args)
    chk = estimators.verify_bessel_identity(args.kappa, args.rho, args.alpha, args.a, cfg)
    directory = out_dir(args)
    label = f"kappa={args.kappa:.6g};rho={args.rho:.6g};alpha={args.alpha:.6g};a={args.a:.6g}"
    estimators.write_ztable_csv(
        os.path.join(directory, "identity.csv"), "bessel-identity",
        [(label, chk.lhs, chk.rhs.mean, chk.rhs.stderr, chk.z)], cfg,
    )
    estimators.write_summary_json(
        os.path.join(directory, "identity.json"),
        {"experiment": "bessel-identity", "lhs": chk.lhs, "rhs": chk.rhs, "z": chk.z,
         "kappa": args.kappa, "rho": args.rho, "alpha": args.alpha, "a": args.a,
         "notes": "grid-scheme bias affects lhs only; rhs uses exact marginals"},
    )
    print(f"lhs={chk.lhs.mean:.6g} (stderr {chk.lhs.stderr:.3g})")
    print(f"rhs={chk.rhs.mean:.6g} (stderr {chk.rhs.stderr:.3g})")
    print(f"z={chk.z:.3f}")
    return 0


def cmd_verify_restriction(args) -> int:
    cfg = build_config(args)
    A = conformal.SlitHull(args.hull_x, args.hull_y)
    res = estimators.verify_restriction(args.rho, A, args.a, cfg)
    directory = out_dir(args)
    entries = [
        (f"T={t:.6g}", est, res.target, 0.0, abs(est.mean - res.target) / est.stderr if est.stderr else 0.0)
        for t, est in sorted(res.horizons.items())
    ]
    estimators.write_ztable_csv(os.path.join(directory, "restriction.csv"), "restriction", entries, cfg)
    estimators.write_summary_json(
        os.path.join(directory, "restriction.json"),
        {"experiment": "restriction", "p_hat": res.p_hat, "target": res.target,
         "target_finite_a": res.target_finite_a, "truncation_bias_bar": res.truncation_bias_bar,
         "near_hit_fraction": res.near_hit_fraction, "rho": res.rho, "a": res.a, "hull": res.hull,
         "horizons": {f"{t:.6g}": e for t, e in res.horizons.items()},
         "notes": "target is the vanishing-gap limit; target_finite_a corrects for the start gap"},
    )
    print(f"p_hat={res.p_hat.mean:.6g} (stderr {res.p_hat.stderr:.3g})")
    print(f"target={res.target:.6g}  finite-gap target={res.target_finite_a:.6g}")
    print(f"truncation_bias_bar={res.truncation_bias_bar:.3g}  near_hit_fraction={res.near_hit_fraction:.3g}")
    return 0


def cmd_verify_martingale(args) -> int:
    cfg = build_config(args)
    A = conformal.SlitHull(args.hull_x, args.hull_y)
    res = estimators.martingale_check(args.rho, A, args.a, args.checkpoints, cfg)
    directory = out_dir(args)
    estimators.write_martingale_csv(os.path.join(directory, "martingale.csv"), "martingale", res, cfg)
    estimators.write_summary_json(
        os.path.join(directory, "martingale.json"),
        {"experiment": "martingale", "m0": res.m0,
         "checkpoints": [{"t": cp.t, "estimate": cp.estimate} for cp in res.checkpoints],
         "zipper_failure_rate": res.zipper_failure_rate, "max_m": res.max_m,
         "hit_fraction": res.hit_fraction,
         "notes": "paths hitting the hull before a checkpoint contribute 0 there"},
    )
    for cp in res.checkpoints:
        z = abs(cp.estimate.mean - cp.m0) / cp.estimate.stderr if cp.estimate.stderr else 0.0
        print(f"t={cp.t:.6g}: E[M]={cp.estimate.mean:.6g} (stderr {cp.estimate.stderr:.3g}, z={z:.2f})")
    print(f"M0={res.m0:.6g}  zipper_failure_rate={res.zipper_failure_rate:.4g}")
    return 0


def cmd_verify_reweighting(args) -> int:
    cfg = build_config(args)
    if args.threshold is not None:
        cfg = cfg.with_params(threshold=args.threshold)
    chk = estimators.importance_sampling_check(args.kappa, args.rho, args.alpha, args.functional, cfg)
    directory = out_dir(args)
    label = f"kappa={args.kappa:.6g};rho={args.rho:.6g};alpha={args.alpha:.6g};f={args.functional}"
    estimators.write_ztable_csv(
        os.path.join(directory, "reweighting.csv"), "reweighting",
        [(label, chk.direct, chk.reweighted.mean, chk.reweighted.stderr, chk.z)], cfg,
    )
    estimators.write_summary_json(
        os.path.join(directory, "reweighting.json"),
        {"experiment": "reweighting", "direct": chk.direct, "reweighted": chk.reweighted,
         "z": chk.z, "rho_bar": chk.rho_bar, "functional": chk.functional_id,
         "notes": "reweighted estimator is self-normalized"},
    )
    print(f"direct={chk.direct.mean:.6g} (stderr {chk.direct.stderr:.3g})")
    print(f"reweighted={chk.reweighted.mean:.6g} (stderr {chk.reweighted.stderr:.3g})")
    print(f"z={chk.z:.3f}  rho_bar={fmt(chk.rho_bar)}")
    return 0


def cmd_estimate_decay(args) -> int:
    cfg = build_config(args)
    dec = estimators.bessel_identity_decay(args.kappa, args.rho, args.alpha, args.scales, cfg)
    directory = out_dir(args)
    estimators.write_decay_csv(
        os.path.join(directory, "decay.csv"), "gap-decay", dec.fit, dec.target_slope, cfg
    )
    estimators.write_summary_json(
        os.path.join(directory, "decay.json"),
        {"experiment": "gap-decay", "slope": dec.fit.slope, "slope_stderr": dec.fit.slope_stderr,
         "target_slope": dec.target_slope, "dt_bias": dec.dt_bias, "constant": dec.constant,
         "scales": list(dec.fit.scales),
         "estimates": {f"{s:.6g}": e for s, e in zip(dec.fit.scales, dec.fit.probabilities)},
         "notes": "dt_bias is |slope(dt) - slope(2dt)|; constant is the vanishing-gap prefactor"},
    )
    print(f"slope={dec.fit.slope:.6g} (stderr {dec.fit.slope_stderr:.3g})")
    print(f"target={fmt(dec.target_slope)}  dt_bias={dec.dt_bias:.3g}")
    return 0


def cmd_brownian_hiding(args) -> int:
    cfg = build_config(args)
    if args.step_std is not None:
        cfg = cfg.with_params(step_std=args.step_std)
    res = estimators.brownian_hiding_experiment(args.n, args.m, args.R, cfg)
    directory = out_dir(args)
    estimators.write_decay_csv(
        os.path.join(directory, "bm_hiding.csv"), "bm-hiding", res.fit, -res.target_exponent, cfg
    )
    estimators.write_summary_json(
        os.path.join(directory, "bm_hiding.json"),
        {"experiment": "bm-hiding", "fitted_exponent": -res.fit.slope,
         "slope_stderr": res.fit.slope_stderr, "target_exponent": res.target_exponent,
         "counts": res.counts, "overflow": res.overflow,
         "step_std": res.step_std, "raster_h": res.raster_h,
         "notes": "raster flood-fill right-boundary test; h-dependence reported via --raster-h"},
    )
    print(f"fitted_exponent={-res.fit.slope:.6g} (stderr {res.fit.slope_stderr:.3g})")
    print(f"target={res.target_exponent:.6g}")
    return 0


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def _selftest_exact() -> list:
    sqrt7 = math.sqrt(7.0)
    cases = [
        ("xi_pair(1,-1/24)", exponents.xi_pair(1.0, -1.0 / 24.0), 5.0 / 8.0),
        ("xi_pair(5/8,-1/24)", exponents.xi_pair(5.0 / 8.0, -1.0 / 24.0), 1.0 / 3.0),
        ("hide_two_sided(1,1)", exponents.hide_two_sided(1.0, 1.0), 3.0),
        ("hide_two_sided(2,1)", exponents.hide_two_sided(2.0, 1.0), 2.0),
        ("no_cut_delta(1)", exponents.no_cut_delta(1.0), 1.0),
        ("eta_prime(1)", exponents.eta_prime(1.0), 2.0),
        ("mixed_hat_tau(1,1)", exponents.mixed_hat_tau(1.0, 1.0), (2.0 * sqrt7 - 1.0) / 4.0),
        ("radial_hide(1,1)", exponents.radial_hide(1.0, 1.0), 2.0),
        ("bm_hiding(1,1)", exponents.bm_hiding(1, 1), (3.0 + sqrt7) / 2.0),
        ("bm_hiding(4,1)", exponents.bm_hiding(4, 1), 7.0),
        ("min_alpha(8/3)", exponents.min_alpha(8.0 / 3.0), -1.0 / 24.0),
        ("bar_lambda(8/3)", exponents.bar_lambda(8.0 / 3.0), 0.0),
        ("bar_eta(8/3,0)", exponents.bar_eta(8.0 / 3.0, 0.0), 5.0 / 8.0),
    ]
    return [(name, got, want, abs(got - want) <= 1e-12) for name, got, want in cases]


def _selftest_algebra(points: int = 300) -> list:
    rng = np.random.default_rng(20240101)
    checks = []

    worst = 0.0
    for _ in range(points):
        kappa = rng.uniform(0.1, 4.0)
        alpha = rng.uniform(exponents.min_alpha(kappa), 10.0)
        worst = max(worst, abs(exponents.bar_alpha(kappa, exponents.bar_rho(kappa, 0.0, alpha)) - alpha))
    checks.append(("inverse-pair", worst, worst <= 1e-9))

    worst = 0.0
    for _ in range(points):
        kappa = rng.uniform(0.1, 4.0)
        rho = rng.uniform(-2.0 + kappa / 2.0, 6.0)
        beta = rng.uniform(0.0, 5.0)
        lhs = exponents.bar_rho(kappa, rho, beta)
        rhs = exponents.bar_rho(kappa, 0.0, beta + exponents.bar_alpha(kappa, rho))
        worst = max(worst, abs(lhs - rhs))
    checks.append(("additivity", worst, worst <= 1e-9))

    worst = 0.0
    rho = 0.0
    for p in range(1, 9):
        worst = max(worst, abs(rho - exponents.rho_p(p)))
        worst = max(worst, abs(exponents.bar_eta(8.0 / 3.0, rho) - p * (3.0 * p + 2.0) / 8.0))
        rho = exponents.bar_rho(8.0 / 3.0, 0.0, exponents.bar_eta(8.0 / 3.0, rho))
    checks.append(("iteration-closure", worst, worst <= 1e-9))

    worst = 0.0
    for _ in range(points):
        rho = rng.uniform(-1.999, -2.0 / 3.0)
        s = math.sqrt(1.0 + 24.0 * exponents.bar_eta(8.0 / 3.0, rho))
        s2 = math.sqrt(1.0 + 24.0 * exponents.bar_eta(8.0 / 3.0, exponents.dual_rho(8.0 / 3.0, rho)))
        worst = max(worst, abs(s + s2 - 6.0))
    checks.append(("duality", worst, worst <= 1e-9))

    worst = 0.0
    for _ in range(points):
        u, a = rng.uniform(0.0, 8.0, size=2)
        worst = max(worst, abs(exponents.cascade_xi([u, a]) - exponents.xi_pair(u, a)))
    checks.append(("cascade-closed-form", worst, worst <= 1e-12))

    return checks


def cmd_selftest(args) -> int:
    ok = True
    for name, got, want, passed in _selftest_exact():
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name} = {got!r} (expected {want!r})")
    for name, worst, passed in _selftest_algebra():
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: worst deviation {worst:.3g}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slerho",
        description="Exponent calculator and Monte Carlo verification lab for "
        "SLE(kappa,rho) processes.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("exponent", help="evaluate every applicable closed-form exponent")
    p.add_argument("--kappa", type=rational, help="diffusivity parameter of the curve family (> 0)")
    p.add_argument("--rho", type=rational, help="drift weight of the force point at the origin (> -2)")
    p.add_argument("--alpha", type=rational, help="exponent of the one-sided sample the curve is conditioned to avoid")
    p.add_argument("--eta", type=rational, help="exponent of the hiding (outer) restriction sample")
    p.add_argument("--beta", type=rational, help="exponent of the hidden restriction sample")
    p.add_argument("--n", type=rational, help="number of hidden planar walks (or radial inner count)")
    p.add_argument("--m", type=rational, help="number of hiding planar walks")
    p.add_argument("--p", type=int, help="number of mutually avoiding curves (integer >= 1)")
    p.add_argument("--two-sided", action="store_true", help="use the two-sided hiding exponents for (--eta, --beta)")
    p.set_defaults(func=cmd_exponent)

    p = subs.add_parser("simulate", help="sample one driving triple and/or trace, write CSV")
    p.add_argument("--kappa", type=rational, required=True, help="diffusivity parameter (> 0)")
    p.add_argument("--rho", type=rational, required=True, help="force-point weight (> -2)")
    p.add_argument("--a", type=rational, default=1.0, help="start gap between driving and origin image (default 1)")
    p.add_argument("--T", type=rational, default=1.0, help="capacity horizon (default 1)")
    p.add_argument("--dt", type=rational, default=1e-3, help="grid step (default 1e-3)")
    p.add_argument("--seed", type=int, default=1, help="RNG stream key (default 1)")
    p.add_argument("--what", choices=("driving", "trace", "both"), default="both",
                   help="which CSV layout to emit (default both)")
    p.add_argument("--stride", type=int, default=1, help="trace evaluation stride (default 1)")
    p.add_argument("--out", help="output directory (default $SLE_RHO_OUT or ./results)")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("verify-identity", help="two-estimator check of the exact avoidance identity")
    p.add_argument("--kappa", type=rational, required=True, help="diffusivity parameter; needs d >= 2")
    p.add_argument("--rho", type=rational, required=True, help="force-point weight")
    p.add_argument("--alpha", type=rational, required=True, help="avoidance-weighting exponent")
    p.add_argument("--a", type=rational, default=1.0, help="start gap (default 1)")
    add_budget_flags(p, 100_000, 1e-4, 1.0)
    p.set_defaults(func=cmd_verify_identity)

    p = subs.add_parser("verify-restriction", help="trace-avoidance probability of a vertical slit vs phi'(0)^eta")
    p.add_argument("--rho", type=rational, required=True, help="force-point weight at kappa = 8/3 (>= -2/3)")
    p.add_argument("--hull-x", type=rational, default=1.0, help="slit foot on the positive axis (default 1)")
    p.add_argument("--hull-y", type=rational, default=1.0, help="slit height (default 1)")
    p.add_argument("--a", type=rational, default=1e-2, help="start gap (default 0.01)")
    add_budget_flags(p, 10_000, 5e-3, 50.0)
    p.set_defaults(func=cmd_verify_restriction)

    p = subs.add_parser("verify-martingale", help="stationarity of the bounded restriction observable")
    p.add_argument("--rho", type=rational, required=True, help="force-point weight at kappa = 8/3 (> 0)")
    p.add_argument("--hull-x", type=rational, default=1.0, help="slit foot (default 1)")
    p.add_argument("--hull-y", type=rational, default=1.0, help="slit height (default 1)")
    p.add_argument("--a", type=rational, default=0.1, help="start gap (default 0.1)")
    p.add_argument("--checkpoints", type=rational_list, default=[0.05, 0.1, 0.2],
                   help="comma-separated checkpoint times (default 0.05,0.1,0.2)")
    add_budget_flags(p, 10_000, 1e-4, 0.2)
    p.set_defaults(func=cmd_verify_martingale)

    p = subs.add_parser("verify-reweighting", help="direct vs Girsanov-reweighted simulation of a bounded functional")
    p.add_argument("--kappa", type=rational, required=True, help="diffusivity parameter")
    p.add_argument("--rho", type=rational, required=True, help="source force-point weight (d >= 2)")
    p.add_argument("--alpha", type=rational, required=True, help="conditioning exponent (target d >= 2 as well)")
    p.add_argument("--functional", choices=sorted(estimators.FUNCTIONALS), default="gap_above",
                   help="bounded driving-gap functional (default gap_above)")
    p.add_argument("--threshold", type=rational, help="functional threshold c (default 1)")
    add_budget_flags(p, 100_000, 1e-4, 1.0)
    p.set_defaults(func=cmd_verify_reweighting)

    p = subs.add_parser("estimate-decay", help="small-gap decay slope of the avoidance probability")
    p.add_argument("--kappa", type=rational, required=True, help="diffusivity parameter")
    p.add_argument("--rho", type=rational, required=True, help="force-point weight")
    p.add_argument("--alpha", type=rational, required=True, help="avoidance-weighting exponent")
    p.add_argument("--scales", type=rational_list, default=[0.02, 0.05, 0.1, 0.2],
                   help="comma-separated start gaps (default 0.02,0.05,0.1,0.2)")
    add_budget_flags(p, 100_000, 1e-4, 1.0)
    p.set_defaults(func=cmd_estimate_decay)

    p = subs.add_parser("brownian-hiding", help="planar walks hidden from the right across a strip")
    p.add_argument("--n", type=int, required=True, help="number of hidden walks (integer >= 1)")
    p.add_argument("--m", type=int, required=True, help="number of hiding walks (integer >= 1)")
    p.add_argument("--R", type=rational_list, default=[2.0, 3.0, 4.0, 6.0],
                   help="comma-separated strip heights (default 2,3,4,6)")
    p.add_argument("--step-std", type=rational, help="walk step standard deviation (default 0.02)")
    add_budget_flags(p, 100_000, 1.0, 1.0)
    p.set_defaults(func=cmd_brownian_hiding)

    p = subs.add_parser("selftest", help="run the exact-value and algebraic identity suites")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ExperimentInvalidError as err:
        print(f"experiment invalid: {err}", file=sys.stderr)
        return 3
    except (DomainError, GeometryError) as err:
        print(f"domain error: {err}", file=sys.stderr)
        return 2
    except SlerhoError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
