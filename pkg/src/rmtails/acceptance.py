"""Acceptance suites: every release-gating numerical contract as a named check.

Each suite returns a list of Check records; the CLI ``verify`` command and
the pytest acceptance module both run these, so the gate is identical in
both entry points.  Tolerances are pinned here and nowhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .montecarlo import SamplerConfig, empirical_density, lambda_max_stats, sample
from .orthopoly import TruncatedWeight, hankel_log_gap, log_gap_probability, string_residuals
from .potentials import (
    Polynomial,
    count_real_roots,
    derivative,
    gaussian_potential,
    multicritical_potential,
    saddle_points,
)
from .rate_functions import (
    _critical_eps,
    edge_exponent,
    gaussian_action,
    gaussian_left_F,
    hard_wall_states,
    k1_string_residuals,
    left_tail_general,
    multicritical_action,
    psi_minus,
    psi_plus,
)
from .spectral_curve import (
    _EndpointSolver,
    density,
    instanton_action,
    right_tail_log_prob,
    solve_one_cut,
)

__all__ = ["Check", "SUITES", "run_suite", "run_all"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _check(name, value, bound, fmt="max dev %.3e (bound %.1e)"):
    return Check(name, bool(value < bound), fmt % (value, bound))


# -- 1 -----------------------------------------------------------------

def suite_gaussian_closed_forms():
    zs = np.linspace(0.0, 1.4, 50)
    d1 = max(abs(-2 * 0.25 * psi_minus(z) - gaussian_left_F(z, 0.5)) for z in zs)
    zs = np.linspace(math.sqrt(2) + 1e-9, 5.0, 50)
    d2 = max(abs(psi_plus(z) - gaussian_action(0.5, z)) for z in zs)
    return [
        _check("left: -2 t^2 psi_minus == gaussian_left_F at t=1/2", d1, 1e-10),
        _check("right: psi_plus == gaussian_action at t=1/2", d2, 1e-10),
    ]


# -- 2 -----------------------------------------------------------------

def suite_action_vs_quadrature():
    sol_g = solve_one_cut(gaussian_potential(), 1.0)
    d1 = max(
        abs(gaussian_action(1.0, z) - instanton_action(sol_g, z).A)
        for z in np.linspace(2.05, 6.0, 40)
    )
    sol_1 = solve_one_cut(multicritical_potential(1), 1.0)
    d2 = max(
        abs(multicritical_action(sol_1, z) - instanton_action(sol_1, z).A)
        for z in np.linspace(1.01, 2.0, 40)
    )
    return [
        _check("gaussian action == quadrature on [2.05, 6]", d1, 1e-10),
        _check("k=1 closed-form action == quadrature on [1.01, 2]", d2, 1e-8),
    ]


# -- 3 -----------------------------------------------------------------

def suite_endpoints():
    sol_g = solve_one_cut(gaussian_potential(), 1.0)
    d1 = max(abs(sol_g.b + 2.0), abs(sol_g.a - 2.0))
    sol_1 = solve_one_cut(multicritical_potential(1), 1.0)
    d2 = max(abs(sol_1.b), abs(sol_1.a - 1.0))
    xs = np.linspace(0.2, 0.8, 13)
    ratios = np.array(
        [density(sol_1, x) / (x ** 0.5 * (1.0 - x) ** 2.5) for x in xs]
    )
    d3 = float(np.max(np.abs(ratios / ratios[0] - 1.0)))
    return [
        _check("gaussian endpoints (-2, 2)", d1, 1e-12),
        _check("k=1 endpoints (0, 1)", d2, 1e-8),
        _check("k=1 density ratio to x^(1/2)(1-x)^(5/2) constant", d3, 1e-6),
    ]


# -- 4 -----------------------------------------------------------------

def suite_edge_exponents():
    checks = []
    s = edge_exponent(lambda z: gaussian_left_F(z, 1.0), 2.0, "left")
    checks.append(_check("gaussian left slope 3.0", abs(s - 3.0), 0.05, "slope dev %.3f (bound %.2f)"))
    s = edge_exponent(lambda z: gaussian_action(1.0, z), 2.0, "right")
    checks.append(_check("gaussian right slope 1.5", abs(s - 1.5), 0.05, "slope dev %.3f (bound %.2f)"))
    V1 = multicritical_potential(1)
    s = edge_exponent(lambda z: left_tail_general(V1, 1.0, z).value, 1.0, "left")
    checks.append(_check("k=1 left slope 7.0", abs(s - 7.0), 0.2, "slope dev %.3f (bound %.2f)"))
    sol_1 = solve_one_cut(V1, 1.0)
    s = edge_exponent(lambda z: multicritical_action(sol_1, z), sol_1.a, "right")
    checks.append(_check("k=1 right slope 3.5", abs(s - 3.5), 0.05, "slope dev %.3f (bound %.2f)"))
    return checks


# -- 5 -----------------------------------------------------------------

def suite_finite_n_oracles():
    checks = []
    grids = {
        "gaussian": (gaussian_potential(), np.linspace(-1.0, 3.0, 10)),
        "multicritical k=1": (multicritical_potential(1), np.linspace(0.2, 1.6, 10)),
    }
    for label, (V, zs) in grids.items():
        worst = 0.0
        for N in range(2, 7):
            for z in zs:
                w = TruncatedWeight(V=V, t=1.0, N=N, z=float(z), precision=50)
                worst = max(worst, abs(log_gap_probability(w).logP - hankel_log_gap(w).logP))
        checks.append(_check(f"{label}: stieltjes vs hankel, N=2..6", worst, 1e-8))
    w = TruncatedWeight(V=gaussian_potential(), t=1.0, N=2, z=0.0, precision=50)
    dev = abs(log_gap_probability(w).logP - math.log(0.25 - 1.0 / (2.0 * math.pi)))
    checks.append(_check("gaussian N=2 z=0 closed form", dev, 1e-10))
    return checks


# -- 6 -----------------------------------------------------------------

def suite_string_residuals():
    checks = []
    rep = string_residuals(TruncatedWeight(V=gaussian_potential(), t=1.0, N=10, z=1.0, precision=40))
    checks.append(_check("integrated string eq, gaussian N=10 z=1", rep.hard_wall_max, 1e-6))
    V1 = multicritical_potential(1)
    rep = string_residuals(TruncatedWeight(V=V1, t=1.0, N=8, z=1.3, precision=40))
    checks.append(_check("integrated string eq, k=1 N=8 z=1.3", rep.hard_wall_max, 1e-5))
    rep = string_residuals(TruncatedWeight(V=gaussian_potential(), t=1.0, N=10, precision=40))
    checks.append(
        _check("no-wall integrated equations, gaussian N=10",
               max(rep.no_wall_offdiag_max, rep.no_wall_diag_max), 1e-8)
    )
    z = 0.9
    eps_c = _critical_eps(_EndpointSolver(V1), 1.0, z)
    zetas = np.linspace(1.0 - 0.75 * eps_c, 1.0, 41)
    states = hard_wall_states(V1, 1.0, z, zetas)
    r1, r2 = k1_string_residuals(states, z)
    checks.append(_check("k=1 planar integrated residual", r1, 1e-8))
    checks.append(_check("k=1 planar differential residual", r2, 1e-5))
    return checks


# -- 7 -----------------------------------------------------------------

def suite_asymptotic_match():
    sol = solve_one_cut(gaussian_potential(), 1.0)
    z = 2.2
    ratios = {}
    for N in (20, 40):
        w = TruncatedWeight(V=gaussian_potential(), t=1.0, N=N, z=z, precision=50)
        ratios[N] = log_gap_probability(w).logP / right_tail_log_prob(sol, z, N)
    in_window = 0.75 <= ratios[20] <= 1.25
    improves = abs(ratios[40] - 1.0) < abs(ratios[20] - 1.0)
    return [
        Check("finite-N / instanton ratio at N=20 in [0.75, 1.25]", bool(in_window),
              f"ratio {ratios[20]:.6f}"),
        Check("ratio closer to 1 at N=40", bool(improves),
              f"|r40-1|={abs(ratios[40] - 1):.2e} vs |r20-1|={abs(ratios[20] - 1):.2e}"),
    ]


# -- 8 -----------------------------------------------------------------

def suite_ode_consistency():
    h = 1e-5
    worst = 0.0
    for zeta in np.linspace(0.2, 1.2, 5):
        for z in np.linspace(2.0 * math.sqrt(1.2) + 0.3, 6.0, 4):
            dA = (gaussian_action(zeta + h, z) - gaussian_action(zeta - h, z)) / (2 * h)
            worst = max(worst, abs(4.0 * zeta * math.cosh(dA / 2.0) ** 2 - z * z))
    return [_check("4 zeta cosh^2(A'/2) = z^2 at 20 grid points", worst, 1e-6)]


# -- 9 -----------------------------------------------------------------

def suite_montecarlo():
    checks = []
    cfg = SamplerConfig(V=gaussian_potential(), t=1.0, N=2, sweeps=3_000_000,
                        burn_in=2_000, thin=3, seed=20260810)
    states = sample(cfg)
    frac = np.mean([1.0 if s.max() < 0.0 else 0.0 for s in states])
    p_exact = 0.25 - 1.0 / (2.0 * math.pi)
    checks.append(_check("N=2 P(lambda_max < 0) within 3 sigma", abs(frac - p_exact), 3e-3,
                         "dev %.2e (bound %.1e)"))

    cfg = SamplerConfig(V=gaussian_potential(), t=1.0, N=50, sweeps=2_000,
                        burn_in=400, thin=5, seed=7)
    states = sample(cfg)
    pooled = np.sort(np.concatenate([np.asarray(s.lam) for s in states]))
    semicircle_cdf = 0.5 + (pooled * np.sqrt(np.maximum(4.0 - pooled ** 2, 0.0))
                            + 4.0 * np.arcsin(np.clip(pooled / 2.0, -1, 1))) / (4.0 * np.pi)
    semicircle_cdf[pooled > 2.0] = 1.0
    semicircle_cdf[pooled < -2.0] = 0.0
    emp = (np.arange(pooled.size) + 0.5) / pooled.size
    ks = float(np.max(np.abs(emp - semicircle_cdf)))
    checks.append(_check("N=50 semicircle KS distance", ks, 0.05, "KS %.3f (bound %.2f)"))

    cfg = SamplerConfig(V=multicritical_potential(1), t=1.0, N=50, sweeps=2_000,
                        burn_in=400, thin=5, seed=11)
    mean_max = lambda_max_stats(sample(cfg)).mean
    ok = 0.85 <= mean_max <= 1.05
    checks.append(Check("k=1 N=50 mean lambda_max in [0.85, 1.05]", bool(ok), f"mean {mean_max:.4f}"))
    return checks


# -- 10 ----------------------------------------------------------------

def suite_sturm_roots():
    checks = []
    for k in range(7):
        Vp = derivative(multicritical_potential(k))
        n_all = count_real_roots(Vp)
        bound = 1 + max(abs(c) for c in Vp.coeffs) / abs(Vp.leading)
        n_pos = count_real_roots(Vp, (0, bound))
        sp = saddle_points(multicritical_potential(k))
        ok = (n_all == 1 and n_pos == 1 and len(sp.real_minima) == 1
              and sp.real_minima[0][0] > 0)
        checks.append(Check(f"V_{k}: one real critical point, a positive minimum",
                            bool(ok), f"sturm {n_all}, on (0, bound) {n_pos}"))
    return checks


SUITES = {
    "gaussian-closed-forms": suite_gaussian_closed_forms,
    "action-vs-quadrature": suite_action_vs_quadrature,
    "endpoints": suite_endpoints,
    "edge-exponents": suite_edge_exponents,
    "finite-n-oracles": suite_finite_n_oracles,
    "string-residuals": suite_string_residuals,
    "asymptotic-match": suite_asymptotic_match,
    "ode-consistency": suite_ode_consistency,
    "montecarlo": suite_montecarlo,
    "sturm-roots": suite_sturm_roots,
}


def run_suite(name):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    return SUITES[name]()


def run_all(names=None):
    names = list(SUITES) if names is None else list(names)
    return {name: run_suite(name) for name in names}
