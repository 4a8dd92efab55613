"""Metropolis sampler of the joint eigenvalue density.

Targets Delta(lambda)^2 exp(-(N/t) sum V(lambda_i)) with an optional hard
wall lambda_i <= z, using single-coordinate Gaussian proposals.  This is a
bulk/near-edge validation tool: deep-tail probabilities are exponentially
small and belong to the orthogonal-polynomial route, not to direct sampling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .potentials import Polynomial, derivative, saddle_points
from .spectral_curve import OneCutError, solve_one_cut

__all__ = [
    "GasState",
    "SamplerConfig",
    "LambdaMaxSummary",
    "sample",
    "sample_chains",
    "empirical_density",
    "lambda_max_stats",
    "states_to_csv",
]

PRNG_NAME = "numpy.random.Generator(PCG64), 64-bit integer seed"


@dataclass(frozen=True)
class GasState:
    """Eigenvalue positions of one kept Monte Carlo state."""

    lam: tuple

    def max(self) -> float:
        return max(self.lam)


@dataclass(frozen=True)
class SamplerConfig:
    V: Polynomial
    t: float
    N: int
    wall: float | None = None
    step: float | None = None       # proposal scale; adapted during burn-in
    sweeps: int = 2000              # kept-phase sweeps (one sweep = N updates)
    burn_in: int = 500
    thin: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.t <= 0 or self.N < 1 or self.sweeps < 1 or self.burn_in < 0 or self.thin < 1:
            raise ValueError("invalid sampler configuration")


def _initial_state(cfg: SamplerConfig) -> np.ndarray:
    """Equally spaced points on the unconstrained support estimate."""
    try:
        sol = solve_one_cut(cfg.V, cfg.t)
        b, a = sol.b, sol.a
    except OneCutError:
        x0, _ = min(saddle_points(cfg.V).real_minima, key=lambda mv: (mv[1], mv[0]))
        vpp = max(float(derivative(derivative(cfg.V))(x0)), 1e-8)
        half = 2.0 * math.sqrt(cfg.t / vpp)
        b, a = x0 - half, x0 + half
    if cfg.wall is not None:
        a = min(a, cfg.wall - 0.05 * (a - b))
        b = min(b, a - 1e-3)
    lam = np.linspace(b, a, cfg.N + 2)[1:-1] if cfg.N > 1 else np.array([0.5 * (a + b)])
    if len(set(lam.tolist())) != cfg.N:
        raise ValueError("initial state has coincident eigenvalues")
    return lam


def _polyval(vc, x):
    acc = 0.0
    for c in vc[::-1]:
        acc = acc * x + c
    return acc


def sample(cfg: SamplerConfig) -> list:
    """Run the Metropolis chain; returns the thinned post-burn-in states.

    Move: lambda_i -> lambda_i + step * xi with one coordinate per update
    and log-density difference 2 sum_{j != i} log|.| - (N/t) Delta V; moves
    crossing the wall are rejected outright.  During burn-in the step adapts
    toward a 0.35 acceptance rate; it is frozen afterwards so the kept chain
    is a genuine Metropolis chain.
    """
    rng = np.random.default_rng(cfg.seed)
    lam = _initial_state(cfg)
    N = cfg.N
    vc = cfg.V.coeffs_float()
    scale = -float(N) / cfg.t  # multiplies V in the log-density
    step = cfg.step if cfg.step is not None else 0.3 * (lam.max() - lam.min() + 1.0) / math.sqrt(N)
    kept = []
    accepted = tried = 0
    total_sweeps = cfg.burn_in + cfg.sweeps
    for sweep in range(total_sweeps):
        for i in range(N):
            old = lam[i]
            new = old + step * rng.standard_normal()
            tried += 1
            if cfg.wall is not None and new > cfg.wall:
                continue
            if N > 1:
                others = np.delete(lam, i)
                d_new = new - others
                d_old = old - others
                if np.any(d_new == 0.0):
                    continue
                log_vdm = 2.0 * (np.log(np.abs(d_new)).sum() - np.log(np.abs(d_old)).sum())
            else:
                log_vdm = 0.0
            dlog = log_vdm + scale * (_polyval(vc, new) - _polyval(vc, old))
            if dlog >= 0.0 or rng.random() < math.exp(dlog):
                lam[i] = new
                accepted += 1
        if sweep < cfg.burn_in:
            # adapt every 50 sweeps toward acceptance 0.35 +- 0.15
            if (sweep + 1) % 50 == 0 and tried:
                rate = accepted / tried
                if rate < 0.20:
                    step *= 0.7
                elif rate > 0.50:
                    step *= 1.4
                accepted = tried = 0
        else:
            if (sweep - cfg.burn_in + 1) % cfg.thin == 0:
                kept.append(GasState(tuple(lam.tolist())))
    return kept


def sample_chains(cfg: SamplerConfig, n_chains: int) -> list:
    """Merge several independent chains; chain i uses seed ^ i as its stream."""
    merged = []
    for i in range(n_chains):
        merged.extend(sample(SamplerConfig(
            V=cfg.V, t=cfg.t, N=cfg.N, wall=cfg.wall, step=cfg.step,
            sweeps=cfg.sweeps, burn_in=cfg.burn_in, thin=cfg.thin,
            seed=cfg.seed ^ i,
        )))
    return merged


def empirical_density(states, bins=60):
    """Normalised histogram of all eigenvalues with per-bin standard errors.

    Returns (edges, density, stderr); the density integrates to one by
    construction.  Errors are binomial on the pooled counts and ignore chain
    autocorrelation, so treat them as lower bounds.
    """
    if len(states) < 100:
        raise ValueError("need at least 100 states for a density estimate")
    pooled = np.concatenate([np.asarray(s.lam) for s in states])
    counts, edges = np.histogram(pooled, bins=bins)
    total = pooled.size
    widths = np.diff(edges)
    density = counts / (total * widths)
    stderr = np.sqrt(np.maximum(counts, 1.0)) / (total * widths)
    return edges, density, stderr


@dataclass(frozen=True)
class LambdaMaxSummary:
    mean: float
    mean_err: float
    quantiles: dict
    cdf: dict = field(default_factory=dict)       # z -> (estimate, bootstrap error)
    n_states: int = 0


def lambda_max_stats(states, z_values=(), n_boot=200, seed=12345) -> LambdaMaxSummary:
    """Plug-in estimators for the largest eigenvalue with bootstrap errors."""
    if len(states) < 100:
        raise ValueError("need at least 100 states for lambda_max statistics")
    mx = np.array([s.max() for s in states])
    rng = np.random.default_rng(seed)
    n = mx.size
    boot_means = np.empty(n_boot)
    boot_cdf = {z: np.empty(n_boot) for z in z_values}
    for b in range(n_boot):
        idx = rng.integers(0, n, n)
        sampled = mx[idx]
        boot_means[b] = sampled.mean()
        for z in z_values:
            boot_cdf[z][b] = np.mean(sampled < z)
    quantiles = {q: float(np.quantile(mx, q)) for q in (0.05, 0.25, 0.5, 0.75, 0.95)}
    cdf = {
        float(z): (float(np.mean(mx < z)), float(boot_cdf[z].std()))
        for z in z_values
    }
    return LambdaMaxSummary(
        mean=float(mx.mean()),
        mean_err=float(boot_means.std()),
        quantiles=quantiles,
        cdf=cdf,
        n_states=n,
    )


def states_to_csv(states, path):
    """One row per kept state, eigenvalues sorted ascending, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        n = len(states[0].lam) if states else 0
        writer.writerow([f"lambda_{i + 1}" for i in range(n)])
        for s in states:
            writer.writerow([format(v, ".17g") for v in sorted(s.lam)])
