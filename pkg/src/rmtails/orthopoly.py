"""Finite-N gap probabilities from orthogonal polynomials with a hard wall.

The gap probability P_N(lambda_max < z) is the ratio of the partition
function with eigenvalue integrals truncated at z to the free one.  Both are
products of orthogonal-polynomial norms,

    Z_N(z) = h_0(z)^N prod_{i<N} r_i(z)^{N-i},    r_i = h_i / h_{i-1},

so everything reduces to recurrence coefficients of polynomials orthonormal
for the weight e^{-(N/t)V(x)}/(2 pi) on (-inf, z].  Coefficients come from
the Stieltjes procedure on a composite Gauss-Legendre discretisation of the
weight (stable where moment determinants are hopeless); a Hankel-determinant
route on raw moments, with independent adaptive quadrature, serves as a
cross-check oracle for small N.  All internal arithmetic runs at a
configurable number of decimal digits (mpmath).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from mpmath import mp, mpf, workdps

from .potentials import Polynomial, derivative, saddle_points

__all__ = [
    "TruncatedWeight",
    "RecurrenceTable",
    "GapResult",
    "StringResidualReport",
    "PrecisionError",
    "recurrence_coefficients",
    "log_gap_probability",
    "hankel_log_gap",
    "string_residuals",
]

_GL_ORDER = 40


class PrecisionError(RuntimeError):
    """Internal precision (or discretisation) too low for the requested result."""


@dataclass(frozen=True)
class TruncatedWeight:
    """Weight e^{-(N/t)V(x)}/(2 pi) on (-inf, z]; z = +inf means no wall.

    ``precision`` is the decimal-digit count carried by the internal
    arithmetic (default 15, a 64-bit-equivalent working mode; gap
    probabilities smaller than ~10^-precision need more digits).
    """

    V: Polynomial
    t: float
    N: int
    z: float = math.inf
    precision: int = 15

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("coupling t must be positive")
        if self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.precision < 8:
            raise ValueError("precision below 8 digits is not supported")


@dataclass(frozen=True)
class RecurrenceTable:
    """h_0 (log-stored) and three-term coefficients r_1..r_{n-1}, s_0..s_{n-1}."""

    log_h0: float
    r: tuple
    s: tuple


@dataclass(frozen=True)
class GapResult:
    logP: float
    z: float
    t: float
    N: int
    method: str  # "stieltjes" | "hankel"


@dataclass(frozen=True)
class StringResidualReport:
    """Residuals of the integrated string equations on computed coefficients.

    For a finite wall: max_n |(V'(Q)(Q-z))_nn - (2n+1)t/N| over the rows
    n < N - deg V whose Q entries are all computed.  Without a wall: the two
    z = inf integrated equations sqrt(r_n) V'(Q)_{n,n-1} = tn/N and
    V'(Q)_nn = 0 over the same safe range.
    """

    z: float
    hard_wall_max: float | None = None
    hard_wall: tuple = ()
    no_wall_offdiag_max: float | None = None
    no_wall_diag_max: float | None = None


# ----------------------------------------------------------------------
# quadrature scaffolding
# ----------------------------------------------------------------------

_gl_cache = {}


def _gl_nodes(order: int, dps: int):
    """Gauss-Legendre nodes/weights on [-1, 1] at dps digits."""
    key = (order, dps)
    if key in _gl_cache:
        return _gl_cache[key]
    xs64, _ = np.polynomial.legendre.leggauss(order)
    with workdps(dps):
        nodes, weights = [], []
        for x0 in xs64:
            x = mpf(float(x0))
            for _ in range(10):
                p0, p1 = mpf(1), x
                for k in range(2, order + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mpf(10) ** (-dps):
                    break
            p0, p1 = mpf(1), x
            for k in range(2, order + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = order * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    _gl_cache[key] = (nodes, weights)
    return _gl_cache[key]


def _poly_float(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _cutoff(vf, scale, target, direction):
    """Smallest |x| (by bisection) with scale*V(direction*x) > target."""
    x = 1.0
    for _ in range(200):
        if scale * _poly_float(vf, direction * x) > target:
            break
        x *= 2.0
    lo, hi = x / 2.0, x
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if scale * _poly_float(vf, direction * mid) > target:
            hi = mid
        else:
            lo = mid
    return direction * hi


def _weight_window(V: Polynomial, t: float, N: int, precision: int):
    """(L, U): outside, the weight relative to its peak is below 10^-(precision+5)."""
    vf = list(V.coeffs_float())
    vmin = min(float(V(x)) for x, _ in saddle_points(V).real_minima)
    target = (precision + 5) * math.log(10.0) + vmin * N / t
    return (_cutoff(vf, N / t, target, -1.0), _cutoff(vf, N / t, target, +1.0))


def _panel_width(V, t, N, precision):
    curvs = [float(derivative(derivative(V))(x)) for x, _ in saddle_points(V).real_minima]
    sigma = math.sqrt(t / (N * max(1.0, max(curvs))))
    return 4.0 * sigma * 10.0 ** (-(precision + 8) / (2.0 * _GL_ORDER))


def _discrete_measure(V, t, N, z, precision, mult=1, refine=1.0):
    """Composite Gauss-Legendre discretisation of the weight on (L, min(z, U)]."""
    dps = precision + 10
    L, U = _weight_window(V, t, N, precision)
    hi = U if math.isinf(z) else min(z, U)
    if hi <= L:
        raise ValueError("wall position leaves no weight mass in the window")
    span = hi - L
    npan = max(int(math.ceil(span / _panel_width(V, t, N, precision))),
               (40 * N) // _GL_ORDER + 1, 8)
    npan = int(math.ceil(npan * mult * refine))
    xs, ws = _gl_nodes(_GL_ORDER, dps)
    with workdps(dps):
        vq = [mpf(c.numerator) / mpf(c.denominator) for c in V.coeffs]
        scale = mpf(N) / mpf(t)
        Lm, him = mpf(L), mpf(hi)
        nodes, weights = [], []
        twopi = 2 * mp.pi
        for ip in range(npan):
            a0 = Lm + (him - Lm) * ip / npan
            b0 = Lm + (him - Lm) * (ip + 1) / npan
            midp, half = (a0 + b0) / 2, (b0 - a0) / 2
            for xg, wg in zip(xs, ws):
                x = midp + half * xg
                acc = mpf(0)
                for c in reversed(vq):
                    acc = acc * x + c
                nodes.append(x)
                weights.append(wg * half * mp.exp(-scale * acc) / twopi)
    return nodes, weights


def _stieltjes_run(nodes, weights, n_max, dps):
    """Recurrence coefficients for the discrete measure, by Stieltjes.

    Returns (log h0, alphas[0..n_max-1], betas[1..n_max-1]) as mpf.  Uses
    orthonormal polynomials so node values stay O(1).
    """
    with workdps(dps):
        h0 = sum(weights)
        log_h0 = mp.log(h0)
        inv = 1 / h0 ** mpf("0.5")
        p_prev = [mpf(0)] * len(nodes)
        p_cur = [inv] * len(nodes)
        alphas, betas = [], []
        for k in range(n_max):
            ak = sum(w * x * p * p for w, x, p in zip(weights, nodes, p_cur))
            alphas.append(ak)
            if k == n_max - 1:
                break
            sb = betas[-1] ** mpf("0.5") if betas else mpf(0)
            q = [(x - ak) * pc - sb * pp for x, pc, pp in zip(nodes, p_cur, p_prev)]
            bk = sum(w * qq * qq for w, qq in zip(weights, q))
            if bk <= 0:
                raise PrecisionError(
                    "norm ratio became non-positive; increase precision"
                )
            betas.append(bk)
            rb = bk ** mpf("0.5")
            p_prev = p_cur
            p_cur = [qq / rb for qq in q]
        return log_h0, alphas, betas


def _gram_residual(log_h0, alphas, betas, nodes, weights, N, dps):
    """max |<pi_i, pi_j> - delta_ij| for i, j < N on an independent grid."""
    with workdps(dps):
        inv = mp.exp(-log_h0 / 2)
        rows = [[inv] * len(nodes)]
        prev = [mpf(0)] * len(nodes)
        for k in range(N - 1):
            sb = betas[k - 1] ** mpf("0.5") if k > 0 else mpf(0)
            rb = betas[k] ** mpf("0.5")
            nxt = [((x - alphas[k]) * pc - sb * pp) / rb
                   for x, pc, pp in zip(nodes, rows[-1], prev)]
            prev = rows[-1]
            rows.append(nxt)
        worst = mpf(0)
        for i in range(N):
            for j in range(i, N):
                g = sum(w * pi * pj for w, pi, pj in zip(weights, rows[i], rows[j]))
                target = 1 if i == j else 0
                worst = max(worst, abs(g - target))
        return worst


@lru_cache(maxsize=64)
def _tables(coeffs, t, N, z, precision, n_max):
    """Cached (log h0, alphas, betas) with the orthonormality contract enforced."""
    V = Polynomial(coeffs)
    dps = precision + 10
    bound = mpf(10) ** (-(precision - 5))
    for attempt in (1, 2):
        nodes, weights = _discrete_measure(V, t, N, z, precision, mult=attempt)
        log_h0, alphas, betas = _stieltjes_run(nodes, weights, n_max, dps)
        nodes2, weights2 = _discrete_measure(V, t, N, z, precision, mult=attempt, refine=4.0 / 3.0)
        resid = _gram_residual(log_h0, alphas, betas, nodes2, weights2, min(N, n_max), dps)
        if resid < bound:
            return log_h0, tuple(alphas), tuple(betas)
    raise PrecisionError(
        f"orthonormality residual {float(resid):.3e} exceeds 10^-(precision-5); "
        "increase the precision of the TruncatedWeight"
    )


# ----------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------

def recurrence_coefficients(w: TruncatedWeight, n_max: int | None = None) -> RecurrenceTable:
    """Recurrence coefficients of the wall-truncated weight, by Stieltjes.

    ``n_max`` extends the table beyond N (needed for string-equation
    diagnostics).  Raises PrecisionError when the orthonormality residual
    check fails at the requested digit count.
    """
    n_max = w.N if n_max is None else n_max
    log_h0, alphas, betas = _tables(w.V.coeffs, float(w.t), w.N, float(w.z), w.precision, n_max)
    return RecurrenceTable(
        log_h0=float(log_h0),
        r=tuple(float(b) for b in betas),
        s=tuple(float(a) for a in alphas),
    )


def log_gap_probability(w: TruncatedWeight) -> GapResult:
    """log P_N(lambda_max < z) by the Stieltjes route, accumulated in log space."""
    if math.isinf(w.z):
        return GapResult(0.0, w.z, w.t, w.N, "stieltjes")
    lz, _, bz = _tables(w.V.coeffs, float(w.t), w.N, float(w.z), w.precision, w.N)
    li, _, bi = _tables(w.V.coeffs, float(w.t), w.N, math.inf, w.precision, w.N)
    with workdps(w.precision + 10):
        s = (lz - li) * w.N
        for i in range(1, w.N):
            s += (w.N - i) * (mp.log(bz[i - 1]) - mp.log(bi[i - 1]))
        logP = float(s)
    slack = 10.0 ** (-(w.precision - 10)) * (1.0 + w.N * w.N / w.t)
    if logP > slack:
        raise PrecisionError(
            f"gap probability came out positive ({logP:.3e}); increase precision"
        )
    return GapResult(min(logP, 0.0), w.z, w.t, w.N, "stieltjes")


@lru_cache(maxsize=128)
def _hankel_moments(coeffs, t, N, z, precision):
    """Moments mu_k = int_-inf^z x^k e^{-(N/t)V}/(2 pi) dx, k < 2N-1.

    Independent route: adaptive (tanh-sinh) quadrature on segments split at
    the stationary points of V, with weight values cached across k.
    """
    V = Polynomial(coeffs)
    dps = precision + 12
    L, U = _weight_window(V, t, N, precision + 5)
    hi = U if math.isinf(z) else min(z, U)
    sp = saddle_points(V)
    splits = sorted(x for x, _ in sp.real_minima + sp.real_maxima if L < x < hi)
    with workdps(dps):
        vq = [mpf(c.numerator) / mpf(c.denominator) for c in V.coeffs]
        scale = mpf(N) / mpf(t)
        twopi = 2 * mp.pi
        cache = {}

        def wt(x):
            val = cache.get(x)
            if val is None:
                acc = mpf(0)
                for c in reversed(vq):
                    acc = acc * x + c
                val = mp.exp(-scale * acc) / twopi
                cache[x] = val
            return val

        pts = [mpf(L)] + [mpf(s) for s in splits] + [mpf(hi)]
        mus = []
        for k in range(2 * N - 1):
            mus.append(mp.quad(lambda x: x ** k * wt(x), pts))
        return tuple(mus)


def hankel_log_gap(w: TruncatedWeight) -> GapResult:
    """log P_N via Hankel determinants of raw moments (oracle, N <= 8 only)."""
    if w.N > 8:
        raise ValueError("hankel_log_gap is limited to N <= 8 (moment conditioning)")
    if math.isinf(w.z):
        return GapResult(0.0, w.z, w.t, w.N, "hankel")
    mus_z = _hankel_moments(w.V.coeffs, float(w.t), w.N, float(w.z), w.precision)
    mus_i = _hankel_moments(w.V.coeffs, float(w.t), w.N, math.inf, w.precision)
    with workdps(w.precision + 12):
        def logdet(mus):
            A = mp.matrix(w.N, w.N)
            for i in range(w.N):
                for j in range(w.N):
                    A[i, j] = mus[i + j]
            return mp.log(mp.det(A))

        logP = float(logdet(mus_z) - logdet(mus_i))
    return GapResult(min(logP, 0.0), w.z, w.t, w.N, "hankel")


def string_residuals(w: TruncatedWeight, tab: RecurrenceTable | None = None) -> StringResidualReport:
    """Integrated string-equation residuals on the computed coefficients.

    Builds the (N + deg V)-sized tridiagonal Q from genuine (not
    extrapolated) extended coefficients and reports residuals only for rows
    n < N - deg V where every entry of V'(Q)(Q - z) is available.
    """
    d = w.V.degree
    n_tot = w.N + d
    if tab is None or len(tab.s) < n_tot:
        tab = recurrence_coefficients(w, n_max=n_tot)
    Q = np.zeros((n_tot, n_tot))
    for i in range(n_tot):
        Q[i, i] = tab.s[i]
    for i in range(1, n_tot):
        Q[i, i - 1] = Q[i - 1, i] = math.sqrt(tab.r[i - 1])
    vp = derivative(w.V).coeffs_float()
    VpQ = np.zeros_like(Q)
    for c in vp[::-1]:
        VpQ = VpQ @ Q + c * np.eye(n_tot)
    n_safe = max(w.N - d, 0)
    if not math.isinf(w.z):
        M = VpQ @ (Q - w.z * np.eye(n_tot))
        res = tuple(abs(M[n, n] - (2 * n + 1) * w.t / w.N) for n in range(n_safe))
        return StringResidualReport(
            z=w.z, hard_wall_max=max(res) if res else None, hard_wall=res
        )
    off = max(
        (abs(math.sqrt(tab.r[n - 1]) * VpQ[n, n - 1] - w.t * n / w.N) for n in range(1, n_safe)),
        default=None,
    )
    dia = max((abs(VpQ[n, n]) for n in range(n_safe)), default=None)
    return StringResidualReport(z=w.z, no_wall_offdiag_max=off, no_wall_diag_max=dia)
