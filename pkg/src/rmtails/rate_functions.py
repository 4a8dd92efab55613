"""Large-deviation rate functions for the largest eigenvalue.

Closed forms for the Gaussian ensemble (left and right tails) and for the
right tail of the first multi-critical potential, plus a potential-generic
left-tail solver built on the planar hard-wall picture: for couplings where
the wall at z is active, the gas occupies [b_soft, z] with density

    rho(x) = Mt(x) sqrt(x - b_soft) / (2 pi zeta sqrt(z - x)),

and the planar recurrence coefficients follow the hard-wall dictionary
R = ((z - b_soft)/4)^2, S = (z + b_soft)/2.  The order-N^2 free energy is
the coupling integral of (t - zeta) log(R(zeta, z) / R(zeta, inf)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potentials import Polynomial, derivative, multicritical_potential
from .spectral_curve import OneCutSolution, TailResult, _EndpointSolver, _sqrt_branch_series

__all__ = [
    "LeftTailPlanarState",
    "TailResult",
    "psi_minus",
    "psi_plus",
    "gaussian_left_F",
    "gaussian_action",
    "multicritical_action",
    "left_tail_general",
    "hard_wall_states",
    "k1_string_residuals",
    "edge_exponent",
]

_SQRT2 = math.sqrt(2.0)


# ----------------------------------------------------------------------
# Gaussian closed forms
# ----------------------------------------------------------------------

def psi_minus(z: float) -> float:
    """Left rate function of the Gaussian ensemble (edge at sqrt(2)).

    Controls the e^{-2 N^2 psi_-} decay of pushing the largest eigenvalue
    into the bulk; returns 0 right of the edge (out of the left tail).
    """
    if z > _SQRT2:
        return 0.0
    s = math.sqrt(z * z + 6.0)
    return (
        z * z / 3.0
        - z ** 4 / 108.0
        - s * (z ** 3 + 15.0 * z) / 108.0
        - 0.5 * math.log((s + z) / _SQRT2)
        + 0.5 * math.log(3.0)
    )


def psi_plus(z: float) -> float:
    """Right rate function of the Gaussian ensemble (edge at sqrt(2))."""
    if z < _SQRT2:
        raise ValueError("psi_plus is defined for z >= sqrt(2)")
    s = math.sqrt(max(z * z - 2.0, 0.0))
    return 0.5 * z * s + math.log((z - s) / _SQRT2)


def gaussian_left_F(z: float, t: float) -> float:
    """Order-N^2 left-tail free energy g_s^2 F for the Gaussian at coupling t.

    Vanishes (with its first two z-derivatives) at the edge z = 2 sqrt(t)
    and is identically zero to its right: pulling one eigenvalue out costs
    only O(N), pushing the bulk costs O(N^2).
    """
    if t <= 0:
        raise ValueError("coupling t must be positive")
    if z >= 2.0 * math.sqrt(t):
        return 0.0
    s = math.sqrt(z * z + 12.0 * t)
    return (
        -t * z * z / 3.0
        + z ** 4 / 216.0
        + z * (z * z + 30.0 * t) * s / 216.0
        + t * t * math.log((z + s) / (6.0 * math.sqrt(t)))
    )


def gaussian_action(t: float, z: float) -> float:
    """Gaussian instanton action A(t, z) = int_{2 sqrt(t)}^z sqrt(x^2 - 4t) dx."""
    if t <= 0:
        raise ValueError("coupling t must be positive")
    if z < 2.0 * math.sqrt(t):
        raise ValueError("gaussian_action needs z >= 2 sqrt(t)")
    return 0.5 * z * z * math.sqrt(max(1.0 - 4.0 * t / (z * z), 0.0)) - t * math.acosh(
        max(z * z / (2.0 * t) - 1.0, 1.0)
    )


# ----------------------------------------------------------------------
# first multi-critical potential: closed-form action
# ----------------------------------------------------------------------

def multicritical_action(sol: OneCutSolution, z: float) -> float:
    """Closed-form instanton action for the k = 1 multi-critical potential.

    ``sol`` must be the one-cut solution of the k = 1 potential; a and b are
    its support endpoints.  Equals the quadrature int_a^z y(x) dx.
    """
    if sol.V != multicritical_potential(1):
        raise ValueError("multicritical_action applies to the k = 1 potential only")
    if z < sol.a:
        raise ValueError("multicritical_action needs z >= a")
    a, b = sol.a, sol.b
    s = math.sqrt(max((a - z) * (b - z), 0.0))
    P = (
        45.0 * a ** 3
        + 45.0 * b ** 3
        + 3.0 * a * a * (-40.0 + 9.0 * b - 6.0 * z)
        - 6.0 * b * b * (20.0 + 3.0 * z)
        + b * (90.0 + 80.0 * z - 24.0 * z * z)
        - 4.0 * z * (45.0 - 40.0 * z + 12.0 * z * z)
        + a * (90.0 + 27.0 * b * b + 80.0 * z - 24.0 * z * z - 4.0 * b * (20.0 + 3.0 * z))
    )
    Q = 15.0 * a * a + 2.0 * a * (-20.0 + 9.0 * b) + 5.0 * (6.0 - 8.0 * b + 3.0 * b * b)
    arg = max(-(a + b - 2.0 * z) / (a - b), 1.0)
    return (2.0 / 15.0) * (-2.0 * s * P - 3.0 * (a - b) ** 2 * Q * math.acosh(arg))


# ----------------------------------------------------------------------
# hard-wall constrained planar solver
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class LeftTailPlanarState:
    """Planar recurrence data at one coupling of the wall-constrained gas."""

    zeta: float
    R: float
    S: float
    b_soft: float


class _HardWallSolver:
    """Soft edge b of the gas squeezed between -inf and a hard wall at z.

    Mt (degree deg V') follows from matching the large-x series of
    V'(x) + Mt(x) sqrt((x - b)/(x - z)) down to x^0; the remaining x^{-1}
    coefficient must equal 2 zeta (unit mass), which fixes b by Newton.
    """

    def __init__(self, V: Polynomial, z: float):
        self.vp = list(derivative(V).coeffs_float())
        self.z = float(z)
        self.dm = len(self.vp) - 1

    def mass_residual(self, b: float, zeta: float):
        dm, nser = self.dm, self.dm + 3
        e = np.convolve(
            _sqrt_branch_series(b, nser, 0.5), _sqrt_branch_series(self.z, nser, -0.5)
        )[:nser]
        m = np.zeros(dm + 1)
        for i in range(dm, -1, -1):
            s = 0.0
            for j in range(1, dm - i + 1):
                s += m[i + j] * e[j]
            m[i] = -self.vp[i] - s
        return sum(m[i] * e[i + 1] for i in range(dm + 1)) - 2.0 * zeta, m

    def solve(self, zeta: float, b0: float):
        b = b0
        h = 1e-7 * (1.0 + abs(self.z - b0))
        for _ in range(100):
            fb, m = self.mass_residual(b, zeta)
            if abs(fb) < 1e-13 * (1.0 + abs(zeta)):
                return b, m
            fp = (self.mass_residual(b + h, zeta)[0] - self.mass_residual(b - h, zeta)[0]) / (2 * h)
            step = fb / fp
            while b - step >= self.z - 1e-12 * (1 + abs(self.z)):
                step *= 0.5
            b -= step
        raise RuntimeError(
            f"hard-wall soft-edge iteration did not converge at zeta={zeta!r} "
            f"(wall z={self.z!r}, residual {fb:.3e})"
        )


def _critical_eps(endpoints: _EndpointSolver, t: float, z: float):
    """Largest coupling with inactive wall, as eps_c = t - zeta_c.

    Found from a(t - eps) = z by geometric marching plus bisection; a(zeta)
    is increasing, so eps_c is unique.
    """
    eps = 1e-14 * t
    c, r = endpoints.solve(t, eps_below=eps)
    if float(c + r) <= z:
        return eps
    lo = eps
    while True:
        eps *= 4.0
        eps_cl = min(eps, t * (1.0 - 1e-9))
        c, r = endpoints.solve(t, eps_below=eps_cl)
        if float(c + r) <= z or eps_cl < eps:
            hi = eps_cl
            break
        lo = eps
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        c, r = endpoints.solve(t, eps_below=mid)
        if float(c + r) > z:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-12:
            break
    return math.sqrt(lo * hi)


def _geometric_panels(eps_c: float, n_half: int = 24):
    """Panel edges on [0, eps_c], refined geometrically toward both ends."""
    mid = 0.5 * eps_c
    lower = [mid * 0.5 ** j for j in range(n_half, 0, -1)]
    upper = [eps_c - mid * 0.5 ** j for j in range(1, n_half + 1)]
    return [0.0] + lower + upper + [eps_c]


def left_tail_general(V: Polynomial, t: float, z: float, gl_order: int = 12) -> TailResult:
    """Order-N^2 left-tail free energy for an arbitrary one-cut potential.

    Integrates (t - zeta) log(R(zeta, z)/R(zeta, inf)) over the couplings
    where the wall is active, with R from the constrained planar solution
    and R(zeta, inf) = ((a - b)/4)^2 from the unconstrained one.  Requires
    b(t) < z (the wall must not crush the gas entirely); returns 0 for z at
    or beyond the soft edge a(t).
    """
    endpoints = _EndpointSolver(V)
    c, r = endpoints.solve(t)
    b_t, a_t = float(c - r), float(c + r)
    if z >= a_t:
        return TailResult(0.0, method="planar_solver", order="leading_N2")
    if z <= b_t:
        raise ValueError(
            f"left_tail_general requires b(t) < z < a(t); z={z!r} is at or below "
            f"the lower edge {b_t!r}"
        )
    eps_c = _critical_eps(endpoints, t, z)
    wall = _HardWallSolver(V, z)
    xg, wg = np.polynomial.legendre.leggauss(gl_order)
    edges = _geometric_panels(eps_c)
    total = 0.0
    b_warm = None
    for lo, hi in zip(edges[:-1], edges[1:]):
        midp, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        for xi, wi in zip(xg, wg):
            eps = midp + half * xi
            c, r = endpoints.solve(t, eps_below=eps)
            a_minus_b = float(2 * r)
            if b_warm is None:
                b_warm = float(c - r)
            zeta = t - eps
            b_soft, _ = wall.solve(zeta, b_warm)
            b_warm = b_soft
            total += wi * half * eps * 2.0 * math.log((z - b_soft) / a_minus_b)
    return TailResult(float(total), method="planar_solver", order="leading_N2")


def hard_wall_states(V: Polynomial, t: float, z: float, zetas) -> list:
    """Constrained planar states (zeta, R, S, b_soft) on a given coupling grid."""
    wall = _HardWallSolver(V, z)
    endpoints = _EndpointSolver(V)
    states = []
    b_warm = None
    for zeta in zetas:
        if b_warm is None:
            c, r = endpoints.solve(zeta)
            b_warm = float(c - r)
        b_soft, _ = wall.solve(zeta, b_warm)
        b_warm = b_soft
        states.append(
            LeftTailPlanarState(
                zeta=float(zeta),
                R=((z - b_soft) / 4.0) ** 2,
                S=(z + b_soft) / 2.0,
                b_soft=b_soft,
            )
        )
    return states


# ----------------------------------------------------------------------
# k = 1 string-equation diagnostics
# ----------------------------------------------------------------------

def _k1_integrated(R, S, z):
    return (16.0 / 5.0) * (
        60 * R + 96 * R * R - 5 * S - 240 * R * S + 30 * S * S + 192 * R * S * S
        - 40 * S ** 3 + 16 * S ** 4 + 5 * z + 80 * R * z - 30 * S * z
        - 96 * R * S * z + 40 * S * S * z - 16 * S ** 3 * z
    )


def _k1_bracket(R, S, z):
    return (16.0 / 5.0) * (
        -5 * R - 120 * R * R + 60 * R * S + 192 * R * R * S - 120 * R * S * S
        + 64 * R * S ** 3 - 30 * R * z - 48 * R * R * z + 80 * R * S * z
        - 48 * R * S * S * z
    )


def k1_string_residuals(states, z: float):
    """Residuals of the two planar k = 1 string equations on a state grid.

    The first (integrated) equation is algebraic and checked pointwise; the
    second involves d/dzeta and uses three-point finite differences on the
    grid, so its residual is truncation-limited.  Returns the two maxima.
    """
    res1 = max(abs(_k1_integrated(s.R, s.S, z) - 2.0 * s.zeta) for s in states)
    res2 = 0.0
    for prev, cur, nxt in zip(states, states[1:], states[2:]):
        h1 = cur.zeta - prev.zeta
        h2 = nxt.zeta - cur.zeta
        Bm = _k1_bracket(prev.R, prev.S, z)
        B0 = _k1_bracket(cur.R, cur.S, z)
        Bp = _k1_bracket(nxt.R, nxt.S, z)
        dB = (h1 * h1 * Bp + (h2 * h2 - h1 * h1) * B0 - h2 * h2 * Bm) / (h1 * h2 * (h1 + h2))
        res2 = max(res2, abs(dB - (cur.S - z)))
    return res1, res2


# ----------------------------------------------------------------------
# edge scaling
# ----------------------------------------------------------------------

def edge_exponent(f, a: float, side: str, omega_lo: float = 1e-4,
                  omega_hi: float = 1e-2, n_points: int = 12) -> float:
    """Least-squares slope of log|f(a +- omega)| against log omega.

    ``side`` selects the approach direction ("left" evaluates at a - omega).
    Raises if f vanishes on the whole grid.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    omegas = np.geomspace(omega_lo, omega_hi, n_points)
    sgn = -1.0 if side == "left" else 1.0
    vals = np.array([f(a + sgn * om) for om in omegas], dtype=float)
    mask = np.abs(vals) > 0.0
    if not np.any(mask):
        raise ValueError("function vanishes identically on the omega grid")
    return float(np.polyfit(np.log(omegas[mask]), np.log(np.abs(vals[mask])), 1)[0])
