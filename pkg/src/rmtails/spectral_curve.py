"""One-cut planar solution for a polynomial potential.

For the weight exp(-(N/t)V) the planar eigenvalue density lives on a single
interval [b, a] and has the form rho(x) = M(x) sqrt((x-b)(a-x)) / (2 pi t).
The endpoints solve the two conditions that the resolvent

    omega(x) = [V'(x) - M(x) sqrt((x-b)(x-a))] / (2t)

falls off like 1/x at infinity; written as theta-averages over the arc
x = c + r cos(theta) (c the centre, r the radius) they read

    <V'(x)> = 0,        <x V'(x)> = 2 t,

which Gauss-Chebyshev quadrature evaluates exactly for polynomial V.  The
polynomial factor M follows from the large-x series of V'/sqrt((x-b)(x-a)).

The module also evaluates the spectral curve y(x) = M(x) sqrt((x-b)(x-a))
outside the support, the instanton action A = int_a^z y(x) dx, and the
leading right-tail gap probability with its explicit prefactor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp, mpf, matrix, lu_solve, workdps
from scipy.integrate import quad

from .potentials import Polynomial, derivative, saddle_points

__all__ = [
    "OneCutSolution",
    "EffectiveAction",
    "TailResult",
    "TailTerm",
    "OneCutError",
    "solve_one_cut",
    "density",
    "y_curve",
    "instanton_action",
    "right_tail_log_prob",
    "right_tail_with_landscape",
]

_DPS = 40


class OneCutError(RuntimeError):
    """The one-cut ansatz failed (solver divergence or sign-changing M)."""


@dataclass(frozen=True)
class OneCutSolution:
    """Planar one-cut data: support [b, a], density factor M, coupling t."""

    b: float
    a: float
    M: Polynomial
    t: float
    V: Polynomial


@dataclass(frozen=True)
class EffectiveAction:
    """Instanton action A = V_eff(upper) - V_eff(a) for one tunnelled eigenvalue.

    ``kind`` is "wall" when the upper limit is a hard wall position and
    "saddle" when it is a stationary point hosting an empty well (the same
    integral then equals half the B-cycle period of y dx).
    """

    A: float
    z_or_xp: float
    kind: str


@dataclass(frozen=True)
class TailTerm:
    kind: str            # "wall" | "saddle"
    location: float
    log_magnitude: float
    value: float
    valid: bool = True


@dataclass(frozen=True)
class TailResult:
    """A tail value with provenance: which method produced it, at which order."""

    value: float
    method: str          # closed_form | planar_solver | spectral_curve | orthopoly | montecarlo
    order: str           # leading_N2 | leading_N | finite_N
    terms: tuple = ()


# ----------------------------------------------------------------------
# endpoint solver
# ----------------------------------------------------------------------

class _EndpointSolver:
    """Damped Newton for the endpoint conditions of a fixed potential.

    Float64 iteration first, then a polish at ``dps`` digits.  The polish is
    what rescues multi-critical couplings, where the Jacobian degenerates
    into a fold and the solution error scales like a cube root of the
    residual.  Warm starts make repeated solves along a coupling grid cheap.
    """

    def __init__(self, V: Polynomial, dps: int = _DPS):
        if V.degree < 2 or V.degree % 2 or V.leading <= 0:
            raise OneCutError(
                "potential must have even degree >= 2 with positive leading coefficient"
            )
        self.V = V
        self.dps = dps
        self.Vp = derivative(V)
        self.Vpp = derivative(self.Vp)
        self._vp64 = self.Vp.coeffs_float()
        self._vpp64 = self.Vpp.coeffs_float()
        n = V.degree + 1  # Gauss-Chebyshev exact for integrands up to degree 2n-1
        self.n = n
        self._ct64 = np.cos((np.arange(n) + 0.5) * np.pi / n)
        with workdps(dps):
            self._vp_mp = [mpf(c.numerator) / mpf(c.denominator) for c in self.Vp.coeffs]
            self._vpp_mp = [mpf(c.numerator) / mpf(c.denominator) for c in self.Vpp.coeffs]
            self._ct_mp = [mp.cos((mpf(j) + mpf("0.5")) * mp.pi / n) for j in range(n)]
        sp = saddle_points(V)
        if not sp.real_minima:
            raise OneCutError("potential has no real minimum")
        x0, v0 = min(sp.real_minima, key=lambda mv: (mv[1], mv[0]))
        self.x0 = x0
        self.vpp0 = max(float(self.Vpp(x0)), 1e-8)
        self._warm = None

    def initial_guess(self, t: float):
        return self.x0, 2.0 * math.sqrt(t / self.vpp0)

    # -- float64 stage --------------------------------------------------
    def _residual64(self, c, r, t):
        x = c + r * self._ct64
        vp = np.zeros_like(x)
        for cf in self._vp64[::-1]:
            vp = vp * x + cf
        return x, vp, vp.mean(), (x * vp).mean() - 2.0 * t

    def solve_float(self, t, guess=None, itmax=120):
        c, r = guess if guess is not None else self.initial_guess(t)
        x, vp, G0, G1 = self._residual64(c, r, t)
        res = max(abs(G0), abs(G1))
        for _ in range(itmax):
            if res < 1e-13 * (1.0 + abs(t)):
                break
            vpp = np.zeros_like(x)
            for cf in self._vpp64[::-1]:
                vpp = vpp * x + cf
            J = np.array(
                [
                    [vpp.mean(), (vpp * self._ct64).mean()],
                    [(vp + x * vpp).mean(), ((vp + x * vpp) * self._ct64).mean()],
                ]
            )
            try:
                dc, dr = np.linalg.solve(J, [G0, G1])
            except np.linalg.LinAlgError:
                break
            lam, improved = 1.0, False
            for _ in range(40):
                c2, r2 = c - lam * dc, r - lam * dr
                if r2 > 0:
                    x2, vp2, G0b, G1b = self._residual64(c2, r2, t)
                    res2 = max(abs(G0b), abs(G1b))
                    if res2 < res:
                        c, r, x, vp, G0, G1, res = c2, r2, x2, vp2, G0b, G1b, res2
                        improved = True
                        break
                lam *= 0.5
            if not improved:
                break
        return c, r, res

    # -- mpf stage -------------------------------------------------------
    def _residual_mp(self, c, r, t_):
        n = self.n

        def pv(cs, x):
            acc = mpf(0)
            for ci in reversed(cs):
                acc = acc * x + ci
            return acc

        xs = [c + r * ct for ct in self._ct_mp]
        vp = [pv(self._vp_mp, x) for x in xs]
        G0 = sum(vp) / n
        G1 = sum(x * v for x, v in zip(xs, vp)) / n - 2 * t_
        return xs, vp, G0, G1

    def _newton_mp(self, c, r, t_, tol):
        n = self.n

        def pv(cs, x):
            acc = mpf(0)
            for ci in reversed(cs):
                acc = acc * x + ci
            return acc

        xs, vp, G0, G1 = self._residual_mp(c, r, t_)
        res = max(abs(G0), abs(G1))
        for _ in range(300):
            if res < tol:
                break
            vpp = [pv(self._vpp_mp, x) for x in xs]
            J = matrix(
                [
                    [sum(vpp) / n, sum(v * ct for v, ct in zip(vpp, self._ct_mp)) / n],
                    [
                        sum(v + x * w for v, x, w in zip(vp, xs, vpp)) / n,
                        sum((v + x * w) * ct for v, x, w, ct in zip(vp, xs, vpp, self._ct_mp)) / n,
                    ],
                ]
            )
            try:
                d = lu_solve(J, matrix([G0, G1]))
            except ZeroDivisionError:
                break
            lam, improved = mpf(1), False
            for _ in range(50):
                c2, r2 = c - lam * d[0], r - lam * d[1]
                if r2 > 0:
                    xs2, vp2, G0b, G1b = self._residual_mp(c2, r2, t_)
                    res2 = max(abs(G0b), abs(G1b))
                    if res2 < res:
                        c, r, xs, vp, G0, G1, res = c2, r2, xs2, vp2, G0b, G1b, res2
                        improved = True
                        break
                lam /= 2
            if not improved:
                break
        return c, r, res

    def solve(self, zeta, eps_below=None, use_warm=True):
        """Endpoints (c, r) as mpf pair at coupling zeta (or zeta - eps_below).

        ``eps_below`` lets callers request couplings within float rounding of
        ``zeta`` exactly; the subtraction happens at working precision.
        """
        with workdps(self.dps):
            t_ = mpf(zeta) if eps_below is None else mpf(zeta) - mpf(eps_below)
            tf = float(t_)
            if tf <= 0:
                raise OneCutError("coupling must be positive")
            tol = mpf(10) ** (-(self.dps - 4)) * (1 + abs(t_))
            tol_soft = mpf(10) ** (-(self.dps // 2 + 5))
            guesses = []
            if use_warm and self._warm is not None:
                guesses.append(self._warm)
            cf, rf, _ = self.solve_float(tf, self.initial_guess(tf))
            guesses.append((mpf(cf), mpf(rf)))
            guesses.append(tuple(mpf(g) for g in self.initial_guess(tf)))
            best = None
            for c0, r0 in guesses:
                c, r, res = self._newton_mp(mpf(c0), mpf(r0), t_, tol)
                if best is None or res < best[2]:
                    best = (c, r, res)
                if res < tol:
                    break
            c, r, res = best
            if res >= tol and res >= tol_soft:
                # continuation in t from a weakly coupled gas
                cc, rc = None, None
                for j in range(10, -1, -1):
                    tj = t_ * mpf(2) ** (-j)
                    g = (mpf(self.x0), 2 * (tj / mpf(self.vpp0)) ** mpf("0.5")) if cc is None else (cc, rc)
                    cc, rc, res = self._newton_mp(g[0], g[1], tj, tol)
                c, r = cc, rc
                if res >= tol and res >= tol_soft:
                    raise OneCutError(
                        f"endpoint Newton failed at coupling {tf!r} "
                        f"(residual {float(res):.3e}); t-continuation also failed"
                    )
            self._warm = (c, r)
            return c, r


def _sqrt_branch_series(u, n, alpha):
    """Coefficients of (1 - u/x)^alpha as a series in 1/x, length n."""
    out = [1.0]
    coef = 1.0
    for k in range(1, n):
        coef *= (alpha - (k - 1)) / k
        out.append(coef * (-u) ** k)
    return out


def _m_series(vp_coeffs, b, a):
    """Polynomial factor M from the large-x series of V'/sqrt((x-b)(x-a)).

    Returns (m, res0, res1): m ascending float coefficients of M (degree
    deg V' - 1), res0 the x^0 coefficient of V' - M sqrt(...) (must vanish)
    and res1 its x^-1 coefficient (must equal 2t).
    """
    d = len(vp_coeffs) - 1  # deg V'
    nser = d + 3
    e = np.convolve(
        _sqrt_branch_series(b, nser, 0.5), _sqrt_branch_series(a, nser, 0.5)
    )[:nser]
    vp = list(vp_coeffs) + [0.0] * 3
    m = np.zeros(d)
    for i in range(d, 0, -1):
        s = 0.0
        for j in range(1, d - i + 1):
            s += m[i - 1 + j] * e[j]
        m[i - 1] = vp[i] - s
    res0 = vp[0] - sum(m[j - 1] * e[j] for j in range(1, d + 1))
    res1 = -sum(m[j - 2] * e[j] for j in range(2, d + 2) if 0 <= j - 2 < d)
    return m, res0, res1


def solve_one_cut(V: Polynomial, t: float) -> OneCutSolution:
    """Solve the one-cut endpoint conditions for potential V at coupling t.

    Newton iterates from a quadratic fit around the deepest real minimum,
    with geometric continuation in t as fallback, and the result is polished
    in extended precision (needed at multi-critical couplings).  Raises
    OneCutError if M changes sign on [b, a] (multi-cut regime) or the
    iteration diverges.
    """
    if t <= 0:
        raise ValueError("coupling t must be positive")
    solver = _EndpointSolver(V)
    c, r = solver.solve(t)
    b, a = float(c - r), float(c + r)
    vp = derivative(V).coeffs_float()
    m, res0, res1 = _m_series(vp, b, a)
    scale = max(1.0, float(np.max(np.abs(vp)))) * max(1.0, abs(a), abs(b)) ** max(len(vp) - 1, 1)
    if abs(res0) > 1e-10 * scale or abs(res1 - 2.0 * t) > 1e-10 * scale:
        raise OneCutError(
            f"endpoint residuals too large (x^0: {res0:.3e}, x^-1: {res1 - 2 * t:.3e}); "
            "try continuation in t"
        )
    # one-cut sanity: M may vanish at an endpoint (multi-critical) but must
    # not change sign inside the support
    Mpoly = Polynomial([Fraction(float(x)) for x in m])
    xs = 0.5 * (b + a) + 0.5 * (a - b) * np.cos(np.linspace(0.0, np.pi, 257)[1:-1])
    mvals = Mpoly(xs)
    if float(np.min(mvals)) <= -1e-10 * max(1.0, float(np.max(np.abs(mvals)))):
        raise OneCutError(
            "one-cut assumption violated: M(x) changes sign on the support "
            "(multi-cut regime is out of scope)"
        )
    return OneCutSolution(b=b, a=a, M=Mpoly, t=float(t), V=V)


# ----------------------------------------------------------------------
# observables on a one-cut solution
# ----------------------------------------------------------------------

def density(sol: OneCutSolution, x):
    """Equilibrium density rho(x) = M(x) sqrt((x-b)(a-x)) / (2 pi t).

    Zero outside the support; accepts scalars or arrays.  Use
    ``sol.b <= x <= sol.a`` to distinguish a support-edge zero from the
    out-of-support zero.
    """
    arr = np.asarray(x, dtype=float)
    inside = (arr >= sol.b) & (arr <= sol.a)
    out = np.zeros_like(arr)
    if np.any(inside):
        xi = arr[inside]
        out[inside] = sol.M(xi) * np.sqrt((xi - sol.b) * (sol.a - xi)) / (2.0 * np.pi * sol.t)
    return out if out.ndim else float(out)


def y_curve(sol: OneCutSolution, x: float) -> float:
    """Spectral curve y(x) = M(x) sqrt((x-b)(x-a)) on the real axis x >= a."""
    if x < sol.a:
        raise ValueError("y_curve is defined for x >= a (right of the support)")
    return float(sol.M(float(x)) * math.sqrt(max((x - sol.b) * (x - sol.a), 0.0)))


def _y_sub(sol, u):
    # y(a + u^2) * 2u, the integrand after the substitution x = a + u^2
    x = sol.a + u * u
    return 2.0 * u * u * sol.M(x) * np.sqrt(x - sol.b)


def instanton_action(sol: OneCutSolution, upper: float, kind: str = "wall") -> EffectiveAction:
    """A = int_a^upper y(x) dx, the cost of parking one eigenvalue at ``upper``.

    The square-root edge is removed by the substitution x = a + u^2; the
    remaining smooth integrand goes to adaptive Gauss-Kronrod quadrature.
    With kind="saddle" the upper limit is an empty-well stationary point and
    the integral equals half the B-cycle period of y dx.
    """
    if upper < sol.a:
        raise ValueError("instanton action needs upper >= a")
    if upper == sol.a:
        return EffectiveAction(0.0, float(upper), kind)
    U = math.sqrt(upper - sol.a)
    val, _ = quad(lambda u: _y_sub(sol, u), 0.0, U, epsabs=1e-300, epsrel=1e-12, limit=400)
    return EffectiveAction(float(val), float(upper), kind)


def right_tail_log_prob(sol: OneCutSolution, z: float, N: int) -> float:
    """Leading right-tail gap probability log P_N(z) with explicit prefactor.

    log P = -[g_s (a-b) / (8 pi y(z) (z-a)(z-b))] exp(-A(z)/g_s), g_s = t/N.
    Invalid in the edge crossover region: z must exceed a by a small margin
    (default 1e-6 (a-b)) for the prefactor to make sense.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    delta_edge = 1e-6 * (sol.a - sol.b)
    if z <= sol.a + delta_edge:
        raise ValueError(
            "prefactor divergent near edge: the leading-order formula does not "
            "apply in the edge crossover region"
        )
    gs = sol.t / N
    A = instanton_action(sol, z).A
    y = y_curve(sol, z)
    pref = gs * (sol.a - sol.b) / (8.0 * math.pi * y * (z - sol.a) * (z - sol.b))
    return -pref * math.exp(-A / gs)


def _y_prime(sol, x):
    Mp = derivative(sol.M)
    sig = (x - sol.b) * (x - sol.a)
    dsig = 2.0 * x - sol.a - sol.b
    rt = math.sqrt(sig)
    return float(Mp(x)) * rt + float(sol.M(x)) * dsig / (2.0 * rt)


def right_tail_with_landscape(V: Polynomial, t: float, z: float, N: int) -> TailResult:
    """Right-tail log P with the competition between wall and empty wells.

    Evaluates the hard-wall term at z and, for every real minimum x_p > z of
    V, the corresponding saddle term

        F_p = sqrt(g_s / (2 pi y'(x_p))) * (a-b) / (4 (x_p-a)(x_p-b)) * e^{-A_p/g_s}

    with A_p = int_a^{x_p} y dx.  The least-suppressed term dominates, so the
    gap probability stops depending on z once tunnelling into a deeper well
    to the right of the wall is cheaper than sitting at the wall.
    """
    sol = solve_one_cut(V, t)
    gs = t / N
    yz = y_curve(sol, z)
    wall_valid = yz > 0.0
    if wall_valid:
        wall_value = right_tail_log_prob(sol, z, N)
        A_w = instanton_action(sol, z).A
        log_mag_w = (
            math.log(gs * (sol.a - sol.b) / (8.0 * math.pi * yz * (z - sol.a) * (z - sol.b)))
            - A_w / gs
        )
    else:
        # wall sits past a zero of y; the wall configuration is not a
        # steepest-descent endpoint there and the term is dropped
        wall_value, log_mag_w = 0.0, -math.inf
    terms = [TailTerm("wall", float(z), log_mag_w, wall_value, wall_valid)]

    seen = []
    for x_p, _ in saddle_points(V).real_minima:
        if x_p <= z or any(abs(x_p - s) < 1e-9 * (1 + abs(x_p)) for s in seen):
            continue
        seen.append(x_p)
        A_p = instanton_action(sol, x_p, kind="saddle").A
        yp = _y_prime(sol, x_p)
        if yp <= 0.0:
            terms.append(TailTerm("saddle", float(x_p), -math.inf, 0.0, False))
            continue
        pref = (
            math.sqrt(gs / (2.0 * math.pi * yp))
            * (sol.a - sol.b)
            / (4.0 * (x_p - sol.a) * (x_p - sol.b))
        )
        log_mag = math.log(pref) - A_p / gs
        terms.append(TailTerm("saddle", float(x_p), log_mag, -math.exp(log_mag), True))

    dominant = max((trm for trm in terms if trm.valid), key=lambda trm: trm.log_magnitude)
    return TailResult(
        value=dominant.value, method="spectral_curve", order="leading_N", terms=tuple(terms)
    )
