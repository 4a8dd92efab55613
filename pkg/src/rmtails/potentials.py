"""Exact polynomial arithmetic, the multi-critical potential family, Sturm
chains and saddle-point classification.

All symbolic work (potential construction, Sturm chains, real-root counting)
is done in exact rational arithmetic; root *locations* are found numerically
and cross-checked against the exact root count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = [
    "Polynomial",
    "PotentialSpec",
    "SaddleSet",
    "RootFindingError",
    "multicritical_potential",
    "gaussian_potential",
    "derivative",
    "sturm_chain",
    "count_real_roots",
    "saddle_points",
]


class RootFindingError(RuntimeError):
    """Numeric root finder failed to meet its residual tolerance."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary rational
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational coefficient")


@dataclass(frozen=True)
class Polynomial:
    """Univariate polynomial with exact rational coefficients.

    ``coeffs[k]`` multiplies x^k; the leading coefficient is nonzero and the
    zero polynomial is the empty tuple.  Evaluation at Rational arguments is
    exact; evaluation at floats (or float arrays) uses Horner's rule.
    """

    coeffs: tuple = field(default=())

    def __post_init__(self):
        cs = [_as_fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    # --- basic queries -------------------------------------------------
    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        if self.is_zero():
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coeffs_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    # --- evaluation ----------------------------------------------------
    def __call__(self, x):
        if isinstance(x, Rational) or isinstance(x, int):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        if isinstance(x, np.ndarray):
            acc = np.zeros_like(x, dtype=x.dtype if x.dtype.kind == "c" else float)
            for c in reversed(self.coeffs):
                acc = acc * x + float(c)
            return acc
        acc = 0.0 if not isinstance(x, complex) else 0.0 + 0.0j
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    # --- arithmetic ----------------------------------------------------
    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        cs = [Fraction(0)] * n
        for i, c in enumerate(self.coeffs):
            cs[i] += c
        for i, c in enumerate(other.coeffs):
            cs[i] += c
        return Polynomial(cs)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if self.is_zero() or other.is_zero():
                return Polynomial()
            cs = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    cs[i + j] += a * b
            return Polynomial(cs)
        q = _as_fraction(other)
        return Polynomial([c * q for c in self.coeffs])

    __rmul__ = __mul__

    def __divmod__(self, other: "Polynomial"):
        """Exact polynomial long division: self = q*other + r, deg r < deg other."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero polynomial")
        rem = list(self.coeffs)
        den = other.coeffs
        dd = len(den) - 1
        if len(rem) - 1 < dd:
            return Polynomial(), self
        quot = [Fraction(0)] * (len(rem) - dd)
        for k in range(len(rem) - 1, dd - 1, -1):
            c = rem[k] / den[-1]
            quot[k - dd] = c
            for j in range(dd + 1):
                rem[k - dd + j] -= c * den[j]
        return Polynomial(quot), Polynomial(rem[:dd])

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return divmod(self, other)[1]

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            elif k == 1:
                parts.append(f"{c}*x")
            else:
                parts.append(f"{c}*x^{k}")
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class PotentialSpec:
    """Selects a confining potential: the weight is exp(-(N/t) V(x)).

    ``family`` is one of ``"gaussian"`` (V = x^2/2), ``"multicritical"``
    (the order-k member of the family below) or ``"custom"``.
    """

    family: str = "gaussian"
    k: int = 1
    custom: Polynomial | None = None
    t: float = 1.0

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("coupling t must be positive")
        if self.family == "multicritical" and self.k < 0:
            raise ValueError("multicritical order k must be >= 0")
        if self.family == "custom":
            V = self.custom
            if V is None or V.degree < 2 or V.degree % 2 or V.leading <= 0:
                raise ValueError(
                    "custom potential must have even degree >= 2 and a positive "
                    "leading coefficient for the matrix integral to converge"
                )

    def polynomial(self) -> Polynomial:
        if self.family == "gaussian":
            return gaussian_potential()
        if self.family == "multicritical":
            return multicritical_potential(self.k)
        if self.family == "custom":
            return self.custom
        raise ValueError(f"unknown potential family {self.family!r}")


@dataclass(frozen=True)
class SaddleSet:
    """Classified stationary points of a potential.

    ``real_minima`` / ``real_maxima`` hold (x, V(x)) pairs sorted by x, one
    entry per root *with multiplicity* (repeated for multiple roots).
    Stationary inflection points (no sign change of V') are grouped with the
    maxima since they never host eigenvalues.  ``complex_saddles`` holds the
    roots of V' with positive imaginary part; their conjugates are implied.
    """

    real_minima: tuple
    real_maxima: tuple
    complex_saddles: tuple

    @property
    def n_real_distinct(self) -> int:
        xs = sorted(x for x, _ in self.real_minima + self.real_maxima)
        if not xs:
            return 0
        scale = 1.0 + max(abs(x) for x in xs)
        n = 1
        for u, v in zip(xs, xs[1:]):
            if v - u > 1e-7 * scale:
                n += 1
        return n


def gaussian_potential() -> Polynomial:
    """V(x) = x^2/2 (the GUE weight in these conventions)."""
    return Polynomial([0, 0, Fraction(1, 2)])


def _pochhammer(a: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for i in range(n):
        out *= a + i
    return out


def multicritical_potential(k: int) -> Polynomial:
    """Order-k member of the multi-critical family.

    Degree 2k+2 with positive leading coefficient; at coupling t = 1 its
    equilibrium density is supported on [0, 1] and vanishes like
    (1-x)^(2k+1/2) at the upper edge.  k = 0 gives 8x^2 - 8x, k = 1 gives
    16(-x + 3x^2 - 8x^3/3 + 4x^4/5).
    """
    if k < 0:
        raise ValueError("multicritical order k must be >= 0")
    pref = Fraction(2 * math.factorial(2 * k + 2)) / _pochhammer(Fraction(-1, 2), 2 * k + 2)
    coeffs = [Fraction(0)] * (2 * k + 3)
    for l in range(2 * k + 2):
        num = Fraction((-1) ** l) * _pochhammer(Fraction(2 * l + 1, 2), 2 * k + 1 - l)
        den = Fraction(math.factorial(2 * k + 1 - l) * (l + 1))
        coeffs[l + 1] = pref * num / den
    return Polynomial(coeffs)


def derivative(p: Polynomial) -> Polynomial:
    """Exact formal derivative."""
    return Polynomial([i * c for i, c in enumerate(p.coeffs)][1:])


def sturm_chain(p: Polynomial) -> tuple:
    """Sturm chain (p, p', -rem(p, p'), ...), ending with the zero polynomial."""
    if p.is_zero():
        raise ValueError("Sturm chain of the zero polynomial is undefined")
    chain = [p, derivative(p)]
    while not chain[-1].is_zero():
        chain.append(-(chain[-2] % chain[-1]))
    return tuple(chain)


def _sign_variations_at(chain, x) -> int:
    signs = []
    for q in chain:
        v = q(x) if not q.is_zero() else Fraction(0)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign_variations_at_infinity(chain, positive: bool) -> int:
    signs = []
    for q in chain:
        if q.is_zero():
            continue
        s = 1 if q.leading > 0 else -1
        if not positive and q.degree % 2:
            s = -s
        signs.append(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(p: Polynomial, interval=None) -> int:
    """Number of *distinct* real roots of p, via Sturm's theorem.

    With ``interval=(lo, hi)`` counts distinct roots in (lo, hi]; the
    endpoints must not themselves be roots (exact check), otherwise a
    ValueError asks the caller to perturb them.  Multiple roots count once:
    the canonical Sturm chain degenerates to the square-free count.
    """
    if p.is_zero():
        raise ValueError("cannot count roots of the zero polynomial")
    if p.degree == 0:
        return 0
    chain = sturm_chain(p)
    if interval is None:
        return _sign_variations_at_infinity(chain, False) - _sign_variations_at_infinity(chain, True)
    lo, hi = (_as_fraction(interval[0]), _as_fraction(interval[1]))
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    for end in (lo, hi):
        if p(end) == 0:
            raise ValueError(
                f"interval endpoint {end} is a root of p; perturb the endpoint and retry"
            )
    return _sign_variations_at(chain, lo) - _sign_variations_at(chain, hi)


def _newton_polish(coeffs, dcoeffs, x, steps=8):
    for _ in range(steps):
        f = 0.0 + 0.0j
        for c in reversed(coeffs):
            f = f * x + c
        df = 0.0 + 0.0j
        for c in reversed(dcoeffs):
            df = df * x + c
        if df == 0:
            break
        x = x - f / df
    return x


def saddle_points(V: Polynomial, real_tol: float = 1e-8) -> SaddleSet:
    """All stationary points of V, found numerically and cross-checked.

    Roots of V' come from the companion matrix (``numpy.roots``) and are
    polished by Newton steps.  Each reported root must satisfy
    |V'(x)| < 1e-12 (1 + |x|^(deg-1)) max|coeff|, and the number of distinct
    real roots must agree with the exact Sturm count; otherwise a
    RootFindingError carries the residual report.
    """
    if V.degree < 2:
        raise ValueError("potential must have degree >= 2")
    Vp = derivative(V)
    Vpc = Vp.coeffs_float()
    dVpc = derivative(Vp).coeffs_float()
    raw = np.roots(Vpc[::-1])
    maxc = float(np.max(np.abs(Vpc)))
    polished = [_newton_polish(Vpc, dVpc, complex(r)) for r in raw]

    bad = []
    for r in polished:
        res = abs(Vp(r))
        bound = 1e-12 * (1.0 + abs(r) ** max(Vp.degree, 1)) * maxc
        if not res <= bound:
            bad.append((r, res, bound))
    if bad:
        report = "; ".join(f"x={r:.6g}: |V'(x)|={res:.3e} > {b:.3e}" for r, res, b in bad)
        raise RootFindingError(f"root polish failed residual check: {report}")

    scale = 1.0 + max(abs(r) for r in polished)
    reals = sorted(r.real for r in polished if abs(r.imag) <= real_tol * scale)
    complexes = sorted(
        (r for r in polished if r.imag > real_tol * scale), key=lambda r: (r.real, r.imag)
    )

    # cluster equal real roots, keep multiplicity
    clusters = []
    for x in reals:
        if clusters and x - clusters[-1][-1] < 1e-7 * scale:
            clusters[-1].append(x)
        else:
            clusters.append([x])

    n_sturm = count_real_roots(Vp)
    if len(clusters) != n_sturm:
        raise RootFindingError(
            f"numeric real-root count {len(clusters)} disagrees with Sturm count {n_sturm}"
        )

    minima, maxima = [], []
    for cl in clusters:
        x = sum(cl) / len(cl)
        delta = max(10.0 * (cl[-1] - cl[0]), 1e-6 * scale)
        left, right = Vp(x - delta), Vp(x + delta)
        entry = (x, V(x))
        # sign change of V' decides the type; no change = inflection
        target = minima if (left < 0.0 < right) else maxima
        for _ in cl:
            target.append(entry)
    return SaddleSet(tuple(minima), tuple(maxima), tuple(complexes))
