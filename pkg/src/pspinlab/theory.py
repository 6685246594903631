"""Limiting constants: the critical temperature and the CLT parameters.

The fluctuation theory has two scales.  At scale N^{-p/2} the centered free
energy is asymptotically N(0, beta^4 p!/2) for beta below the critical
point beta_p, where beta_p^2 = inf_{0<m<1} (1 + m^{-p}) phi(m) with
phi(m) = (1-m)/2 ln(1-m) + (1+m)/2 ln(1+m).  At the finer scale
A_N(p)/N, the gap between the free energy and the coupling term has limit
N(mu, sigma^2) with

    p even:  A_N = N^{3p/4 - 1/2},  mu = 0,          sigma^2 = beta^6/3 E[He_p(X)^3]
    p odd:   A_N = N^{p-1},         mu = -beta^4 p!/4, sigma^2 = beta^8/12 E[He_p(X)^4]
                                                              - beta^8 p!^2/8

with X standard normal.  Gaussian moments are computed twice: exact
integer/rational expansion against E[X^{2m}] = (2m-1)!!, and Gauss-Hermite
quadrature with enough nodes for exact polynomial integration.  The odd-p
sigma^2 is additionally cross-checked against adaptive quadrature of the
defining integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.polynomial import polyval
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .covariance import MomentPolynomial, hermite
from .errors import IdentityCheckError, InvalidParametersError, NumericalError

__all__ = [
    "LimitConstants",
    "phi",
    "critical_objective",
    "beta_p",
    "clt_variance",
    "gaussian_moment",
    "limit_constants",
    "REM_BETA",
]

# Large-p limit of beta_p: the critical temperature sqrt(2 ln 2).
REM_BETA = math.sqrt(2.0 * math.log(2.0))

_LN2 = math.log(2.0)
_GRID_POINTS = 10_000
_BRACKET_LO = 1e-6   # smallest magnetization kept in the scan
_LAYER_LO = 1e-16    # deepest boundary-layer distance 1 - m resolved


@dataclass(frozen=True)
class LimitConstants:
    """Constants of the two limit theorems for one (beta, p)."""

    clt_variance: float
    mu: float
    sigma2: float
    a_exponent: float
    alpha_exponent: float


def phi(m: float) -> float:
    """(1-m)/2 ln(1-m) + (1+m)/2 ln(1+m), extended by continuity to [-1, 1].

    Symmetric in m by construction; phi(0) = 0 and phi(+-1) = ln 2 exactly.
    """
    if not (-1.0 <= m <= 1.0):
        raise InvalidParametersError(f"phi requires |m| <= 1, got m={m}")
    a = abs(m)
    if a == 0.0:
        return 0.0
    if a == 1.0:
        return math.log(2.0)
    return ((1.0 - a) * math.log1p(-a) + (1.0 + a) * math.log1p(a)) / 2.0


def _softplus(t: float) -> float:
    if t > 36.0:
        return t + math.log1p(math.exp(-t))
    return math.log1p(math.exp(t))


def _ln_objective(m: float, p: int) -> float:
    # ln[(1 + m^{-p}) phi(m)] without forming m^{-p}, which overflows for
    # small m and large p
    return math.log(phi(m)) + _softplus(-p * math.log(m))


def critical_objective(m: float, p: int) -> float:
    """g(m) = (1 + m^{-p}) phi(m), the function whose infimum is beta_p^2."""
    if not (0.0 < m < 1.0):
        raise InvalidParametersError(f"need 0 < m < 1, got m={m}")
    return math.exp(_ln_objective(m, p))


def _excess_objective(u: float, p: int) -> float:
    # g(1-u) - 2 ln 2 without cancellation.  With E = (1-u)^{-p} - 1 and
    # D = phi(1-u) - ln 2 the excess is 2D + E ln 2 + E D; both E and D are
    # O(u ln u) near u = 0, so the value stays accurate down to u ~ 1e-16.
    expo = -p * math.log1p(-u)
    if expo > 700.0:
        return math.inf
    big = math.expm1(expo)
    dev = (
        0.5 * (u * math.log(u) + (2.0 - u) * math.log1p(-0.5 * u))
        - 0.5 * u * _LN2
    )
    return 2.0 * dev + big * (_LN2 + dev)


def beta_p(p: int, tol: float = 1e-10) -> float:
    """Critical inverse temperature: sqrt of inf over (0,1) of g(m).

    The minimizer approaches m = 1 - 2^{1-p} as p grows, so the scan runs
    on a log-spaced grid in u = 1 - m (10^4 points down to u = 1e-16) and
    bounded Brent refinement in ln u polishes the bracketing cell to
    |dm| < tol.  The objective is evaluated as the excess g - 2 ln 2 in a
    cancellation-free form; otherwise the boundary-layer minimum drowns in
    rounding and the computed value can cross the m -> 1 limit 2 ln 2.
    By convention beta_2 = 1.
    """
    if p < 2:
        raise InvalidParametersError(f"p={p} must be >= 2")
    if tol <= 0.0:
        raise InvalidParametersError(f"tol={tol} must be > 0")
    if p == 2:
        return 1.0
    t_grid = np.linspace(math.log(_LAYER_LO), math.log(1.0 - _BRACKET_LO), _GRID_POINTS)
    values = np.array([_excess_objective(float(math.exp(t)), p) for t in t_grid])
    i = int(np.argmin(values))
    lo = t_grid[max(i - 1, 0)]
    hi = t_grid[min(i + 1, _GRID_POINTS - 1)]
    res = minimize_scalar(
        lambda t: _excess_objective(math.exp(t), p), bounds=(lo, hi),
        method="bounded", options={"xatol": tol},
    )
    if not res.success or not (lo <= res.x <= hi):
        raise NumericalError(f"failed to bracket the minimum of g for p={p}")
    excess = min(float(res.fun), float(values[i]))
    return math.sqrt(2.0 * _LN2 + excess)


def clt_variance(beta: float, p: int) -> float:
    """Variance beta^4 p!/2 of the leading-scale Gaussian limit."""
    if p < 0:
        raise InvalidParametersError(f"p={p} must be >= 0")
    return beta**4 * math.factorial(p) / 2.0


def _double_factorial_odd(m: int) -> int:
    # (2m-1)!! = (2m)! / (2^m m!)
    return math.factorial(2 * m) // ((1 << m) * math.factorial(m))


def gaussian_moment(poly: MomentPolynomial, r: int, method: str = "exact") -> float:
    """E[q(X)^r] for standard normal X and polynomial q.

    ``method="exact"`` expands q^r by exact rational convolution and pairs
    monomials with E[X^{2m}] = (2m-1)!!; odd powers vanish.
    ``method="quadrature"`` uses Gauss-Hermite nodes, enough of them that
    the polynomial integrand is integrated exactly up to rounding.
    """
    if r not in (1, 2, 3, 4):
        raise InvalidParametersError(f"moment order r={r} must be in 1..4")
    if poly.degree * r > 64:
        raise InvalidParametersError(
            f"degree {poly.degree} * r={r} exceeds the 64 cap"
        )
    if method == "exact":
        coeffs = [Fraction(c) for c in poly.coefficients]
        power = [Fraction(1)]
        for _ in range(r):
            power = _convolve(power, coeffs)
        total = Fraction(0)
        for deg, c in enumerate(power):
            if c and deg % 2 == 0:
                total += c * _double_factorial_odd(deg // 2)
        return float(total)
    if method == "quadrature":
        nodes = (poly.degree * r) // 2 + 1
        x, w = hermegauss(max(nodes, 1))
        vals = polyval(x, poly.coefficients) ** r
        return float(np.dot(w, vals) / math.sqrt(2.0 * math.pi))
    raise InvalidParametersError(f"unknown method {method!r}")


def _convolve(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def limit_constants(beta: float, p: int) -> LimitConstants:
    """All fine-scale constants for one (beta, p), with cross-checks.

    The Gaussian moment entering sigma^2 is computed by the exact and the
    quadrature route (must agree to 1e-9 relative); for p odd the variance
    is additionally matched against adaptive quadrature of
    (1/(12 sqrt(2 pi))) Int He_p(m)^4 e^{-m^2/2} dm - p!^2/8 to 1e-8.
    """
    if p < 3:
        raise InvalidParametersError(f"p={p} must be >= 3")
    if not (beta >= 0.0):
        raise InvalidParametersError(f"beta={beta} must be >= 0")
    he = hermite(p)
    fact = math.factorial(p)
    if p % 2 == 0:
        moment = gaussian_moment(he, 3)
        _require_close(moment, gaussian_moment(he, 3, method="quadrature"),
                       1e-9, "E[He_p^3] exact vs quadrature")
        mu = 0.0
        sigma2 = beta**6 / 3.0 * moment
        a_exponent = 0.75 * p - 0.5
    else:
        moment = gaussian_moment(he, 4)
        _require_close(moment, gaussian_moment(he, 4, method="quadrature"),
                       1e-9, "E[He_p^4] exact vs quadrature")
        base = moment / 12.0 - fact**2 / 8.0
        integral, _ = quad(
            lambda m: he(m) ** 4 * math.exp(-m * m / 2.0),
            -np.inf, np.inf, epsabs=0.0, epsrel=1e-12, limit=200,
        )
        integral_form = integral / (12.0 * math.sqrt(2.0 * math.pi)) - fact**2 / 8.0
        _require_close(base, integral_form, 1e-8, "odd-p sigma^2 vs integral form")
        mu = -(beta**4) * fact / 4.0
        sigma2 = beta**8 * base
        a_exponent = float(p - 1)
    return LimitConstants(
        clt_variance=clt_variance(beta, p),
        mu=mu,
        sigma2=sigma2,
        a_exponent=a_exponent,
        alpha_exponent=a_exponent - 1.0,
    )


def _require_close(a: float, b: float, rtol: float, label: str) -> None:
    scale = max(abs(a), abs(b), 1e-300)
    if abs(a - b) / scale > rtol:
        raise IdentityCheckError(f"{label}: {a} vs {b} beyond rtol={rtol}")
