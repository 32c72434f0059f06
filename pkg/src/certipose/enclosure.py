"""Sound linear enclosures of sin, cos and 1/x over uncertain inputs.

Each element-wise nonlinearity f is replaced on its input range by a line
a*x + b plus a verified remainder radius d, so that the image of a
polynomial zonotope stays a polynomial zonotope: the dependent structure
passes through the linear map and d becomes a fresh independent generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainCrossesPole
from .sets import Interval, PolyZonotope, interval_hull

__all__ = ["LinearApproxEnclosure", "fit_linear", "enclose_elementwise", "FUNCTIONS"]

_FIT_SAMPLES = 1001
_D_INFLATE = 1e-12


@dataclass(frozen=True)
class LinearApproxEnclosure:
    """Line a*x + b with |f(x) - (a x + b)| <= d on the scalar domain."""

    a: float
    b: float
    d: float
    domain: Interval

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("error radius must be non-negative")


def _sin_stationary(a: float, lo: float, hi: float) -> list[float]:
    # d/dx [sin x - a x] = 0  <=>  cos x = a
    if abs(a) > 1.0:
        return []
    t = float(np.arccos(np.clip(a, -1.0, 1.0)))
    out = []
    k0 = int(np.floor(lo / (2 * np.pi))) - 1
    k1 = int(np.ceil(hi / (2 * np.pi))) + 1
    for k in range(k0, k1 + 1):
        for x in (t + 2 * np.pi * k, -t + 2 * np.pi * k):
            if lo < x < hi:
                out.append(x)
    return out


def _cos_stationary(a: float, lo: float, hi: float) -> list[float]:
    # d/dx [cos x - a x] = 0  <=>  sin x = -a
    if abs(a) > 1.0:
        return []
    t = float(np.arcsin(np.clip(-a, -1.0, 1.0)))
    out = []
    k0 = int(np.floor(lo / (2 * np.pi))) - 1
    k1 = int(np.ceil(hi / (2 * np.pi))) + 1
    for k in range(k0, k1 + 1):
        for x in (t + 2 * np.pi * k, np.pi - t + 2 * np.pi * k):
            if lo < x < hi:
                out.append(x)
    return out


def _recip_stationary(a: float, lo: float, hi: float) -> list[float]:
    # d/dx [1/x - a x] = 0  <=>  x^2 = -1/a
    if a >= 0.0:
        return []
    x = float(np.sqrt(-1.0 / a))
    return [x] if lo < x < hi else []


FUNCTIONS = {
    "sin": (np.sin, np.cos, _sin_stationary),
    "cos": (np.cos, lambda x: -np.sin(x), _cos_stationary),
    "recip": (lambda x: 1.0 / x, lambda x: -1.0 / x ** 2, _recip_stationary),
}


def fit_linear(fname: str, domain: Interval) -> LinearApproxEnclosure:
    """Fit a line to ``fname`` over a scalar domain with a verified remainder.

    The slope comes from least squares on a uniform grid; the intercept is
    recentered so the residual band is symmetric, and d is the exact residual
    extreme over the endpoints plus all interior stationary points (inflated
    by 1e-12 for floating point safety).
    """
    if fname not in FUNCTIONS:
        raise ValueError(f"unknown function {fname!r}; choose from {sorted(FUNCTIONS)}")
    if domain.dim != 1:
        raise ValueError("fit_linear expects a scalar domain")
    f, fprime, stationary = FUNCTIONS[fname]
    lo, hi = float(domain.lo[0]), float(domain.hi[0])
    if fname == "recip" and lo <= 0.0:
        raise DomainCrossesPole(f"reciprocal domain [{lo:.6g}, {hi:.6g}] touches zero")

    if hi - lo < 1e-14:
        c = 0.5 * (lo + hi)
        a = float(fprime(c))
        return LinearApproxEnclosure(a, float(f(c)) - a * c, 0.0, domain)

    xs = np.linspace(lo, hi, _FIT_SAMPLES)
    a, b0 = np.polyfit(xs, f(xs), 1)
    a = float(a)
    cands = np.array([lo, hi] + stationary(a, lo, hi))
    resid = f(cands) - (a * cands + b0)
    r_hi, r_lo = float(resid.max()), float(resid.min())
    b = float(b0) + 0.5 * (r_hi + r_lo)
    d = 0.5 * (r_hi - r_lo) + _D_INFLATE
    return LinearApproxEnclosure(a, b, d, domain)


def enclose_elementwise(fname: str, p: PolyZonotope) -> PolyZonotope:
    """Outer enclosure of f applied to each entry of a polynomial zonotope.

    Per entry i the domain is the interval hull of that entry; the output is
    a_i * P_i + b_i plus an independent generator of radius d_i, so the
    dependent generators of ``p`` survive scaled by a.
    """
    hull = interval_hull(p)
    a = np.empty(p.dim)
    b = np.empty(p.dim)
    d = np.empty(p.dim)
    for i in range(p.dim):
        enc = fit_linear(fname, Interval(hull.lo[i], hull.hi[i]))
        a[i], b[i], d[i] = enc.a, enc.b, enc.d
    offset = a * p.offset + b
    dep = a[:, None] * p.dep
    indep = np.concatenate([a[:, None] * p.indep, np.diag(d)], axis=1)
    return PolyZonotope(offset, dep, indep, p.expmat, p.ids)
