"""Hölder and Lipschitz constants for derivatives of f_{p+nu}(x) = ||x||^(p+nu).

Closed forms:

* ``C_{p,nu}``: lower bound on any nu-Hölder constant of ``D^p f_{p+nu}``,
  ``prod_{i=1}^p (nu+i)`` for even p and ``2^(1-nu)`` times that for odd p;
* ``A_{p,nu}``, ``A~_{p,nu}``: proved whole-space constants;
* ``(p+1)!``: the Lipschitz constant (nu = 1).

``H_{p,nu}`` (the nu-Hölder constant of ``g_{p,p+nu}`` on [0, 1]) has no
closed form in general and is estimated numerically here.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, MonotonicityViolation
from .polyfamily import double_factorial, family_member, numeric_coeffs

__all__ = [
    "lower_bound_C",
    "holder_bound_product",
    "optimal_H2",
    "estimate_H_poly",
    "extend_H_to_symmetric",
    "constant_A",
    "constant_A_tilde",
    "lipschitz_constant",
    "HolderConstants",
    "holder_constants",
    "golden_section_max",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _check(p, nu):
    if p < 0:
        raise DomainError(f"p must be >= 0, got {p}")
    if not 0.0 <= nu <= 1.0:
        raise DomainError(f"nu must lie in [0, 1], got {nu}")


def _rising(p, nu):
    out = 1.0
    for i in range(1, p + 1):
        out *= nu + i
    return out


def holder_bound_product(p: int, nu: float) -> float:
    """``prod_{i=1}^p (nu + i)``, an upper bound for ``H_{p,nu}``."""
    _check(p, nu)
    return _rising(p, nu)


def lower_bound_C(p: int, nu: float) -> float:
    _check(p, nu)
    prod = _rising(p, nu)
    return prod if p % 2 == 0 else 2.0 ** (1.0 - nu) * prod


def optimal_H2(nu: float):
    """Exact ``H_{2,nu}`` and its maximizer ``tau* = nu / (2 - nu)``.

    Returns ``(value, tau_star)``; ``0**0`` is read as 1 at ``nu = 1``.
    """
    _check(2, nu)
    value = nu * (nu + 2.0) * 2.0 ** (2.0 - nu) * (1.0 - nu) ** (1.0 - nu) / (2.0 - nu) ** (2.0 - nu)
    return value, nu / (2.0 - nu)


def _even_offset(p, nu):
    """``(p-1)!! prod_{i=1}^{p/2} (nu + 2i)``, i.e. ``g_{p,p+nu}(0)`` for even p."""
    out = float(double_factorial(p - 1))
    for i in range(1, p // 2 + 1):
        out *= nu + 2 * i
    return out


def constant_A(p: int, nu: float, H: float) -> float:
    """Whole-space constant built from a Hölder constant ``H`` of ``g_{p,p+nu}``.

    For odd p the result does not depend on ``H``.
    """
    _check(p, nu)
    if p % 2:
        return 2.0 ** (1.0 - nu) * _rising(p, nu)
    if H < 0:
        raise DomainError("H must be non-negative")
    return _even_offset(p, nu) + H


def constant_A_tilde(p: int, nu: float) -> float:
    return constant_A(p, nu, holder_bound_product(p, nu))


def extend_H_to_symmetric(p: int, nu: float, H: float) -> float:
    """Hölder constant on [-1, 1] from the one on [0, 1]."""
    _check(p, nu)
    if H < 0:
        raise DomainError("H must be non-negative")
    return H if p % 2 == 0 else 2.0 ** (1.0 - nu) * H


def lipschitz_constant(p: int) -> int:
    if p < 0:
        raise DomainError(f"p must be >= 0, got {p}")
    return math.factorial(p + 1)


def golden_section_max(f, a, b, tol=1e-10):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    The endpoints are compared too, so a maximum on the boundary is found.
    """
    lo, hi = min(a, b), max(a, b)
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    best = max([(f(x), x), (fc, c), (fd, d), (f(a), a), (f(b), b)])
    return best[1], best[0]


def _quotient_coeffs(c):
    """Coefficients of ``(g(1) - g(t)) / (1 - t)`` given those of ``g``."""
    tail = np.cumsum(c[::-1])[::-1]
    return tail[1:] if len(c) > 1 else np.zeros(1)


def _horner(c, t):
    acc = np.zeros_like(t) if isinstance(t, np.ndarray) else 0.0
    for v in c[::-1]:
        acc = acc * t + v
    return acc


def estimate_H_poly(p: int, nu: float, grid: int = 2001, tol: float = 1e-10,
                    cross_check: bool = True, cross_grid: int = 201,
                    return_argmax: bool = False):
    """Numerical ``H_{p,nu} = sup (g(t2) - g(t1)) / (t2 - t1)^nu`` over ``0 <= t1 < t2 <= 1``.

    The supremum is attained with ``t2 = 1``, leaving a 1-D problem in
    ``t1`` solved by a grid scan followed by golden-section refinement.
    With ``cross_check`` a full 2-D grid is also scanned; it may never beat
    the 1-D value by more than ``tol`` (relative), otherwise
    :class:`MonotonicityViolation` is raised; it never changes the result.  ``nu = 0`` returns the
    oscillation ``g(1) - g(0)``.
    """
    _check(p, nu)
    if grid < 3:
        raise DomainError("grid must be >= 3")
    g = family_member(p)
    c = numeric_coeffs(g, p + nu)
    if nu == 0.0:
        value = float(_horner(c, 1.0) - _horner(c, 0.0))
        return (value, 0.0) if return_argmax else value

    qc = _quotient_coeffs(c)

    def phi(t):
        return (1.0 - t) ** (1.0 - nu) * _horner(qc, t)

    taus = np.linspace(0.0, 1.0, grid)
    vals = np.power(1.0 - taus, 1.0 - nu) * _horner(qc, taus)
    j = int(np.argmax(vals))
    lo, hi = taus[max(j - 1, 0)], taus[min(j + 1, grid - 1)]
    t_best, best = golden_section_max(phi, lo, hi, tol)
    if vals[j] > best:
        t_best, best = float(taus[j]), float(vals[j])

    if cross_check:
        pts = np.linspace(0.0, 1.0, cross_grid)
        gv = _horner(c, pts)
        i1, i2 = np.triu_indices(cross_grid, k=1)
        two_d = float(np.max((gv[i2] - gv[i1]) / (pts[i2] - pts[i1]) ** nu))
        if two_d > best + tol * max(1.0, abs(best)):
            raise MonotonicityViolation(
                f"2-D grid quotient {two_d!r} exceeds reduced 1-D maximum {best!r} "
                f"for p={p}, nu={nu}")
    return (float(best), float(t_best)) if return_argmax else float(best)


@dataclass(frozen=True)
class HolderConstants:
    p: int
    nu: float
    C: float
    H_bound: float
    H_est: float
    H_sym: float
    A: float
    A_tilde: float
    lipschitz: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def holder_constants(p: int, nu: float, grid: int = 2001, tol: float = 1e-10) -> HolderConstants:
    _check(p, nu)
    h_est = estimate_H_poly(p, nu, grid=grid, tol=tol)
    return HolderConstants(
        p=p,
        nu=nu,
        C=lower_bound_C(p, nu),
        H_bound=holder_bound_product(p, nu),
        H_est=h_est,
        H_sym=extend_H_to_symmetric(p, nu, h_est),
        A=constant_A(p, nu, h_est),
        A_tilde=constant_A_tilde(p, nu),
        lipschitz=lipschitz_constant(p) if nu == 1.0 else None,
    )
