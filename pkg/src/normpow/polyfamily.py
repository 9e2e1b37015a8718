"""Exact construction of the polynomial family g_{p,q}.

Each ``g_{p,q}`` is a polynomial in ``tau`` whose coefficients are
polynomials in the symbol ``q`` with integer coefficients.  The family
obeys

    g_{0,q} = 1,
    g_{p,q}(tau) = (1 - tau^2) g'_{p-1,q}(tau) + (q - p + 1) tau g_{p-1,q}(tau),

and ``D^p ||x||^q [h]^p = ||x||^(q-p) g_{p,q}(tau_h(x))`` for unit ``h``.
All arithmetic here is exact; floats only appear in the evaluation helpers.
"""

from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .report import VerifyReport

__all__ = [
    "QPoly",
    "GPoly",
    "generate_family",
    "family_member",
    "poly_derivative",
    "shift_q",
    "eval_poly",
    "numeric_coeffs",
    "boundary_values",
    "closed_form_boundary_values",
    "double_factorial",
    "check_identity_suite",
    "IDENTITIES",
]


@lru_cache(maxsize=None)
def _binomial_row(n):
    return tuple(math.comb(n, k) for k in range(n + 1))


def double_factorial(n: int) -> int:
    """n!! with the conventions (-1)!! = 0!! = 1."""
    if n < -1:
        raise ValueError("double factorial is defined for n >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@dataclass(frozen=True)
class QPoly:
    """Polynomial in q with integer coefficients; ``coeffs[i]`` multiplies q**i.

    Stored canonically: no trailing zeros, so the zero polynomial is ``()``.
    """

    coeffs: tuple = ()

    def __post_init__(self):
        c = [operator.index(v) for v in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def constant(cls, value: int) -> QPoly:
        return cls((value,))

    @classmethod
    def linear(cls, const: int, slope: int = 1) -> QPoly:
        """``const + slope * q``."""
        return cls((const, slope))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other):
        other = _as_qpoly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return QPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return QPoly(tuple(-v for v in self.coeffs))

    def __sub__(self, other):
        other = _as_qpoly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_qpoly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return QPoly()
        out = [0] * (len(a) + len(b) - 1)
        for i, u in enumerate(a):
            if u:
                for j, v in enumerate(b):
                    out[i + j] += u * v
        return QPoly(out)

    __rmul__ = __mul__

    def shift(self, delta: int) -> QPoly:
        """Exact substitution q -> q + delta."""
        delta = operator.index(delta)
        if delta == 0 or len(self.coeffs) <= 1:
            return self
        out = [0] * len(self.coeffs)
        powers = [1]
        for _ in range(len(self.coeffs)):
            powers.append(powers[-1] * delta)
        for i, c in enumerate(self.coeffs):
            if c:
                row = _binomial_row(i)
                for j in range(i + 1):
                    out[j] += c * row[j] * powers[i - j]
        return QPoly(out)

    def __call__(self, q):
        """Float Horner evaluation at ``q``."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * q + float(c)
        return acc

    def exact(self, q) -> Fraction:
        """Exact evaluation at a rational (or float, read exactly) ``q``."""
        q = Fraction(q)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                var = "q" if i == 1 else f"q^{i}"
                body = var if mag == 1 else f"{mag}{var}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _as_qpoly(value):
    if isinstance(value, QPoly):
        return value
    try:
        return QPoly((operator.index(value),))
    except TypeError:
        return NotImplemented


_ZERO = QPoly()
_ONE = QPoly((1,))
_Q = QPoly((0, 1))


@dataclass(frozen=True)
class GPoly:
    """Polynomial in tau with :class:`QPoly` coefficients.

    ``tau_coeffs[k]`` multiplies tau**k.  ``p_index`` records which family
    member this is (for derived expressions it defaults to the tau-degree)
    and does not take part in equality.
    """

    tau_coeffs: tuple = ()
    p_index: int | None = field(default=None, compare=False)

    def __post_init__(self):
        c = [v if isinstance(v, QPoly) else QPoly(v) for v in self.tau_coeffs]
        while c and c[-1].is_zero():
            c.pop()
        object.__setattr__(self, "tau_coeffs", tuple(c))
        if self.p_index is None:
            object.__setattr__(self, "p_index", max(len(c) - 1, 0))
        elif self.p_index < 0:
            raise ValueError("p_index must be >= 0")

    def is_zero(self) -> bool:
        return not self.tau_coeffs

    @property
    def degree(self) -> int:
        return len(self.tau_coeffs) - 1

    def coeff(self, k: int) -> QPoly:
        return self.tau_coeffs[k] if 0 <= k < len(self.tau_coeffs) else _ZERO

    def with_index(self, p: int) -> GPoly:
        return GPoly(self.tau_coeffs, p_index=p)

    def __add__(self, other):
        if not isinstance(other, GPoly):
            return NotImplemented
        n = max(len(self.tau_coeffs), len(other.tau_coeffs))
        return GPoly(tuple(self.coeff(k) + other.coeff(k) for k in range(n)))

    def __neg__(self):
        return GPoly(tuple(-c for c in self.tau_coeffs), p_index=self.p_index)

    def __sub__(self, other):
        if not isinstance(other, GPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, GPoly):
            if self.is_zero() or other.is_zero():
                return GPoly()
            out = [_ZERO] * (len(self.tau_coeffs) + len(other.tau_coeffs) - 1)
            for i, a in enumerate(self.tau_coeffs):
                for j, b in enumerate(other.tau_coeffs):
                    out[i + j] = out[i + j] + a * b
            return GPoly(tuple(out))
        scale = _as_qpoly(other)
        if scale is NotImplemented:
            return NotImplemented
        return GPoly(tuple(c * scale for c in self.tau_coeffs))

    __rmul__ = __mul__

    def times_tau(self) -> GPoly:
        if self.is_zero():
            return self
        return GPoly((_ZERO,) + self.tau_coeffs)

    def times_one_minus_tau2(self) -> GPoly:
        n = len(self.tau_coeffs)
        return GPoly(tuple(self.coeff(k) - self.coeff(k - 2) for k in range(n + 2)))

    def derivative(self) -> GPoly:
        return poly_derivative(self)

    def shift_q(self, delta: int) -> GPoly:
        return shift_q(self, delta)

    def __call__(self, q, tau):
        return eval_poly(self, q, tau)

    def to_dict(self) -> dict:
        return {
            "p": self.p_index,
            "tau_coeffs": [[str(v) for v in c.coeffs] for c in self.tau_coeffs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> GPoly:
        coeffs = tuple(QPoly(tuple(int(v) for v in c)) for c in data["tau_coeffs"])
        return cls(coeffs, p_index=int(data["p"]))

    @classmethod
    def from_json(cls, text: str) -> GPoly:
        return cls.from_dict(json.loads(text))

    def pretty(self, name: str | None = None) -> str:
        if name is None:
            name = f"g_{{{self.p_index},q}}(tau)"
        if self.is_zero():
            return f"{name} = 0"
        terms = []
        for k in range(len(self.tau_coeffs) - 1, -1, -1):
            c = self.tau_coeffs[k]
            if c.is_zero():
                continue
            var = "" if k == 0 else ("tau" if k == 1 else f"tau^{k}")
            many = sum(1 for v in c.coeffs if v) > 1
            body = f"({c})" if many and var else str(c)
            if var:
                body = var if str(c) == "1" else f"{body}*{var}"
            terms.append(body)
        return f"{name} = " + " + ".join(terms)

    def __str__(self):
        return self.pretty()


def poly_derivative(g: GPoly) -> GPoly:
    """Exact derivative in tau."""
    out = tuple(c * k for k, c in enumerate(g.tau_coeffs) if k > 0)
    return GPoly(out, p_index=max(g.p_index - 1, 0))


def shift_q(g: GPoly, delta: int) -> GPoly:
    """Substitute q -> q + delta in every coefficient."""
    return GPoly(tuple(c.shift(delta) for c in g.tau_coeffs), p_index=g.p_index)


def _next_member(prev: GPoly, p: int) -> GPoly:
    term1 = poly_derivative(prev).times_one_minus_tau2()
    term2 = prev.times_tau() * QPoly.linear(1 - p)
    return (term1 + term2).with_index(p)


@lru_cache(maxsize=None)
def _family(p_max: int) -> tuple:
    if p_max == 0:
        return (GPoly((_ONE,), p_index=0),)
    prev = _family(p_max - 1)
    return prev + (_next_member(prev[-1], p_max),)


def generate_family(p_max: int) -> tuple:
    """Return ``(g_{0,q}, ..., g_{p_max,q})``."""
    p_max = operator.index(p_max)
    if p_max < 0:
        raise ValueError("p_max must be >= 0")
    # build iteratively so the cache never recurses deeply
    for p in range(0, p_max + 1, 64):
        _family(p)
    return _family(p_max)


def family_member(p: int) -> GPoly:
    return generate_family(p)[p]


def eval_poly(g: GPoly, q, tau):
    """Evaluate ``g`` at real ``q`` and ``tau``.

    Scalar inputs are read as exact rationals and the result is rounded
    once, so it is correctly rounded even where the terms cancel.  Array
    ``tau`` uses float Horner in q per coefficient, then Horner in tau.
    """
    if isinstance(tau, (int, float)) and isinstance(q, (int, float)):
        qf, tf = Fraction(q), Fraction(tau)
        acc = Fraction(0)
        for c in reversed(g.tau_coeffs):
            acc = acc * tf + c.exact(qf)
        return float(acc)
    coeffs = [c(q) for c in g.tau_coeffs]
    tau = np.asarray(tau, dtype=float)
    acc = np.zeros_like(tau)
    for c in reversed(coeffs):
        acc = acc * tau + c
    return acc


def numeric_coeffs(g: GPoly, q) -> np.ndarray:
    """Tau-coefficients of ``g`` at a fixed real ``q``, each correctly rounded.

    The q-polynomials are evaluated in exact rational arithmetic (a float
    ``q`` is read exactly), so the only rounding is the final conversion.
    Index k holds the coefficient of tau**k.
    """
    qf = Fraction(q)
    return np.array([float(c.exact(qf)) for c in g.tau_coeffs] or [0.0])


def boundary_values(p: int) -> tuple:
    """``(g_{p,q}(0), g_{p,q}(1))`` read off the generated polynomial."""
    return boundary_values_from(family_member(p))


def closed_form_boundary_values(p: int) -> tuple:
    """Closed-form products for ``g_{p,q}(0)`` and ``g_{p,q}(1)``."""
    if p % 2:
        at_zero = QPoly()
    else:
        at_zero = QPoly.constant(double_factorial(p - 1))
        for i in range(p // 2):
            at_zero = at_zero * QPoly.linear(-2 * i)
    at_one = _ONE
    for i in range(p):
        at_one = at_one * QPoly.linear(-i)
    return at_zero, at_one


# --------------------------------------------------------------------------
# identity suite

IDENTITIES = {
    "recursion": "g_p = (1-t^2) g'_{p-1} + (q-p+1) t g_{p-1}",
    "a": "g'_p = (1-t^2) g''_{p-1} + (q-p-1) t g'_{p-1} + (q-p+1) g_{p-1}",
    "a2": "g'_p = (1-t^2) g''_{p-1} + (q-p) t g'_{p-1} + q g_{p-1,q-2}",
    "b": "(q-p) g_p = t g'_p + q g_{p,q-2}",
    "c": "g'_p = p q g_{p-1,q-2}",
    "d": "g_p = (1-t^2)(p-1) q g_{p-2,q-2} + (q-p+1) t g_{p-1}",
    "e": "tau-coefficients of g_p vanish where k and p differ in parity",
    "f": "g_p(0) and g_p(1) equal their double-factorial / falling products",
}

_MIN_P = {"recursion": 1, "a": 1, "a2": 1, "b": 0, "c": 1, "d": 2, "e": 0, "f": 0}


def _first_difference(lhs: GPoly, rhs: GPoly):
    n = max(len(lhs.tau_coeffs), len(rhs.tau_coeffs))
    for k in range(n):
        a, b = lhs.coeff(k).coeffs, rhs.coeff(k).coeffs
        for j in range(max(len(a), len(b))):
            u = a[j] if j < len(a) else 0
            v = b[j] if j < len(b) else 0
            if u != v:
                return k, j, u, v
    return None


def _identity_sides(name, p, fam):
    g = fam[p]
    if name == "recursion":
        prev = fam[p - 1]
        rhs = (poly_derivative(prev).times_one_minus_tau2()
               + prev.times_tau() * QPoly.linear(1 - p))
        return g, rhs
    if name == "a":
        prev = fam[p - 1]
        d1 = poly_derivative(prev)
        d2 = poly_derivative(d1)
        rhs = (d2.times_one_minus_tau2() + d1.times_tau() * QPoly.linear(-p - 1)
               + prev * QPoly.linear(1 - p))
        return poly_derivative(g), rhs
    if name == "a2":
        prev = fam[p - 1]
        d1 = poly_derivative(prev)
        d2 = poly_derivative(d1)
        rhs = (d2.times_one_minus_tau2() + d1.times_tau() * QPoly.linear(-p)
               + shift_q(prev, -2) * _Q)
        return poly_derivative(g), rhs
    if name == "b":
        lhs = g * QPoly.linear(-p)
        rhs = poly_derivative(g).times_tau() + shift_q(g, -2) * _Q
        return lhs, rhs
    if name == "c":
        return poly_derivative(g), shift_q(fam[p - 1], -2) * (_Q * p)
    if name == "d":
        rhs = ((shift_q(fam[p - 2], -2) * (_Q * (p - 1))).times_one_minus_tau2()
               + fam[p - 1].times_tau() * QPoly.linear(1 - p))
        return g, rhs
    if name == "e":
        # compare g against its parity projection
        kept = tuple(c if (k - p) % 2 == 0 else _ZERO
                     for k, c in enumerate(g.tau_coeffs))
        return g, GPoly(kept)
    if name == "f":
        z, o = boundary_values_from(g)
        cz, co = closed_form_boundary_values(p)
        # packed as tau^0 -> value at 0, tau^1 -> value at 1
        return GPoly((z, o)) if (z or o) else GPoly(), GPoly((cz, co))
    raise KeyError(name)


def boundary_values_from(g: GPoly) -> tuple:
    at_one = QPoly()
    for c in g.tau_coeffs:
        at_one = at_one + c
    return g.coeff(0), at_one


def check_identity_suite(p_max: int, family=None, identities=None) -> VerifyReport:
    """Check every algebraic identity of the family as exact coefficient equalities.

    ``family`` lets a caller supply (possibly tampered) members in place of
    the generated ones; it must cover ``p = 0..p_max``.  A violation records
    the identity, ``p``, and the first differing ``(tau_power, q_power)``.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    fam = tuple(family) if family is not None else generate_family(p_max)
    if len(fam) < p_max + 1:
        raise ValueError("family does not reach p_max")
    names = list(identities) if identities is not None else list(IDENTITIES)
    report = VerifyReport(suite_name="identities", tolerance=0)
    for name in names:
        for p in range(_MIN_P[name], p_max + 1):
            lhs, rhs = _identity_sides(name, p, fam)
            diff = _first_difference(lhs, rhs)
            params = {"identity": name, "p": p}
            if diff is None:
                report.record(0, params, None, None)
                continue
            k, j, u, v = diff
            if name == "f":
                params["at_tau"] = k
            else:
                params["tau_power"] = k
            params["q_power"] = j
            report.record(-abs(u - v), params, str(u), str(v))
    report.stats["p_max"] = p_max
    return report
