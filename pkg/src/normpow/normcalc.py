"""Weighted Euclidean geometry and derivatives of f_q(x) = ||x||^q.

The norm is ``||x|| = <Bx, x>^(1/2)`` for a fixed symmetric positive
definite ``B``.  With ``B = L L^T`` every computation can be moved to
whitened coordinates ``y = L^T x`` where the norm is the plain Euclidean
one; the sphere ascent below works there.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    ArgumentCountMismatch,
    DomainError,
    NonUnitDirection,
    NotPositiveDefinite,
    NotSymmetric,
    StencilHitsOrigin,
    UndefinedAtOrigin,
)
from .polyfamily import family_member, numeric_coeffs, poly_derivative

__all__ = [
    "Metric",
    "make_metric",
    "tau",
    "deriv_diag",
    "deriv_mixed",
    "fd_oracle",
    "DirectionalDerivative",
    "tensor_diff_norm_lb",
    "tensor_diff_norms_lb",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 0xC0FFEE
UNIT_TOL = 1e-10


class Metric:
    """Symmetric positive definite ``B`` with its cached Cholesky factor."""

    def __init__(self, b_matrix, chol):
        self.b_matrix = b_matrix
        self.chol = chol
        self.dim = b_matrix.shape[0]
        self.b_matrix.setflags(write=False)
        self.chol.setflags(write=False)

    @classmethod
    def identity(cls, dim: int) -> Metric:
        return make_metric(np.eye(dim))

    def inner(self, x, y) -> float:
        return float(x @ self.b_matrix @ y)

    def norm(self, x) -> float:
        return float(np.linalg.norm(self.whiten(x)))

    def whiten(self, x):
        """``L^T x``; Euclidean norms of whitened vectors are B-norms."""
        return np.asarray(x, dtype=float) @ self.chol

    def unwhiten(self, y):
        return np.linalg.solve(self.chol.T, np.asarray(y, dtype=float).T).T

    def as_dict(self) -> dict:
        return {"dim": self.dim, "b": self.b_matrix.tolist()}

    def __repr__(self):
        return f"Metric(dim={self.dim})"


def make_metric(entries) -> Metric:
    b = np.array(entries, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 1:
        raise DomainError(f"metric must be a non-empty square matrix, got shape {b.shape}")
    scale = max(float(np.max(np.abs(b))), np.finfo(float).tiny)
    asym = float(np.max(np.abs(b - b.T)))
    if asym > 1e-12 * scale:
        raise NotSymmetric(f"metric is not symmetric (max |B - B^T| = {asym:.3g})")
    b = 0.5 * (b + b.T)
    evals, evecs = np.linalg.eigh(b)
    i = int(np.argmin(evals))
    if evals[i] <= 0:
        raise NotPositiveDefinite(
            f"metric is not positive definite: eigenvalue {evals[i]:.6g} "
            f"along direction {np.round(evecs[:, i], 12).tolist()}",
            eigenvalue=float(evals[i]), direction=evecs[:, i].copy())
    try:
        chol = np.linalg.cholesky(b)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"Cholesky factorization failed (smallest eigenvalue {evals[i]:.3g})",
            eigenvalue=float(evals[i]), direction=evecs[:, i].copy()) from exc
    return Metric(b, chol)


def _vec(metric: Metric, v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != metric.dim:
        raise DomainError(f"expected a vector of length {metric.dim}, got {v.shape[0]}")
    return v


@lru_cache(maxsize=4096)
def _coeffs(p: int, q: float):
    g = family_member(p)
    return numeric_coeffs(g, q), numeric_coeffs(poly_derivative(g), q)


def _horner(coeffs, t):
    acc = np.zeros_like(t) if isinstance(t, np.ndarray) else 0.0
    for c in coeffs[::-1]:
        acc = acc * t + c
    return acc


def _tau_unchecked(metric, x, h):
    nx = metric.norm(x)
    if nx == 0.0:
        return 0.0
    return min(1.0, max(-1.0, metric.inner(x, h) / nx))


def tau(metric: Metric, x, h) -> float:
    """``<Bx, h> / ||x||`` for a unit ``h``; zero at the origin."""
    x, h = _vec(metric, x), _vec(metric, h)
    hn = metric.norm(h)
    if abs(hn - 1.0) > UNIT_TOL:
        raise NonUnitDirection(f"direction has norm {hn!r}, expected 1")
    return _tau_unchecked(metric, x, h)


def _check_origin(p, q, nx):
    if nx == 0.0 and not p < q:
        raise UndefinedAtOrigin(
            f"D^{p} f_{q} is not defined at x = 0 (needs p < q)")


def deriv_diag(metric: Metric, p: int, q: float, x, h) -> float:
    """``D^p f_q(x)[h]^p``.

    Non-unit ``h`` is normalized and the result scaled by ``||h||^p``.
    """
    if p < 0:
        raise DomainError("p must be >= 0")
    x, h = _vec(metric, x), _vec(metric, h)
    nx = metric.norm(x)
    _check_origin(p, q, nx)
    if p == 0:
        return 0.0 if nx == 0.0 else nx ** q
    hn = metric.norm(h)
    if hn == 0.0 or nx == 0.0:
        return 0.0
    c, _ = _coeffs(p, float(q))
    t = _tau_unchecked(metric, x, h / hn)
    return hn ** p * nx ** (q - p) * _horner(c, t)


def deriv_mixed(metric: Metric, p: int, q: float, x, *hs) -> float:
    """``D^p f_q(x)[h_1, ..., h_p]`` recovered from diagonal values by polarization."""
    if len(hs) == 1 and p != 1 and np.ndim(hs[0]) == 2:
        hs = tuple(hs[0])
    if len(hs) != p:
        raise ArgumentCountMismatch(f"expected {p} directions, got {len(hs)}")
    x = _vec(metric, x)
    if metric.norm(x) == 0.0:
        raise UndefinedAtOrigin("polarization needs x != 0")
    if p == 0:
        return deriv_diag(metric, 0, q, x, x)
    hs = [_vec(metric, h) for h in hs]
    total = 0.0
    for size in range(1, p + 1):
        sign = -1.0 if (p - size) % 2 else 1.0
        for subset in itertools.combinations(hs, size):
            total += sign * deriv_diag(metric, p, q, x, np.sum(subset, axis=0))
    return total / math.factorial(p)


def default_fd_step(p: int, x_norm: float) -> float:
    base = 1e-5 if p <= 2 else 1e-3
    return base * max(1.0, x_norm)


def fd_oracle(metric: Metric, p: int, q: float, x, h, step: float | None = None) -> float:
    """Nested central differences of ``t -> f_q(x + t h)`` at ``t = 0``.

    Nesting the symmetric difference ``(phi(t+s) - phi(t-s)) / 2s`` p times
    gives the stencil ``x + (p - 2k) s h`` with binomial weights.
    """
    if not 1 <= p <= 4:
        raise DomainError("fd_oracle supports 1 <= p <= 4")
    x, h = _vec(metric, x), _vec(metric, h)
    hn = metric.norm(h)
    if abs(hn - 1.0) > UNIT_TOL:
        raise NonUnitDirection(f"direction has norm {hn!r}, expected 1")
    nx = metric.norm(x)
    if step is None:
        step = default_fd_step(p, nx)
    if step <= 0:
        raise DomainError("step must be positive")
    # closest approach of the stencil segment to the origin
    reach = p * step
    y, k = metric.whiten(x), metric.whiten(h)
    t_star = min(reach, max(-reach, -float(y @ k) / float(k @ k)))
    if np.linalg.norm(y + t_star * k) <= 1e-14 * max(nx, reach):
        raise StencilHitsOrigin("finite-difference stencil reaches the origin")
    total = 0.0
    for j in range(p + 1):
        point = x + (p - 2 * j) * step * h
        weight = (-1) ** j * math.comb(p, j)
        total += weight * metric.norm(point) ** q
    return total / (2.0 * step) ** p


@dataclass(frozen=True)
class DirectionalDerivative:
    """``h -> D^p f_q(x)[h]^p`` at a fixed point."""

    metric: Metric
    p: int
    q: float
    x: tuple

    def __post_init__(self):
        x = _vec(self.metric, self.x)
        _check_origin(self.p, self.q, self.metric.norm(x))
        object.__setattr__(self, "x", tuple(x.tolist()))

    def __call__(self, h) -> float:
        return deriv_diag(self.metric, self.p, self.q, np.array(self.x), h)


# --------------------------------------------------------------------------
# norm of D^p f_{p+nu}(x2) - D^p f_{p+nu}(x1)


def _unit_rows(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(n > 0, v / np.where(n > 0, n, 1.0), 0.0)
    return out, n[..., 0]


def _start_directions(u1, u2, starts, rng):
    """Structured candidates plus ``starts`` random points, shape (n, m, d)."""
    n, d = u1.shape
    cands = [u2, u1, u2 - u1, u2 + u1]
    if d >= 3:
        z = rng.standard_normal((n, d))
        for u in (u1, u2):
            z = z - np.sum(z * u, axis=1, keepdims=True) * u
        # a second Gram-Schmidt pass keeps z orthogonal to both
        for u in (u1, u2):
            z = z - np.sum(z * u, axis=1, keepdims=True) * u
        cands.append(z)
    structured = []
    for c in cands:
        c, _ = _unit_rows(c)
        structured.extend([c, -c])
    rand = rng.standard_normal((n, starts, d))
    k0 = np.concatenate([np.stack(structured, axis=1), rand], axis=1)
    k0, norms = _unit_rows(k0)
    # degenerate structured candidates (zero rows) get a fixed axis
    k0[norms == 0] = np.eye(d)[0]
    return k0


def _ascend(a1, a2, u1, u2, c, dc, k, max_iter=400, gtol=1e-12):
    """Projected step-halving ascent of ``|F|`` on the unit sphere.

    ``F(k) = a2 g(<u2,k>) - a1 g(<u1,k>)``; each start climbs ``sigma F``
    with ``sigma`` the sign of ``F`` at that start.  Shapes: a (n,),
    u (n, d), k (n, m, d).  Returns the final ``k`` and ``|F(k)|``.
    Rows that have converged drop out of the working set.
    """
    n, m, d = k.shape
    k = k.reshape(n * m, d).copy()
    owner = np.repeat(np.arange(n), m)
    a1r, a2r, u1r, u2r = a1[owner], a2[owner], u1[owner], u2[owner]

    def value(idx, kk):
        t1 = np.einsum("nd,nd->n", kk, u1r[idx])
        t2 = np.einsum("nd,nd->n", kk, u2r[idx])
        return a2r[idx] * _horner(c, t2) - a1r[idx] * _horner(c, t1), t1, t2

    every = np.arange(n * m)
    f, t1, t2 = value(every, k)
    sigma = np.where(f < 0, -1.0, 1.0)
    alpha = np.full(n * m, 0.5)
    live = every
    for _ in range(max_iter):
        if live.size == 0:
            break
        kl, s = k[live], sigma[live]
        grad = ((a2r[live] * _horner(dc, t2[live]))[:, None] * u2r[live]
                - (a1r[live] * _horner(dc, t1[live]))[:, None] * u1r[live])
        grad *= s[:, None]
        tang = grad - np.sum(grad * kl, axis=1, keepdims=True) * kl
        tn = np.linalg.norm(tang, axis=1)
        keep = (tn > gtol) & (alpha[live] > 1e-12)
        live, kl, s, tang, tn = live[keep], kl[keep], s[keep], tang[keep], tn[keep]
        if live.size == 0:
            break
        trial = kl + (alpha[live] / tn)[:, None] * tang
        trial /= np.linalg.norm(trial, axis=1, keepdims=True)
        f_new, t1_new, t2_new = value(live, trial)
        old = s * f[live]
        gain = s * f_new - old
        accept = gain > 1e-15 * np.abs(old)
        # a step that gains almost nothing marks the row converged
        alpha[live[accept & (gain <= 1e-13 * np.abs(old))]] = 0.0
        hit = live[accept]
        k[hit] = trial[accept]
        f[hit], t1[hit], t2[hit] = f_new[accept], t1_new[accept], t2_new[accept]
        alpha[hit] = np.minimum(2.0 * alpha[hit], 1.0) * (alpha[hit] > 0)
        alpha[live[~accept]] *= 0.5
    return k.reshape(n, m, d), np.abs(f).reshape(n, m)


def tensor_diff_norms_lb(metric: Metric, p: int, nu: float, x1s, x2s,
                         starts: int = 64, seed: int = DEFAULT_SEED,
                         refine: int | None = None, chunk: int = 2048):
    """Batched :func:`tensor_diff_norm_lb`.

    Returns ``(values, directions)``: per pair a certified lower bound on
    the norm and the B-unit direction attaining it.  With ``refine`` set,
    all starts are evaluated once and only the ``refine`` best per pair are
    climbed; every evaluated point is feasible, so the bound stays valid.
    """
    if not 0.0 <= nu <= 1.0:
        raise DomainError("nu must lie in [0, 1]")
    if starts < 1:
        raise DomainError("starts must be >= 1")
    x1s = np.atleast_2d(np.asarray(x1s, dtype=float))
    x2s = np.atleast_2d(np.asarray(x2s, dtype=float))
    if x1s.shape != x2s.shape or x1s.shape[1] != metric.dim:
        raise DomainError("point arrays must both have shape (n, dim)")
    q = p + nu
    c, dc = _coeffs(p, float(q))
    rng = np.random.default_rng(seed)
    values = np.empty(len(x1s))
    dirs = np.empty_like(x1s)
    for lo in range(0, len(x1s), chunk):
        y1 = metric.whiten(x1s[lo:lo + chunk])
        y2 = metric.whiten(x2s[lo:lo + chunk])
        u1, r1 = _unit_rows(y1)
        u2, r2 = _unit_rows(y2)
        if nu == 0.0 and (np.any(r1 == 0) or np.any(r2 == 0)):
            raise UndefinedAtOrigin(f"D^{p} f_{q} is not defined at x = 0")
        a1, a2 = r1 ** nu, r2 ** nu
        k0 = _start_directions(u1, u2, starts, rng)
        if refine is not None and refine < k0.shape[1]:
            t1 = np.einsum("nmd,nd->nm", k0, u1)
            t2 = np.einsum("nmd,nd->nm", k0, u2)
            f0 = np.abs(a2[:, None] * _horner(c, t2) - a1[:, None] * _horner(c, t1))
            top = np.argsort(-f0, axis=1, kind="stable")[:, :max(refine, 1)]
            k0 = np.take_along_axis(k0, top[..., None], axis=1)
        k, absf = _ascend(a1, a2, u1, u2, c, dc, k0)
        best = np.argmax(absf, axis=1)
        idx = np.arange(len(best))
        values[lo:lo + chunk] = absf[idx, best]
        dirs[lo:lo + chunk] = metric.unwhiten(k[idx, best])
    return values, dirs


def tensor_diff_norm_lb(metric: Metric, p: int, nu: float, x1, x2,
                        starts: int = 64, seed: int = DEFAULT_SEED) -> float:
    """Lower bound on ``||D^p f_{p+nu}(x2) - D^p f_{p+nu}(x1)||``.

    The norm of a symmetric form is ``max |L[h]^p|`` over the unit sphere;
    this returns the best value found by multi-start projected ascent, so
    it never exceeds the true norm.
    """
    x1, x2 = _vec(metric, x1), _vec(metric, x2)
    values, _ = tensor_diff_norms_lb(metric, p, nu, x1[None], x2[None],
                                     starts=starts, seed=seed)
    return float(values[0])
