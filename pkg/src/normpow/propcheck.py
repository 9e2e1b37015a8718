"""Grid and sampling checks of the analytic statements about g_{p,q} and D^p f_q.

Every suite returns a :class:`~normpow.report.VerifyReport`.  Polynomial
inequalities are judged on a relative slack ``(rhs - lhs) / scale`` with
``scale = max(1, |terms|)``, so the same tolerance works across the
magnitudes met for p <= 8.  Each suite takes ``negative_control=True`` to
drop one hypothesis of the statement it checks; that run must report at
least one violation.
"""

from __future__ import annotations

import math

import numpy as np

from . import constants as K
from .normcalc import Metric, tensor_diff_norms_lb
from .polyfamily import (GPoly, check_identity_suite, family_member, generate_family,
                         numeric_coeffs, poly_derivative)
from .report import VerifyReport, merge_reports

__all__ = [
    "DEFAULT_NU_GRID",
    "check_nonnegativity",
    "check_monotonicity",
    "check_max_abs",
    "check_lipschitz",
    "check_fraction_monotone",
    "check_inequality_lemmas",
    "sample_tensor_holder",
    "run_verification",
    "SUITES",
]

DEFAULT_NU_GRID = tuple(round(0.05 * i, 2) for i in range(21))
NEGATIVE_NUS = (1.5, 2.0, 3.0)
POLY_TOL = 1e-10


def _g(p, q):
    g = family_member(p)
    return numeric_coeffs(g, q), numeric_coeffs(poly_derivative(g), q)


def _horner(c, t):
    acc = np.zeros_like(t, dtype=float)
    for v in c[::-1]:
        acc = acc * t + v
    return acc


def _scale(*arrays):
    return max([1.0] + [float(np.max(np.abs(a))) for a in arrays if np.size(a)])


def _margin(slack, scale):
    m = float(np.min(slack)) / scale
    return -math.inf if math.isnan(m) else m


def _q_grid(lo, hi, n):
    return np.linspace(lo, hi, n)


# --------------------------------------------------------------------------
# value-level statements about g_{p,q}


def check_nonnegativity(p_max: int = 8, grid: int = 501, q_points: int = 31,
                        negative_control: bool = False) -> VerifyReport:
    """``g_{p,q} >= 0`` on [0, 1] for ``q >= p - 1``.

    The negative control lowers the q range to ``[p - 3, p + 2]``.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    report = VerifyReport("nonnegativity", tolerance=1e-12)
    taus = np.linspace(0.0, 1.0, grid)
    for p in range(p_max + 1):
        lo = p - 3 if negative_control else p - 1
        for q in _q_grid(lo, p + 2, q_points):
            c, _ = _g(p, q)
            vals = _horner(c, taus)
            j = int(np.argmin(vals))
            report.record(_margin(vals, _scale(c)),
                          {"p": p, "q": float(q), "tau": float(taus[j])},
                          float(vals[j]), 0.0)
    return report


def check_monotonicity(p_max: int = 8, grid: int = 501, q_points: int = 31,
                       negative_control: bool = False) -> VerifyReport:
    """``g'_{p,q} >= 0`` on [0, 1] for ``q >= p``.

    The negative control lowers the q range to ``[p - 3, p + 3]``.
    """
    report = VerifyReport("monotonicity", tolerance=1e-12)
    taus = np.linspace(0.0, 1.0, grid)
    for p in range(p_max + 1):
        lo = p - 3 if negative_control else p
        for q in _q_grid(lo, p + 3, q_points):
            _, dc = _g(p, q)
            vals = _horner(dc, taus)
            j = int(np.argmin(vals))
            report.record(_margin(vals, _scale(dc)),
                          {"p": p, "q": float(q), "tau": float(taus[j])},
                          float(vals[j]), 0.0)
    return report


def _falling(q, p):
    out = 1.0
    for i in range(p):
        out *= q - i
    return out


def check_max_abs(p_max: int = 8, grid: int = 501, q_points: int = 31,
                  negative_control: bool = False) -> VerifyReport:
    """``max_{[-1,1]} |g_{p,q}| = prod_{i<p} (q - i)`` for ``q >= p``, attained at +-1.

    Two cases per ``(p, q)``: the grid maximum stays below the product
    (relative 1e-9) and ``|g(+-1)|`` equals it (relative 1e-10).  The
    negative control samples ``q`` in ``[p - 3, p)``.
    """
    report = VerifyReport("max_abs", tolerance=1e-9)
    taus = np.linspace(-1.0, 1.0, 2 * grid - 1)
    for p in range(p_max + 1):
        if negative_control:
            qs = _q_grid(p - 3, p - 0.05, q_points)
        else:
            qs = _q_grid(p, p + 3, q_points)
        for q in qs:
            c, _ = _g(p, q)
            vals = np.abs(_horner(c, taus))
            prod = abs(_falling(q, p))
            scale = max(1.0, prod)
            j = int(np.argmax(vals))
            report.record((prod - vals[j]) / scale,
                          {"p": p, "q": float(q), "check": "grid_max", "tau": float(taus[j])},
                          float(vals[j]), prod)
            ends = max(abs(vals[0] - prod), abs(vals[-1] - prod)) / scale
            report.record(-ends, {"p": p, "q": float(q), "check": "endpoints"},
                          float(max(vals[0], vals[-1])), prod, tolerance=1e-10)
    return report


def check_lipschitz(p_max: int = 8, grid: int = 2001,
                    negative_control: bool = False) -> VerifyReport:
    """Grid maximum of ``|g_{p+1,p+1}|`` on [-1, 1] equals ``(p+1)!`` at tau = +-1.

    The negative control compares against ``p!`` instead.
    """
    report = VerifyReport("lipschitz", tolerance=1e-10)
    taus = np.linspace(-1.0, 1.0, grid)
    for p in range(p_max + 1):
        c, _ = _g(p + 1, p + 1)
        vals = np.abs(_horner(c, taus))
        target = float(math.factorial(p) if negative_control else K.lipschitz_constant(p))
        j = int(np.argmax(vals))
        gap = abs(vals[j] - target) / target
        at_end = j in (0, grid - 1) or vals[j] <= max(vals[0], vals[-1])
        report.record(-gap if at_end else -math.inf,
                      {"p": p, "tau": float(taus[j])}, float(vals[j]), target)
    return report


# --------------------------------------------------------------------------
# quotient monotonicity


def check_fraction_monotone(p_max: int = 8, nu_grid=None, tau_grid: int = 201,
                            tau1_points: int = 11,
                            negative_control: bool = False) -> VerifyReport:
    """Monotonicity of the two Hölder quotients of ``g = g_{p,p+nu}``.

    * ``t2 -> (g(t2) - g(t1)) / (t2 - t1)^nu`` is non-decreasing on ``(t1, 1]``;
    * ``t -> g(t) / (1 - (1 - t)^nu)`` is non-increasing on ``(0, 1]``.

    ``nu = 0`` is skipped (the second map is undefined there).  The
    negative control adds ``nu`` values above 1.
    """
    nus = [nu for nu in (nu_grid or DEFAULT_NU_GRID) if nu > 0]
    if negative_control:
        nus = nus + list(NEGATIVE_NUS)
    report = VerifyReport("fraction_monotone", tolerance=POLY_TOL)
    taus = np.linspace(0.0, 1.0, tau_grid)
    t1s = np.linspace(0.0, 1.0, tau1_points)[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        for p in range(p_max + 1):
            for nu in nus:
                c, _ = _g(p, p + nu)
                worst, witness = math.inf, None
                for t1 in t1s:
                    t2 = taus[taus > t1]
                    quot = (_horner(c, t2) - _horner(c, t1)) / (t2 - t1) ** nu
                    m = _margin(np.diff(quot), _scale(quot))
                    if m < worst:
                        worst, witness = m, float(t1)
                report.record(worst, {"map": "increment_quotient", "p": p, "nu": nu,
                                      "tau1": witness}, None, None)
                t = taus[1:]
                ratio = _horner(c, t) / (1.0 - (1.0 - t) ** nu)
                m = _margin(-np.diff(ratio), _scale(ratio))
                report.record(m, {"map": "boundary_ratio", "p": p, "nu": nu}, None, None)
    return report


def check_inequality_lemmas(p_max: int = 6, nu_grid=None, tau_grid: int = 101,
                            negative_control: bool = False) -> VerifyReport:
    """Grid check of the four auxiliary inequalities for ``g = g_{p,p+nu}``.

    (i)   ``g(t) >= t g'(t)``, and for p >= 2 the sharper
          ``g - t g' >= (1-t^2)(p-1)(p+nu)(g_{p-2} - t g'_{p-2})``;
    (ii)  ``(p+nu) g_{p,p-2+nu}(t2) <= nu (g(t1) - t1 g'(t1))`` for t1 <= t2;
    (iii) ``t1 -> (nu g(t1) - (p+nu) g_{p,p-2+nu}(t2)) / t1`` is
          non-increasing on ``(0, t2]``;
    (iv)  ``(p+nu) g_{p,p-2+nu}(t) >= -(1 - (1-t)^(1-nu)) g'(t)``.

    The negative control adds ``nu`` values above 1.
    """
    nus = list(nu_grid or DEFAULT_NU_GRID)
    if negative_control:
        nus = nus + list(NEGATIVE_NUS)
    report = VerifyReport("inequality_lemmas", tolerance=POLY_TOL)
    taus = np.linspace(0.0, 1.0, tau_grid)
    i1, i2 = np.triu_indices(tau_grid)  # t1 <= t2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for p in range(p_max + 1):
            for nu in nus:
                q = p + nu
                c, dc = _g(p, q)
                cm, _ = _g(p, q - 2)
                g, dg, gm = _horner(c, taus), _horner(dc, taus), _horner(cm, taus)
                gap = g - taus * dg
                base = {"p": p, "nu": nu}

                report.record(_margin(gap, _scale(g, taus * dg)),
                              {**base, "lemma": "i"}, None, None)
                if p >= 2:
                    c2, dc2 = _g(p - 2, q - 2)
                    inner = _horner(c2, taus) - taus * _horner(dc2, taus)
                    rhs = (1 - taus ** 2) * (p - 1) * q * inner
                    report.record(_margin(gap - rhs, _scale(gap, rhs)),
                                  {**base, "lemma": "i_sharp"}, None, None)

                lhs2 = q * gm[i2]
                rhs2 = nu * gap[i1]
                report.record(_margin(rhs2 - lhs2, _scale(lhs2, rhs2)),
                              {**base, "lemma": "ii"}, None, None)

                worst = math.inf
                for j in range(2, tau_grid):
                    t1 = taus[1:j + 1]
                    aux = (nu * g[1:j + 1] - q * gm[j]) / t1
                    worst = min(worst, _margin(-np.diff(aux), _scale(aux)))
                report.record(worst, {**base, "lemma": "iii"}, None, None)

                lhs4 = q * gm
                rhs4 = -(1.0 - (1.0 - taus) ** (1.0 - nu)) * dg
                report.record(_margin(lhs4 - rhs4, _scale(lhs4, rhs4)),
                              {**base, "lemma": "iv"}, None, None)
    return report


# --------------------------------------------------------------------------
# derivative tensors


def _unit_rows(z):
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _log_uniform(rng, n, lo=1e-2, hi=1e2):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def _sample_pairs(metric, p, nu, mode, n, rng):
    d = metric.dim
    if mode == "general":
        y1 = _unit_rows(rng.standard_normal((n, d))) * _log_uniform(rng, n)[:, None]
        y2 = _unit_rows(rng.standard_normal((n, d))) * _log_uniform(rng, n)[:, None]
        # anchor pairs: the lower-bound constructions, at unit scale
        e = _unit_rows(rng.standard_normal((1, d)))[0]
        anchors = [(-e, e)]
        if nu > 0:
            anchors.append((np.zeros(d), e))
        for i, (a, b) in enumerate(anchors[:n]):
            y1[i], y2[i] = a, b
        antipodal = np.zeros(n, dtype=bool)
    elif mode == "collinear":
        u = _unit_rows(rng.standard_normal((n, d)))
        s1 = _log_uniform(rng, n) * rng.choice([-1.0, 1.0], n)
        s2 = _log_uniform(rng, n) * rng.choice([-1.0, 1.0], n)
        antipodal = np.arange(n) % 4 == 0
        s1[antipodal] = -s2[antipodal]
        y1, y2 = s1[:, None] * u, s2[:, None] * u
    elif mode == "construction":
        h = _unit_rows(rng.standard_normal((n, d)))
        y2 = h
        y1 = -h if p % 2 else np.zeros_like(h)
        antipodal = np.full(n, p % 2 == 1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return metric.unwhiten(y1), metric.unwhiten(y2), antipodal


def sample_tensor_holder(metric: Metric, p: int, nu: float, mode: str = "general",
                         n_samples: int = 10_000, seed: int = 42, starts: int = 64,
                         refine: int | None = 8,
                         negative_control: bool = False) -> VerifyReport:
    """Sampled Hölder ratios ``||D^p f(x2) - D^p f(x1)|| / ||x2 - x1||^nu``, ``f = f_{p+nu}``.

    Modes:

    ``general``
        pairs drawn B-isotropically with log-uniform radii in [1e-2, 1e2]
        (plus the two lower-bound constructions); every ratio must stay
        below ``A~_{p,nu}``.
    ``collinear``
        pairs on lines through the origin, a quarter of them antipodal;
        ratios must stay below ``C_{p,nu}``, and for odd p antipodal pairs
        must reach ``C_{p,nu}`` (relative 1e-6).
    ``construction``
        ``x2 = h`` and ``x1 = 0`` (even p) or ``-h`` (odd p); every ratio
        must equal ``C_{p,nu}`` (relative 1e-6).

    The norm is a certified lower bound, so upper-bound checks are genuine
    tests.  The negative control measures the ratio with exponent ``nu/2``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    x1, x2, antipodal = _sample_pairs(metric, p, nu, mode, n_samples, rng)
    norms, dirs = tensor_diff_norms_lb(metric, p, nu, x1, x2, starts=starts,
                                       seed=seed, refine=refine)
    dist = np.linalg.norm(metric.whiten(x2 - x1), axis=1)
    expo = nu / 2 if negative_control else nu
    ratios = norms / dist ** expo

    c_bound = K.lower_bound_C(p, nu)
    report = VerifyReport(f"tensor_{mode}", seed=seed, tolerance=1e-9)
    if mode == "general":
        bound = K.constant_A_tilde(p, nu)
    else:
        bound = c_bound
    base = {"p": p, "nu": nu, "mode": mode}

    if mode in ("general", "collinear"):
        margins = (bound - ratios) / bound
        for i in np.flatnonzero(margins < -report.tolerance):
            report.record(float(margins[i]),
                          {**base, "x1": x1[i].tolist(), "x2": x2[i].tolist(),
                           "h": dirs[i].tolist()}, float(ratios[i]), bound)
        ok = margins >= -report.tolerance
        report.cases_run += int(ok.sum())
        report.worst_margin = min(report.worst_margin, float(margins.min()))
    if mode == "construction" or (mode == "collinear" and p % 2 == 1):
        gaps = np.abs(ratios[antipodal] - c_bound) / c_bound if mode == "collinear" \
            else np.abs(ratios - c_bound) / c_bound
        idx = np.flatnonzero(antipodal) if mode == "collinear" else np.arange(n_samples)
        for i, gap in zip(idx, gaps):
            report.record(-float(gap), {**base, "check": "attains_C", "x1": x1[i].tolist(),
                                        "x2": x2[i].tolist()},
                          float(ratios[i]), c_bound, tolerance=1e-6)

    j = int(np.argmax(ratios))
    report.stats.update({
        f"max_ratio[p={p},nu={nu},{mode}]": float(ratios[j]),
        f"bound[p={p},nu={nu},{mode}]": bound,
        f"witness[p={p},nu={nu},{mode}]": {"x1": x1[j].tolist(), "x2": x2[j].tolist(),
                                           "h": dirs[j].tolist()},
    })
    report.max_ratio = float(ratios[j])
    report.ratios = ratios
    report.antipodal = antipodal
    return report


# --------------------------------------------------------------------------
# orchestration

SUITES = ("identities", "inequalities", "tensor")


def run_verification(suite: str = "all", p_max: int = 8, seed: int = 42,
                     samples: int = 10_000, metric: Metric | None = None,
                     negative_control: bool = False, grid: int | None = None,
                     nu_grid=None) -> VerifyReport:
    """Run one suite group (or all of them) and merge the reports."""
    if suite not in SUITES + ("all",):
        raise ValueError(f"unknown suite {suite!r}")
    chosen = SUITES if suite == "all" else (suite,)
    reports = []
    if "identities" in chosen:
        if negative_control:
            # perturb the leading coefficient of g_3
            fam = list(generate_family(max(p_max, 3)))
            bumped = list(fam[3].tau_coeffs)
            bumped[-1] = bumped[-1] + 1
            fam[3] = GPoly(tuple(bumped), p_index=3)
            reports.append(check_identity_suite(max(p_max, 3), family=fam))
        else:
            reports.append(check_identity_suite(max(p_max, 1)))
    if "inequalities" in chosen:
        g = {} if grid is None else {"grid": grid}
        reports += [
            check_nonnegativity(p_max, negative_control=negative_control, **g),
            check_monotonicity(p_max, negative_control=negative_control, **g),
            check_max_abs(p_max, negative_control=negative_control, **g),
            check_lipschitz(p_max, negative_control=negative_control),
            check_fraction_monotone(p_max, nu_grid=nu_grid, negative_control=negative_control),
            check_inequality_lemmas(min(p_max, 6), nu_grid=nu_grid,
                                    negative_control=negative_control),
        ]
    if "tensor" in chosen:
        metric = metric or Metric.identity(3)
        for p in range(1, min(p_max, 4) + 1):
            for nu in (0.25, 0.5, 0.75, 1.0):
                for mode in ("general", "collinear", "construction"):
                    reports.append(sample_tensor_holder(
                        metric, p, nu, mode, n_samples=samples, seed=seed,
                        negative_control=negative_control))
    merged = merge_reports(reports, name=suite)
    merged.seed = seed
    merged.stats["suites"] = [r.summary() for r in reports]
    return merged
