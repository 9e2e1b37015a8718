"""The ten acceptance criteria, each at its stated tolerance."""

import math
import time

import numpy as np
import sympy as sp

from normpow.constants import (
    constant_A_tilde,
    estimate_H_poly,
    holder_bound_product,
    lower_bound_C,
    optimal_H2,
)
from normpow.normcalc import deriv_diag, fd_oracle, make_metric
from normpow.polyfamily import IDENTITIES, check_identity_suite, family_member
from normpow.propcheck import (
    check_fraction_monotone,
    check_inequality_lemmas,
    check_lipschitz,
    check_max_abs,
    check_monotonicity,
    check_nonnegativity,
    sample_tensor_holder,
)

METRIC = make_metric([[2.0, 0.3, 0.0, 0.1],
                      [0.3, 1.0, 0.1, 0.0],
                      [0.0, 0.1, 0.5, 0.05],
                      [0.1, 0.0, 0.05, 1.5]])
NUS = (0.25, 0.5, 0.75, 1.0)
SEED = 42


def test_c01_exact_identities(criterion):
    t0 = time.perf_counter()
    rep = check_identity_suite(15)
    elapsed = time.perf_counter() - t0
    families = sorted({v for v in IDENTITIES})
    ok = rep.passed and elapsed < 10
    criterion(1, ok, f"identities {families} exact for p <= 15, {rep.cases_run} cases, "
                     f"{elapsed:.2f} s")
    assert ok, rep.summary()


def test_c02_literal_forms(criterion):
    q, t = sp.symbols("q tau")
    literal = [
        sp.Integer(1),
        q * t,
        q * ((q - 2) * t ** 2 + 1),
        q * (q - 2) * ((q - 4) * t ** 3 + 3 * t),
        q * (q - 2) * ((q - 4) * (q - 6) * t ** 4 + 6 * (q - 4) * t ** 2 + 3),
    ]
    bad = []
    for p, ref in enumerate(literal):
        poly = sp.Poly(sp.expand(ref), t, q)
        g = family_member(p)
        for k in range(p + 1):
            for j in range(p + 1):
                want = poly.coeff_monomial(t ** k * q ** j)
                have = g.coeff(k).coeffs[j] if j < len(g.coeff(k).coeffs) else 0
                if want != have:
                    bad.append((p, k, j))
    ok = not bad
    criterion(2, ok, f"g_p for p <= 4 match the explicit list coefficientwise; mismatches {bad}")
    assert ok


def test_c03_derivative_vs_fd(criterion):
    rng = np.random.default_rng(SEED)
    worst = {}
    for p, tol in ((1, 1e-4), (2, 1e-4), (3, 1e-3)):
        for nu in NUS:
            for _ in range(100):
                y = rng.standard_normal(METRIC.dim)
                x = y / METRIC.norm(y) * rng.uniform(0.5, 2.0)
                h = rng.standard_normal(METRIC.dim)
                h /= METRIC.norm(h)
                ref = deriv_diag(METRIC, p, p + nu, x, h)
                fd = fd_oracle(METRIC, p, p + nu, x, h)
                err = abs(fd - ref) / abs(ref)
                worst[p] = max(worst.get(p, 0.0), err / tol)
    ok = all(v <= 1 for v in worst.values())
    detail = ", ".join(f"p={p} worst rel err {v * tol:.2e} (tol {tol:g})"
                       for (p, v), tol in zip(sorted(worst.items()), (1e-4, 1e-4, 1e-3)))
    criterion(3, ok, detail)
    assert ok


def test_c04_optimal_H2(criterion):
    worst_v, worst_t = 0.0, 0.0
    for k in range(1, 10):
        nu = k / 10
        v, t = estimate_H_poly(2, nu, return_argmax=True)
        ref, ts = optimal_H2(nu)
        worst_v = max(worst_v, abs(v - ref) / ref)
        worst_t = max(worst_t, abs(t - ts))
    ok = worst_v <= 1e-6 and worst_t <= 1e-4
    criterion(4, ok, f"H_2 rel err {worst_v:.1e} (tol 1e-6), maximizer err {worst_t:.1e} "
                     f"(tol 1e-4)")
    assert ok


def test_c05_odd_tightness(criterion):
    worst_h, worst_c = 0.0, 0.0
    for p in (1, 3, 5):
        for nu in (0.25, 0.5, 0.75):
            bound = holder_bound_product(p, nu)
            worst_h = max(worst_h, abs(estimate_H_poly(p, nu) - bound) / bound)
            rep = sample_tensor_holder(METRIC, p, nu, "construction", n_samples=100, seed=SEED)
            c = lower_bound_C(p, nu)
            worst_c = max(worst_c, float(np.max(np.abs(rep.ratios - c))) / c)
    ok = worst_h <= 1e-6 and worst_c <= 1e-6
    criterion(5, ok, f"H_est vs product rel err {worst_h:.1e}, construction vs C rel err "
                     f"{worst_c:.1e} (tol 1e-6)")
    assert ok


def test_c06_whole_space_bound(criterion):
    worst, rows = -math.inf, []
    for p in (1, 2, 3, 4):
        for nu in NUS:
            rep = sample_tensor_holder(METRIC, p, nu, "general", n_samples=10_000, seed=SEED)
            rel = rep.max_ratio / constant_A_tilde(p, nu)
            worst = max(worst, rel)
            rows.append(rep.passed)
    ok = all(rows) and worst <= 1 + 1e-9
    criterion(6, ok, f"general sampling, 16 (p, nu) x 1e4 pairs: max ratio / A_tilde = "
                     f"{worst:.12f}")
    assert ok


def test_c07_line_restriction(criterion):
    worst, worst_anti, passed = -math.inf, 0.0, True
    for p in (1, 2, 3, 4):
        for nu in NUS:
            rep = sample_tensor_holder(METRIC, p, nu, "collinear", n_samples=10_000, seed=SEED)
            c = lower_bound_C(p, nu)
            worst = max(worst, rep.max_ratio / c)
            passed &= rep.passed
            if p % 2:
                anti = rep.ratios[rep.antipodal]
                worst_anti = max(worst_anti, float(np.max(np.abs(anti - c))) / c)
    ok = passed and worst <= 1 + 1e-9 and worst_anti <= 1e-6
    criterion(7, ok, f"collinear sampling: max ratio / C = {worst:.12f}, odd-p opposite "
                     f"pairs off C by {worst_anti:.1e}")
    assert ok


def test_c08_lipschitz(criterion):
    rep = check_lipschitz(p_max=8)
    criterion(8, rep.passed, f"max |g_(p+1,p+1)| = (p+1)! at tau = +-1 for p <= 8, worst rel "
                             f"gap {-rep.worst_margin:.1e}")
    assert rep.passed, rep.summary()


def test_c09_bracket(criterion):
    bad = []
    for p in range(0, 9, 2):
        for i in range(21):
            nu = i / 20
            c, a = lower_bound_C(p, nu), constant_A_tilde(p, nu)
            if not c <= a <= 2 * c:
                bad.append((p, nu))
    ok = not bad
    criterion(9, ok, f"C <= A_tilde <= 2C for even p <= 8 on the 0.05 grid; failures {bad}")
    assert ok


def test_c10_grid_suites(criterion):
    suites = (check_nonnegativity, check_monotonicity, check_max_abs,
              check_fraction_monotone, check_inequality_lemmas, check_lipschitz)
    clean = {f.__name__: f().passed for f in suites}
    controls = {f.__name__: len(f(negative_control=True).violations) for f in suites}
    ok = all(clean.values()) and all(n >= 1 for n in controls.values())
    criterion(10, ok, f"default runs clean: {all(clean.values())}; negative-control "
                      f"violations {controls}")
    assert ok, (clean, controls)
