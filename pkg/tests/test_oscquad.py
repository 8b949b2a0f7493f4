"""Oscillatory panel integrals against brute-force phase-resolved rules."""

import numpy as np

from conicwave import oscquad as OQ

_XG, _WG = np.polynomial.legendre.leggauss(12)


def _brute(a, b, coef, alpha, beta, block=200_000):
    """Phase-resolved composite Gauss rule, summed in bounded blocks."""
    m0, s = 0.5 * (a + b), 0.5 * (b - a)
    fmax = max(abs(2 * alpha * a + beta), abs(2 * alpha * b + beta))
    n = int(np.ceil((b - a) * max(fmax, 1.0) / 0.8)) + 8
    edges = np.linspace(a, b, n + 1)
    total = 0.0 + 0j
    for k in range(0, n, block):
        lo = edges[k: min(k + block, n)]
        hi = edges[k + 1: min(k + block, n) + 1]
        mid = 0.5 * (lo[:, None] + hi[:, None])
        half = 0.5 * (hi[:, None] - lo[:, None])
        lam = (mid + half * _XG[None, :]).ravel()
        w = (half * _WG[None, :]).ravel()
        vals = OQ.eval_poly(coef, (lam - m0) / s) \
            * np.exp(1j * (alpha * lam ** 2 + beta * lam))
        total += np.sum(w * vals)
    return total


def test_panel_integral_regime_sweep():
    rng = np.random.default_rng(7)
    worst = 0.0
    for trial in range(60):
        a = 10 ** rng.uniform(-2, 1.3)
        b = a * (1 + rng.uniform(0.05, 0.4))
        alpha = 10 ** rng.uniform(-2, 4.3) if trial % 5 else 0.0
        beta = rng.choice([-1, 1]) * 10 ** rng.uniform(-1, 3.2)
        coef = rng.normal(size=10) + 1j * rng.normal(size=10)
        got = OQ.panel_osc_integral(a, b, coef, alpha, beta)
        ref = _brute(a, b, coef, alpha, beta)
        worst = max(worst, abs(got - ref) / max(abs(ref), 1e-3 * (b - a)))
    assert worst <= 1e-8


def test_stationary_point_inside_panel():
    rng = np.random.default_rng(3)
    for alpha in (1e4, 1e6):
        lam0 = 1.7
        a, b = 1.4, 2.0
        beta = -2 * alpha * lam0
        coef = rng.normal(size=10) + 1j * rng.normal(size=10)
        got = OQ.panel_osc_integral(a, b, coef, alpha, beta)
        ref = _brute(a, b, coef, alpha, beta)
        assert abs(got - ref) <= 1e-9 * abs(ref) + 1e-14


def test_abel_tail_against_exponential_integral():
    # integral_L^inf e^{i beta lam} / lam dlam = E1(-i beta L) exactly
    from scipy.special import exp1
    L, beta = 5.0, 7.0
    p = 1.0 / L
    p1 = -1.0 / L ** 2
    p2 = 2.0 / L ** 3
    p3 = -6.0 / L ** 4
    p4 = 24.0 / L ** 5
    val, err = OQ.tail_integral(p, p1, p2, p3, p4, 0.0, beta, L)
    ref = exp1(-1j * beta * L)
    assert abs(val - ref) <= 1e-5
    assert abs(val - ref) <= 10 * err + 1e-12
