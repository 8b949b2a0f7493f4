"""Panel quadrature of integral p(lam) exp(i(alpha lam^2 + beta lam)) dlam.

Each panel carries a polynomial amplitude (Chebyshev-sampled, stored as
monomial coefficients in the scaled variable w in [-1, 1]); the quadratic
oscillator is integrated exactly against it.  Four terminal regimes:

* mild phase          -> Gauss-Legendre on the panel;
* tiny curvature      -> linear-phase Filon, curvature Taylor-expanded;
* stationary point in/near the panel -> complete the square, complex-erfc
  moments (uniformly valid through the critical point);
* strongly one-sided phase -> three-term integration-by-parts boundary
  series.

Panels falling between regimes are bisected; bisection re-uses the already
fitted polynomial, so the amplitude is never re-sampled.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erfc

from . import panels

DEG = 9                       # polynomial degree per panel
_CHEB_NODES = np.cos(np.pi * np.arange(DEG + 1) / DEG)[::-1]
_VAND = np.vander(_CHEB_NODES, DEG + 1, increasing=True)
_FIT = np.linalg.inv(_VAND)   # nodal values -> monomial coefficients in w

_GL_MILD = 24
_GL_WIDE = 48

_SQRT_PI = np.sqrt(np.pi)


def cheb_nodes(a: float, b: float) -> np.ndarray:
    return 0.5 * (a + b) + 0.5 * (b - a) * _CHEB_NODES


def fit_poly(values: np.ndarray) -> np.ndarray:
    """Monomial coefficients (in w) through the panel's Chebyshev nodes."""
    return _FIT @ values


def eval_poly(coef: np.ndarray, w) -> np.ndarray:
    return np.polynomial.polynomial.polyval(w, coef)


def _split_poly(coef: np.ndarray):
    """Coefficients of the same polynomial on the two half panels."""
    left = fit_poly(eval_poly(coef, 0.5 * (_CHEB_NODES - 1.0)))
    right = fit_poly(eval_poly(coef, 0.5 * (_CHEB_NODES + 1.0)))
    return left, right


def panel_osc_integral(a: float, b: float, coef: np.ndarray,
                       alpha: float, beta: float, depth: int = 0) -> complex:
    """integral_a^b p(w(lam)) exp(i(alpha lam^2 + beta lam)) dlam."""
    s = 0.5 * (b - a)
    m0 = 0.5 * (a + b)
    at = alpha * s * s
    bt = (2.0 * alpha * m0 + beta) * s
    phase0 = alpha * m0 * m0 + beta * m0

    if at + 2.0 * abs(bt) <= 80.0:
        n = _GL_MILD if at + 2.0 * abs(bt) <= 25.0 else _GL_WIDE
        xg, wg = panels.gauss_legendre(n)
        lam = m0 + s * xg
        ph = np.exp(1j * (alpha * lam * lam + beta * lam))
        return s * np.sum(wg * eval_poly(coef, xg) * ph)

    if at <= 0.15:
        return s * np.exp(1j * phase0) * _linear_filon(coef, at, bt)

    w0 = -bt / (2.0 * at)
    # complex-erfc moments while the shifted monomials stay well-conditioned
    if (1.0 + abs(w0)) ** DEG * max(abs(w0) - 1.0, 0.1) * at <= 3.0e6:
        return s * np.exp(1j * phase0) * _erfc_moments(coef, at, bt)

    # boundary series once every term ratio is small
    K = 4.0 * at * (abs(w0) - 1.0)
    if (K >= 3200.0 and 16.0 * at / K ** 2 <= 5.6e-3) or depth >= 26:
        return _ibp_panel(a, b, coef, alpha, beta, s)

    lc, rc = _split_poly(coef)
    mid = 0.5 * (a + b)
    return (panel_osc_integral(a, mid, lc, alpha, beta, depth + 1)
            + panel_osc_integral(mid, b, rc, alpha, beta, depth + 1))


def _linear_filon(coef: np.ndarray, at: float, bt: float) -> complex:
    """integral_-1^1 p(w) e^{i(at w^2 + bt w)} dw with at Taylor-expanded."""
    work = np.zeros(len(coef) + 18, dtype=complex)
    work[: len(coef)] = coef
    term = np.zeros_like(work)
    term[: len(coef)] = coef
    fac = 1.0 + 0j
    for k in range(1, 9):
        fac *= 1j * at / k
        term = np.roll(term, 2)
        term[:2] = 0.0
        work = work + fac * term
    # moments M_j = int_-1^1 w^j e^{i bt w} dw by upward recursion
    n = len(work)
    ib = 1j * bt
    e1 = np.exp(ib)
    em = np.exp(-ib)
    M = np.empty(n, dtype=complex)
    M[0] = (e1 - em) / ib
    sign = -1.0
    for j in range(1, n):
        M[j] = (e1 - sign * em) / ib - (j / ib) * M[j - 1]
        sign = -sign
    return complex(np.dot(work, M))


def _erfc_moments(coef: np.ndarray, at: float, bt: float) -> complex:
    """Complete-the-square moments, stationary point within |w0| <= 1.5.

    With v = w - w0 the phase is at*v^2 (plus a constant); the v-monomial
    moments start from a complex erfc difference and recurse upward.
    """
    w0 = -bt / (2.0 * at)
    shifted = _shift_poly(coef, w0)
    va, vb = -1.0 - w0, 1.0 - w0
    phase_c = np.exp(-1j * at * w0 * w0)
    n = len(shifted)
    M = np.empty(n, dtype=complex)
    root = np.sqrt(-1j * at)           # principal branch, arg = -pi/4
    M[0] = _SQRT_PI / (2.0 * root) * (erfc(root * va) - erfc(root * vb))
    ea = np.exp(1j * at * va * va)
    eb = np.exp(1j * at * vb * vb)
    pa, pb = 1.0, 1.0                  # v^(j-1) at the endpoints
    for j in range(1, n):
        prev = M[j - 2] if j >= 2 else 0.0
        M[j] = (pb * eb - pa * ea - (j - 1) * prev) / (2j * at)
        pa *= va
        pb *= vb
    return phase_c * complex(np.dot(shifted, M))


def _binom_row(k: int, w0: float) -> np.ndarray:
    from math import comb
    return np.array([comb(k, j) * w0 ** (k - j) for j in range(k + 1)],
                    dtype=complex)


def _shift_poly(coef: np.ndarray, w0: float) -> np.ndarray:
    """Coefficients of p(v + w0) given p's coefficients in w."""
    out = np.zeros(len(coef), dtype=complex)
    for k in range(len(coef)):
        c = coef[k]
        if c == 0.0:
            continue
        out[: k + 1] += c * _binom_row(k, w0)[: k + 1]
    return out


def _ibp_panel(a: float, b: float, coef: np.ndarray, alpha: float,
               beta: float, s: float) -> complex:
    """Four-term boundary series for a strongly oscillatory panel."""
    m0 = 0.5 * (a + b)
    c1 = np.polynomial.polynomial.polyder(coef)
    c2 = np.polynomial.polynomial.polyder(c1)
    c3 = np.polynomial.polynomial.polyder(c2)
    c4 = np.polynomial.polynomial.polyder(c3)

    total = 0.0 + 0j
    for lam, sign in ((b, 1.0), (a, -1.0)):
        w = (lam - m0) / s
        derivs = (eval_poly(coef, w), eval_poly(c1, w) / s,
                  eval_poly(c2, w) / s ** 2, eval_poly(c3, w) / s ** 3,
                  eval_poly(c4, w) / s ** 4)
        val, _ = ibp_boundary_terms(*derivs, 2.0 * alpha * lam + beta,
                                    2.0 * alpha)
        total += sign * np.exp(1j * (alpha * lam * lam + beta * lam)) * val
    return total


def ibp_boundary_terms(p, p1, p2, p3, p4, phi1, phi2):
    """(B0 - B1 + B2 - B3, |B4|) for amplitude derivatives at one point.

    B0 = p/(i phi'), B_{k+1} = B_k'/(i phi'); used for the strongly
    oscillatory panels and the Abel-regularised tails.
    """
    D = 1j * phi1
    Dp = 1j * phi2
    B0 = p / D
    B1 = p1 / D ** 2 - p * Dp / D ** 3
    B2 = p2 / D ** 3 - 3.0 * p1 * Dp / D ** 4 + 3.0 * p * Dp ** 2 / D ** 5
    B3 = (p3 / D ** 4 - 6.0 * p2 * Dp / D ** 5
          + 15.0 * p1 * Dp ** 2 / D ** 6 - 15.0 * p * Dp ** 3 / D ** 7)
    B4 = (p4 / D ** 5 - 10.0 * p3 * Dp / D ** 6 + 45.0 * p2 * Dp ** 2 / D ** 7
          - 105.0 * p1 * Dp ** 3 / D ** 8 + 105.0 * p * Dp ** 4 / D ** 9)
    return B0 - B1 + B2 - B3, abs(B4)


def tail_integral(p, p1, p2, p3, p4, alpha: float, beta: float,
                  lam0: float) -> tuple:
    """Abel-regularised integral_lam0^inf p exp(i(alpha lam^2+beta lam)) dlam.

    Amplitude derivatives are supplied at lam0; returns (value, err_est).
    """
    phi1 = 2.0 * alpha * lam0 + beta
    val, b4 = ibp_boundary_terms(p, p1, p2, p3, p4, phi1, 2.0 * alpha)
    phase = np.exp(1j * (alpha * lam0 * lam0 + beta * lam0))
    return -phase * val, 2.0 * b4 * max(1.0, abs(phi1))


class AdaptivePanels:
    """Adaptive amplitude panelization shared by all phase channels.

    The amplitude callable is sampled on Chebyshev nodes per panel; a panel
    is accepted when the last two Chebyshev coefficients are below tol
    relative to the panel scale.
    """

    def __init__(self, amp, a: float, b: float, seeds=None,
                 tol: float = 1e-9, max_panels: int = 4000):
        self.amp = amp
        edges = [a, b] if seeds is None else \
            sorted({a, b, *[float(s) for s in seeds if a < s < b]})
        stack = list(zip(edges[:-1], edges[1:]))
        accepted = []
        budget = max_panels
        while stack:
            lo, hi = stack.pop()
            vals = np.asarray(amp(cheb_nodes(lo, hi)), dtype=complex)
            coef = fit_poly(vals)
            scale = float(np.max(np.abs(vals))) + 1e-300
            tail = float(np.abs(coef[-2:]).max())
            if tail <= tol * scale or budget <= 0 or hi - lo < 1e-13 * hi:
                accepted.append((lo, hi, coef, tail * (hi - lo)))
            else:
                mid = 0.5 * (lo + hi)
                stack.extend([(lo, mid), (mid, hi)])
                budget -= 1
        self.panels = sorted(accepted)
        self.err_est = float(sum(p[3] for p in self.panels))

    def integrate(self, alpha: float, beta: float) -> complex:
        total = 0.0 + 0j
        for lo, hi, coef, _ in self.panels:
            total += panel_osc_integral(lo, hi, coef, alpha, beta)
        return total
