"""Order-zero Hankel function H0+ = J0 + i*Y0 and the inverse-square
reference wave it generates.

Two branches: an ascending series below ``Z_SWITCH`` and the large-argument
(Poincare) expansion above it.  Both run in 80-bit extended precision so the
seam mismatch and the interior error stay near 1e-13; the plain double
pipeline cannot reach that, because the asymptotic series bottoms out at
exp(-2z) and the ascending series loses digits to cancellation for z beyond
about 10.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209008240243
C1 = 2.0 / np.pi
#: additive constant in H0+(z) = 1 + i*C1*log(z) + i*KAPPA + O(z^2 log z)
KAPPA = C1 * (EULER_GAMMA - np.log(2.0))
#: normalisation of the inverse-square reference wave
C0 = np.sqrt(np.pi / 2.0) * np.exp(1j * np.pi / 4.0)

#: series / asymptotic switch point
Z_SWITCH = 15.0

_LD = np.longdouble
_CLD = np.clongdouble

REGIME_OSCILLATORY = "oscillatory"
REGIME_LOW_ENERGY = "low_energy_basis"
REGIME_HANKEL = "hankel_reference"


@dataclass(frozen=True)
class WaveSample:
    """Value and xi-derivative of a solution of H f = lambda^2 f at one point."""

    xi: float
    lam: float
    value: complex
    dvalue: complex
    regime: str = REGIME_OSCILLATORY


def _ascending(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """J0, Y0 and derivatives by the ascending series, extended precision."""
    z = z.astype(_LD)
    q = 0.25 * z * z
    term = np.ones_like(q)          # (-1)^k q^k / (k!)^2, signed
    j0 = np.ones_like(q)
    dj_sum = np.zeros_like(q)       # sum k * term / q   (for J0')
    y_sum = np.zeros_like(q)        # sum (-1)^(k+1) H_k q^k/(k!)^2, signed
    dy_sum = np.zeros_like(q)
    hk = _LD(0.0)
    kmax = 72
    for k in range(1, kmax + 1):
        term = -term * q / _LD(k * k)
        hk = hk + 1 / _LD(k)
        j0 = j0 + term
        dj_sum = dj_sum + k * term
        y_sum = y_sum - hk * term
        dy_sum = dy_sum - hk * k * term
    # J0' = (d/dz) sum = sum k*term * (2/z);  q' = z/2 so d q^k/dz = k q^(k-1) z/2
    with np.errstate(divide="ignore", invalid="ignore"):
        j0p = np.where(z > 0, dj_sum * 2.0 / z, 0.0)
        lg = np.log(z / _LD(2.0)) + _LD(EULER_GAMMA)
        y0 = (2.0 / np.pi) * (lg * j0 + y_sum)
        y0p = (2.0 / np.pi) * (j0 / z + lg * j0p + dy_sum * 2.0 / z)
    return j0 + 1j * y0, j0p + 1j * y0p


def _asymptotic(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """H0+, H0+' by the large-argument expansion (z >= Z_SWITCH)."""
    z = z.astype(_LD)
    iz = 1.0 / z
    # sum_k i^k a_k(nu) z^-k with a_k = a_{k-1} (4 nu^2 - (2k-1)^2)/(8k)
    def series(nu2x4: float) -> np.ndarray:
        s = np.ones_like(z).astype(_CLD)
        a = _LD(1.0)
        fac = _CLD(1.0)
        prev = np.full_like(z, np.inf)
        active = np.ones(z.shape, dtype=bool)
        for k in range(1, 34):
            a = a * (nu2x4 - _LD((2 * k - 1) ** 2)) / _LD(8 * k)
            fac = fac * 1j
            mag = abs(a) * iz ** k
            active = active & (mag < prev)
            s = np.where(active, s + fac * a * iz ** k, s)
            prev = np.where(active, mag, prev)
        return s

    amp = np.sqrt(_LD(2.0) / (np.pi * z))
    ph0 = np.exp(1j * (z.astype(_CLD) - _CLD(np.pi / 4)))
    h0 = amp * ph0 * series(0.0)
    h1 = amp * (ph0 * _CLD(np.exp(-1j * np.pi / 2))) * series(4.0)
    return h0, -h1        # H0+' = -H1+


def hankel0_plus(z):
    """H0+(z) = J0(z) + i Y0(z) and its derivative for real z > 0.

    Parameters
    ----------
    z : float or array
        Argument, strictly positive.

    Returns
    -------
    (value, derivative) : complex or complex arrays
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(~np.isfinite(z_arr)) or np.any(z_arr <= 0.0):
        raise DomainError("hankel0_plus requires z > 0")
    val = np.empty(z_arr.shape, dtype=complex)
    der = np.empty(z_arr.shape, dtype=complex)
    lo = z_arr <= Z_SWITCH
    if np.any(lo):
        v, d = _ascending(z_arr[lo])
        val[lo] = v.astype(complex)
        der[lo] = d.astype(complex)
    if np.any(~lo):
        v, d = _asymptotic(z_arr[~lo])
        val[~lo] = v.astype(complex)
        der[~lo] = d.astype(complex)
    if np.isscalar(z) or np.ndim(z) == 0:
        return complex(val[0]), complex(der[0])
    return val, der


def f0_reference(xi, lam) -> WaveSample:
    """Reference solution of -f'' - f/(4 xi^2) = lam^2 f with outgoing phase.

    f0(xi, lam) = C0 * sqrt(xi*lam) * H0+(xi*lam); returned with its
    xi-derivative.
    """
    if np.ndim(xi) == 0 and np.ndim(lam) == 0:
        if xi <= 0 or lam <= 0:
            raise DomainError("f0_reference requires xi > 0 and lam > 0")
        v, d = f0_values(np.asarray([xi], dtype=float), float(lam))
        return WaveSample(xi=float(xi), lam=float(lam), value=complex(v[0]),
                          dvalue=complex(d[0]), regime=REGIME_HANKEL)
    raise DomainError("f0_reference is a scalar interface; use f0_values for arrays")


def f0_values(xi: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized f0 and d(f0)/dxi on an array of positive xi."""
    xi = np.asarray(xi, dtype=float)
    if lam <= 0 or np.any(xi <= 0):
        raise DomainError("f0_values requires xi > 0 and lam > 0")
    z = xi * lam
    h, hp = hankel0_plus(z)
    h = np.atleast_1d(h)
    hp = np.atleast_1d(hp)
    rz = np.sqrt(z)
    val = C0 * rz * h
    dval = C0 * lam * (0.5 * h / rz + rz * hp)
    return val, dval


def g0_green(xi: float, eta: float, lam: float) -> complex:
    """Green kernel of the inverse-square reference problem.

    Normalised so that G0(xi, xi) = 0 and d/dxi G0(xi, eta)|_{eta=xi} = +1.
    Requires 0 < xi <= eta and lam > 0.
    """
    if lam <= 0:
        raise DomainError("g0_green requires lam > 0")
    if not (0 < xi <= eta):
        raise DomainError("g0_green requires 0 < xi <= eta")
    fxi, _ = f0_values(np.array([xi]), lam)
    feta, _ = f0_values(np.array([eta]), lam)
    return complex(np.imag(fxi[0] * np.conj(feta[0])) / lam)
