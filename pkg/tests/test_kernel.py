"""Spectral density, dispersive kernels, bands and the stationary-phase
majorant."""

import numpy as np
import pytest

from conicwave import (DomainError, KernelEngine, standard_case_library,
                       stationary_phase_check)
from conicwave.kernel import (KIND_SCHRODINGER, StationaryPhaseCase,
                              _compact_bump, _compact_bump_d)


# ---------------------------------------------------------------------------
# spectral density
# ---------------------------------------------------------------------------

def test_density_cylinder_closed_form(cylinder_engine):
    for (xi, xip, lam) in [(3.0, 1.0, 0.7), (5.0, -2.0, 1.3),
                           (-4.0, -9.0, 0.35), (2.0, 2.0, 5.0),
                           (40.0, -11.0, 2e-3)]:
        d = cylinder_engine.spectral_density(xi, xip, lam)
        assert abs(d - np.cos(lam * (xi - xip))) <= 1e-10


def test_density_symmetry(hyperboloid_engine, rng):
    for _ in range(12):
        xi = rng.uniform(-200, 200)
        xip = rng.uniform(-200, 200)
        lam = 10 ** rng.uniform(-3, 1)
        a = hyperboloid_engine.spectral_density(xi, xip, lam)
        b = hyperboloid_engine.spectral_density(xip, xi, lam)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_density_diagonal_positivity(hyperboloid_engine, rng):
    # pins the Wronskian sign convention
    vals = []
    for _ in range(200):
        xi = rng.uniform(-800, 800)
        lam = 10 ** rng.uniform(-4, 1.5)
        vals.append(hyperboloid_engine.spectral_density(xi, xi, lam))
    assert min(vals) >= -1e-10


def test_density_of_states_slope(cylinder_engine):
    from scipy.integrate import quad
    val = quad(lambda l: cylinder_engine.spectral_density(2.0, 2.0, l),
               1e-6, 3.0, limit=200)[0]
    assert abs(val / 3.0 - 1.0) <= 0.01


# ---------------------------------------------------------------------------
# evolution kernel
# ---------------------------------------------------------------------------

def test_cylinder_fresnel_oracle(cylinder_engine):
    # closed-form free kernel, symmetrised over the half-line spectrum
    for (t, xi, xip) in [(10.0, 3.0, -2.0), (100.0, 0.0, 0.0),
                         (1000.0, 30.0, 10.0)]:
        ks = cylinder_engine.evolution_kernel(KIND_SCHRODINGER, t, xi, xip)
        th = xi - xip
        closed = 0.25 * np.sqrt(np.pi / t) * np.exp(1j * np.pi / 4) \
            * np.exp(-1j * th ** 2 / (4 * t)) * ks.weight
        assert abs(ks.value - closed) <= 1e-4
        assert ks.err_est <= 1e-4 * max(1.0, abs(ks.value))


def test_time_reversal(hyperboloid_engine):
    k1 = hyperboloid_engine.evolution_kernel(KIND_SCHRODINGER, 37.0, 5.0, 1.0)
    k2 = hyperboloid_engine.evolution_kernel(KIND_SCHRODINGER, -37.0, 5.0, 1.0)
    assert abs(k1.value - np.conj(k2.value)) <= 1e-8


def test_wave_minus_is_conjugate_evolution(cylinder_engine):
    from conicwave.kernel import KIND_WAVE_MINUS, KIND_WAVE_PLUS
    kp = cylinder_engine.band_kernel(KIND_WAVE_PLUS, "low_low",
                                     500.0, 3.0, -2.0)
    km = cylinder_engine.band_kernel(KIND_WAVE_MINUS, "low_low",
                                     500.0, 3.0, -2.0)
    assert abs(km.value - np.conj(kp.value)) <= 1e-12


def test_band_partition_of_unity(hyperboloid_engine, rng):
    worst = 0.0
    for _ in range(20):
        t = 10 ** rng.uniform(0.5, 3.5)
        xi = rng.choice([-1, 1]) * 10 ** rng.uniform(-0.5, 2.9)
        xip = rng.choice([-1, 1]) * 10 ** rng.uniform(-0.5, 2.9)
        full = hyperboloid_engine.evolution_kernel(KIND_SCHRODINGER, t, xi, xip)
        tot = 0.0 + 0j
        for band, args in [("low_low", (xi, xip)), ("osc_osc", (xi, xip)),
                           ("osc_low", (xi, xip)), ("osc_low", (xip, xi)),
                           ("high_energy", (xi, xip))]:
            tot += hyperboloid_engine.band_kernel(KIND_SCHRODINGER, band, t,
                                                  *args).value
        worst = max(worst, abs(tot - full.value) / abs(full.value))
    assert worst <= 1e-5


def test_quadrature_self_consistency(cylinder_model):
    e1 = KernelEngine(cylinder_model, xi_abs_max=50.0)
    e2 = KernelEngine(cylinder_model, xi_abs_max=50.0, panel_ratio=7.0 / 6.0,
                      s_panel=0.45)
    for band in ("low_low", "high_energy", None):
        for (t, xi, xip) in [(100.0, 3.0, -2.0), (20.0, 0.5, -0.1)]:
            if band:
                k1 = e1.band_kernel(KIND_SCHRODINGER, band, t, xi, xip)
                k2 = e2.band_kernel(KIND_SCHRODINGER, band, t, xi, xip)
            else:
                k1 = e1.evolution_kernel(KIND_SCHRODINGER, t, xi, xip)
                k2 = e2.evolution_kernel(KIND_SCHRODINGER, t, xi, xip)
            assert abs(k1.value - k2.value) <= max(k1.err_est, k2.err_est)


def test_band_sign_precondition(hyperboloid_engine):
    with pytest.raises(DomainError):
        hyperboloid_engine.band_kernel(KIND_SCHRODINGER, "same_side_osc",
                                       10.0, 5.0, -3.0)
    with pytest.raises(DomainError):
        hyperboloid_engine.band_kernel(KIND_SCHRODINGER, "no_such_band",
                                       10.0, 5.0, 3.0)
    with pytest.raises(DomainError):
        hyperboloid_engine.evolution_kernel(KIND_SCHRODINGER, 0.0, 1.0, 0.0)


# ---------------------------------------------------------------------------
# smeared wave kernel
# ---------------------------------------------------------------------------

def _bump_grid(center=0.0, half=1.0, n=41):
    x = np.linspace(center - half, center + half, n)
    return x, _compact_bump(x, center - half, center + half), \
        _compact_bump_d(x, center - half, center + half)


def test_wave_smeared_zero_function(cylinder_engine):
    x = np.linspace(-1, 1, 21)
    assert cylinder_engine.wave_smeared(0.0, 100.0, x, np.zeros_like(x),
                                        np.zeros_like(x)) == 0.0


def test_wave_smeared_cylinder_oracle(cylinder_engine):
    # For the cylinder the high-energy smeared kernel has the closed form
    #   sum_j w_j phi_j w(xi,xi') * (G(t+xi-xi') + G(t-xi+xi'))/4
    # with G(u) = i/u - int_0^lam_low chi(lam) e^{i u lam} dlam (Abel).
    from conicwave.kernel import chi_low
    eng = cylinder_engine
    x, phi, dphi = _bump_grid()
    t, xi = 100.0, 0.0

    def G(u):
        lam = np.linspace(0, eng.lam_low, 4001)
        integ = chi_low(lam, eng.lam_low) * np.exp(1j * u * lam)
        return 1j / u - np.trapezoid(integ, lam)

    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    acc = 0.0 + 0j
    for xq, wq, pv in zip(x, w, phi):
        if pv == 0.0:
            continue
        weight = (np.hypot(xi, 1) * np.hypot(xq, 1)) ** -0.5
        acc += wq * pv * weight * 0.25 * (G(t + xi - xq) + G(t - xi + xq))
    norm = np.sum(w * np.abs(phi)) + np.sum(w * np.abs(dphi))
    oracle_ratio = abs(acc) / (t ** -0.5 * norm)
    got = eng.wave_smeared(xi, t, x, phi, dphi)
    assert abs(got - oracle_ratio) <= 0.02 * oracle_ratio


def test_wave_smeared_no_growth(cylinder_engine):
    x, phi, dphi = _bump_grid()
    r100 = cylinder_engine.wave_smeared(0.0, 100.0, x, phi, dphi)
    r400 = cylinder_engine.wave_smeared(0.0, 400.0, x, phi, dphi)
    assert r400 <= 2.0 * r100
    assert r100 < 1.0


def test_wave_smeared_translation(hyperboloid_engine):
    x0, phi0, dphi0 = _bump_grid(0.0)
    x5, phi5, dphi5 = _bump_grid(-50.0)
    r0 = hyperboloid_engine.wave_smeared(0.0, 100.0, x0, phi0, dphi0)
    r5 = hyperboloid_engine.wave_smeared(0.0, 100.0, x5, phi5, dphi5)
    assert r5 <= 2.0 * max(r0, 1e-6) + 2.0 * r0


def test_wave_smeared_rejects_bad_grid(cylinder_engine):
    with pytest.raises(DomainError):
        cylinder_engine.wave_smeared(0.0, 10.0, np.array([0.0, 1.0]),
                                     np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        cylinder_engine.wave_smeared(0.0, 10.0, np.linspace(0, 1, 5),
                                     np.array([1, np.inf, 1, 1, 1.0]))


# ---------------------------------------------------------------------------
# stationary phase
# ---------------------------------------------------------------------------

def test_stationary_phase_gaussian_oracle():
    for t in (1e2, 1e4):
        case = standard_case_library((t,))[0]
        lhs, rhs = stationary_phase_check(case)
        assert abs(lhs - abs(case.oracle)) <= 1e-6
        assert lhs <= 10.0 * rhs


def test_stationary_phase_zero_amplitude():
    case = StationaryPhaseCase(
        phase=lambda x: np.asarray(x) ** 2, dphase=lambda x: 2 * np.asarray(x),
        amplitude=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        damplitude=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        t=100.0, support=(-1.0, 1.0))
    lhs, rhs = stationary_phase_check(case)
    assert lhs == 0.0 and rhs == 0.0


def test_stationary_phase_curvature_guard():
    case = StationaryPhaseCase(
        phase=lambda x: 0.25 * np.asarray(x) ** 2,
        dphase=lambda x: 0.5 * np.asarray(x),
        amplitude=lambda x: np.exp(-np.asarray(x) ** 2),
        damplitude=lambda x: -2 * np.asarray(x) * np.exp(-np.asarray(x) ** 2),
        t=100.0, support=(-1.0, 1.0))
    with pytest.raises(DomainError):
        stationary_phase_check(case)


def test_stationary_phase_nonstationary_bump_decay():
    # support away from the critical point: both sides decay like 1/t
    vals = []
    for t in (1e2, 1e4):
        case = [c for c in standard_case_library((t,))
                if c.label.startswith("bump_outside")][0]
        lhs, rhs = stationary_phase_check(case)
        vals.append((lhs, rhs))
        assert lhs <= 10.0 * rhs
    assert vals[1][0] <= vals[0][0] * 1e-1


# ---------------------------------------------------------------------------
# decay scan (cylinder free rate)
# ---------------------------------------------------------------------------

def test_cylinder_decay_rate(cylinder_engine):
    rep = cylinder_engine.decay_scan(
        KIND_SCHRODINGER, np.geomspace(10.0, 1.0e3, 7),
        spatial_grid=np.array([0.0, 1.0, 3.0]))
    assert abs(rep.fit_alpha - 0.5) <= 0.05
    assert rep.fit_R2 >= 0.99
