"""Jost solutions, scattering coefficients and the asymptotic laws."""

import numpy as np
import pytest

from conicwave import C0, C1, KAPPA, DomainError, f0_values
from conicwave.jost import wr


# ---------------------------------------------------------------------------
# cylinder exactness
# ---------------------------------------------------------------------------

def test_cylinder_plane_waves(cylinder_model):
    for lam in (0.5, 2.0):
        fp = cylinder_model.jost_plus(lam, xi_min=-20.0)
        xs = np.linspace(-20.0, 60.0, 33)
        v, d = fp.values(xs)
        assert np.max(np.abs(v - np.exp(1j * lam * xs))) <= 1e-10
        assert np.max(np.abs(d - 1j * lam * np.exp(1j * lam * xs))) <= 1e-10
        fm = cylinder_model.jost_minus(lam, xi_max=20.0)
        v, d = fm.values(xs[::-1] * -1)
        assert np.max(np.abs(v - np.exp(1j * lam * xs[::-1]))) <= 1e-10


def test_cylinder_scattering_constants(cylinder_model):
    for lam in (0.5, 2.0, 1e-6):
        W = cylinder_model.wronskian(lam)
        assert abs(abs(W) - 2 * lam) <= 1e-10 * max(1.0, 2 * lam)
        assert abs(W + 2j * lam) <= 1e-10
        alpha, beta = cylinder_model.reflection_transmission(lam)
        assert abs(alpha) <= 1e-10
        assert abs(abs(beta) - 1.0) <= 1e-10


def test_cylinder_connection_coefficients(cylinder_model):
    ap, bp, am, bm = cylinder_model.connection_coefficients(0.5)
    assert abs(ap - 1.0) <= 1e-9
    assert abs(bp - 0.5j) <= 1e-9
    assert abs(am - 1.0) <= 1e-9
    assert abs(bm + 0.5j) <= 1e-9


def test_cylinder_zero_energy_basis(cylinder_model):
    zb = cylinder_model.zero_energy_basis()
    xs = np.linspace(-30.0, 30.0, 13)
    assert np.max(np.abs(zb.u0(xs) - 1.0)) <= 1e-12
    assert np.max(np.abs(zb.u1(xs) - xs)) <= 1e-10 * (1 + np.abs(xs).max())


# ---------------------------------------------------------------------------
# hyperboloid: oscillatory pipeline
# ---------------------------------------------------------------------------

def test_symmetric_reflection_identity(hyperboloid_model):
    lam = 0.5
    fp = hyperboloid_model.jost_plus(lam, xi_min=-30.0)
    fm = hyperboloid_model.jost_minus(lam, xi_max=30.0)
    xs = np.linspace(-25.0, 25.0, 21)
    vp, _ = fp.values(xs)
    vm, _ = fm.values(-xs)
    assert np.max(np.abs(vm - vp) / np.abs(vp)) <= 1e-8


def test_wronskian_constancy_of_jost_pair(hyperboloid_model):
    lam = 0.5
    fp = hyperboloid_model.jost_plus(lam, xi_min=-30.0)
    fm = hyperboloid_model.jost_minus(lam, xi_max=30.0)
    xs = np.linspace(-22.0, 22.0, 10)
    vp, dp = fp.values(xs)
    vm, dm = fm.values(xs)
    W = wr(vp, dp, vm, dm)
    assert np.max(np.abs(W - W.mean())) <= 1e-7 * abs(W.mean())


def test_wave_sample_h_residual(hyperboloid_model):
    # interior finite differences reproduce lam^2 f - V f to 1e-5 relative
    lam = 0.7
    ev = hyperboloid_model.jost_plus(lam, xi_min=-10.0)
    pot = hyperboloid_model.pot
    for xi0 in (2.1, 7.9, 33.0, 210.0):
        h = 1e-3
        v, _ = ev.values(np.array([xi0 - h, xi0, xi0 + h]))
        second = (v[0] - 2 * v[1] + v[2]) / h ** 2
        resid = -second + (pot.V(xi0) - lam ** 2) * v[1]
        assert abs(resid) <= 1e-5 * abs(lam ** 2 * v[1])


def test_m_plus_decay_law(hyperboloid_model):
    # |m+ - 1| <= C/(lam xi), fitted C on a scan, checked mid-window
    lam = 0.5
    rec = hyperboloid_model._m_side("plus", lam, xi_hi=500.0)
    xis = np.geomspace(4.0, 500.0, 15)
    v, _ = hyperboloid_model._m_record_values(rec, xis)
    m = v * np.exp(-1j * lam * xis)
    C = np.max(lam * xis * np.abs(m - 1.0))
    v40, _ = hyperboloid_model._m_record_values(rec, np.array([40.0]))
    m40 = v40[0] * np.exp(-1j * lam * 40.0)
    assert abs(m40 - 1.0) <= C / (lam * 40.0) * (1 + 1e-9)
    assert C < 0.5


def test_f_plus_approaches_f0_low_energy(hyperboloid_model):
    # |f+ - f0| <= C xi^{-1/2} lam^{0.4} on [log^2 lam, lam^{-1/2}]
    worst = 0.0
    for lam in (1e-3, 1e-4, 1e-5):
        ev = hyperboloid_model.jost_plus(lam)
        xis = np.geomspace(np.log(lam) ** 2, lam ** -0.5, 7)
        v, _ = ev.values(xis)
        f0v, _ = f0_values(xis, lam)
        worst = max(worst, np.max(np.abs(v - f0v) * np.sqrt(xis))
                    / lam ** 0.4)
    assert worst <= 0.6     # frozen from the development scan (max 0.38)


# ---------------------------------------------------------------------------
# zero-energy and perturbed bases
# ---------------------------------------------------------------------------

def test_zero_energy_asymptotics(hyperboloid_model):
    from conicwave import fit_conical_constants
    zb = hyperboloid_model.zero_energy_basis()
    fit = fit_conical_constants(hyperboloid_model.chart, "right")
    xi = 1.0e4
    ratio = zb.u0(xi) / (2 ** -0.25 * np.sqrt(xi))
    assert abs(ratio - (1.0 - fit.c_inf / (2 * xi))) <= 1e-3
    c2 = hyperboloid_model.fit_c2()
    val = zb.u1(xi) / zb.u0(xi) - np.sqrt(2.0) * (np.log(xi) + c2)
    assert abs(val) <= 1e-2


def test_zero_energy_annihilated(hyperboloid_model):
    zb = hyperboloid_model.zero_energy_basis()
    pot = hyperboloid_model.pot
    for xi0 in (0.9, 17.0, -110.0):
        h = 1e-3
        pts = np.array([xi0 - h, xi0, xi0 + h])
        for u in (zb.u0, zb.u1):
            vals = u(pts)
            second = (vals[0] - 2 * vals[1] + vals[2]) / h ** 2
            resid = -second + pot.V(xi0) * vals[1]
            scale = max(abs(vals[1]), 1.0)
            assert abs(resid) <= 1e-6 * scale
    xs = np.linspace(-200.0, 200.0, 9)
    w = wr(zb.u0(xs), zb.du0(xs), zb.u1(xs), zb.du1(xs))
    assert np.max(np.abs(w - 1.0)) <= 1e-8


def test_low_energy_basis_limits(hyperboloid_model):
    # lam -> 0 pointwise limit
    lb = hyperboloid_model.low_energy_basis(1e-8, window=120.0)
    zb = hyperboloid_model.zero_energy_basis()
    xs = np.linspace(-100.0, 100.0, 17)
    rel0 = np.abs(lb.u0(xs) / zb.u0(xs) - 1.0)
    rel1 = np.abs(lb.u1(xs[np.abs(xs) > 0.5]) / zb.u1(xs[np.abs(xs) > 0.5])
                  - 1.0)
    assert np.max(rel0) <= 1e-10
    assert np.max(rel1) <= 1e-10
    assert lb.wronskian_residual(xs) <= 1e-8


def test_low_energy_basis_quadratic_departure(hyperboloid_model):
    # u_j(xi, lam)/u_j(xi) - 1 = O((xi lam)^2), fitted constant
    lam = 1e-3
    lb = hyperboloid_model.low_energy_basis(lam, window=600.0)
    zb = hyperboloid_model.zero_energy_basis()
    xs = np.geomspace(20.0, 500.0, 10)
    dep = np.abs(lb.u0(xs) / zb.u0(xs) - 1.0)
    C = np.max(dep / (xs * lam) ** 2)
    assert dep[-1] <= C * (500.0 * lam) ** 2 * (1 + 1e-9)
    assert C < 1.0
    assert lb.wronskian_residual(np.array([10.0, 300.0, -450.0])) <= 1e-8


def test_low_energy_basis_lambda_derivative(hyperboloid_model):
    # centered lam-difference of u0(xi, lam) against the leading power law;
    # compared in magnitude (the energy-sign correction flips its sign
    # relative to the printed expansion, cf. the cylinder: d/dlam cos < 0)
    lam, xi = 1e-3, 500.0
    h = 1e-5 * 0.5
    lbp = hyperboloid_model.low_energy_basis(lam + h, window=600.0)
    lbm = hyperboloid_model.low_energy_basis(lam - h, window=600.0)
    der = (lbp.u0(np.array([xi]))[0] - lbm.u0(np.array([xi]))[0]) / (2 * h)
    lead = 0.5 * 2 ** -0.25 * lam * xi ** 2.5
    assert abs(abs(der) / lead - 1.0) <= 0.10


def test_low_energy_basis_window_guard(hyperboloid_model):
    with pytest.raises(DomainError):
        hyperboloid_model.low_energy_basis(1e-3, window=1.0e6)
    with pytest.raises(DomainError):
        hyperboloid_model.low_energy_basis(0.5)


# ---------------------------------------------------------------------------
# coefficients and the Wronskian laws
# ---------------------------------------------------------------------------

def test_symmetric_coefficient_relations(hyperboloid_model):
    for lam in (1e-3, 1e-5):
        ap, bp, am, bm = hyperboloid_model.connection_coefficients(lam)
        assert abs(am - ap) <= 1e-6 * abs(ap)
        assert abs(bm + bp) <= 1e-6 * abs(bp)


def test_b_plus_low_energy_law(hyperboloid_model):
    lams = np.geomspace(1e-6, 1e-3, 7)
    res = []
    for lam in lams:
        _, bp, _, _ = hyperboloid_model.connection_coefficients(lam)
        res.append(abs(bp / (1j * 2 ** -0.25 * C0 * C1 * np.sqrt(lam)) - 1.0))
    res = np.asarray(res)
    rate = np.polyfit(np.log(lams), np.log(res), 1)[0]
    assert res[0] <= 0.05
    assert rate >= 0.4


def test_a_plus_log_law_constant(hyperboloid_model):
    vals = []
    for lam in (1e-6, 1e-5):
        ap, _, _, _ = hyperboloid_model.connection_coefficients(lam)
        z = ap / (2 ** 0.25 * C0 * np.sqrt(lam)) - (1 + 1j * C1 * np.log(lam))
        vals.append(z)
    # residual converges to i*c3 with c3 = kappa - c1 c2
    c3 = KAPPA - C1 * hyperboloid_model.fit_c2()
    for z in vals:
        assert abs(z.real) <= 5e-3
        assert abs(z.imag - c3) <= 0.01


def test_wronskian_low_energy_log_law(hyperboloid_model):
    c3 = KAPPA - C1 * hyperboloid_model.fit_c2()
    for lam in (1e-6, 1e-5, 1e-4):
        W = hyperboloid_model.wronskian(lam)
        z = W / (2 * lam) - 1j * C1 * np.log(lam)
        assert abs(z - (1.0 + 1j * c3)) <= 0.05 * abs(z)


def test_wronskian_high_energy_bounded(hyperboloid_model):
    for lam in (10.0, 40.0, 100.0):
        W = hyperboloid_model.wronskian(lam)
        assert abs(W + 2j * lam) <= 1.0


def test_reflection_transmission_laws(hyperboloid_model):
    lam = 1e-5
    alpha, beta = hyperboloid_model.reflection_transmission(lam)
    c3 = KAPPA - C1 * hyperboloid_model.fit_c2()
    assert abs((alpha / 1j - C1 * np.log(lam)) - c3) <= 0.05 * abs(c3) \
        + 0.05 * abs(C1 * np.log(lam)) * 0 + 0.05
    # high energy: alpha = O(lam^-2), beta = 1 + O(1/lam)
    scan = [(lam2, *hyperboloid_model.reflection_transmission(lam2))
            for lam2 in (10.0, 25.0, 50.0)]
    Ca = max(abs(a) * l ** 2 for l, a, _ in scan)
    Cb = max(abs(b - 1.0) * l for l, _, b in scan)
    l, a, b = 50.0, *hyperboloid_model.reflection_transmission(50.0)
    assert abs(a) <= Ca / l ** 2 * (1 + 1e-9)
    assert abs(b - 1.0) <= Cb / l * (1 + 1e-9)
    assert Ca < 10.0 and Cb < 10.0


def test_unitarity_identity(hyperboloid_model):
    for lam in (1e-6, 1e-4, 0.5, 7.0):
        alpha, beta = hyperboloid_model.reflection_transmission(lam)
        assert abs(abs(beta) ** 2 - abs(alpha) ** 2 - 1.0) <= 1e-5


def test_no_wronskian_zeros(hyperboloid_model):
    lams = np.geomspace(1e-6, 50.0, 12)
    vals = [abs(hyperboloid_model.wronskian(l)) / (2 * l) for l in lams]
    assert min(vals) >= 1.0 - 1e-6


def test_scattering_data_residuals(hyperboloid_model):
    for lam in (1e-4, 0.5):
        sd = hyperboloid_model.scattering_data(lam)
        assert sd.residuals["wronskian_constancy"] <= 1e-6
        assert sd.residuals["connection_identity"] <= 1e-6
        assert sd.residuals["beta_from_W"] <= 1e-6
        assert sd.residuals["unitarity"] <= 1e-5
        assert sd.residuals["lower_bound"] <= 1e-9


def test_pipeline_overlap(hyperboloid_model):
    # low-energy representation vs oscillatory continuation, 2 <= xi lam <= 4
    for lam in (1e-3, 1e-2):
        lo = hyperboloid_model.jost_plus(lam, pipeline="low")
        osc = hyperboloid_model.jost_plus(lam, pipeline="osc")
        xis = np.linspace(2.0 / lam, min(4.0 / lam, 0.98 * lo.window[1]), 9)
        vl, dl = lo.values(xis)
        vo, do = osc.values(xis)
        assert np.max(np.abs(vl - vo) / np.abs(vo)) <= 1e-4
        assert np.max(np.abs(dl - do) / np.abs(do)) <= 1e-4


def test_wronskian_pipeline_agreement(hyperboloid_model):
    m = hyperboloid_model
    for lam in (1e-3, 3e-3, 1e-2):
        Wl = m.wronskian(lam, pipeline="low")
        rp = m._m_side("plus", lam)
        rm = m._m_side("minus", lam)
        fp, dfp = m._m_record_values(rp, np.array([0.0]))
        fmv, dfmv = m._m_record_values(rm, np.array([0.0]))
        Wo = complex(wr(fp[0], dfp[0], fmv[0], -dfmv[0]))
        assert abs(Wl - Wo) <= 1e-5 * abs(Wo)


# ---------------------------------------------------------------------------
# validation suites
# ---------------------------------------------------------------------------

def test_validate_low_energy_suite(hyperboloid_model):
    consts, report = hyperboloid_model.validate_low_energy(
        np.geomspace(1e-6, 1e-2, 25))
    for name, rec in report.items():
        assert rec["ok"], f"{name}: {rec}"
    # fitted c3 agrees with kappa - c1 c2
    assert abs(consts.c3 - (KAPPA - C1 * consts.c2)) <= 0.03 * abs(consts.c3)
    # gamma constants at their symmetric-case values
    assert abs(consts.gamma0 - np.pi / (2 * np.sqrt(2))) <= 1e-3
    assert abs(consts.gamma1 - 1.0 / (np.sqrt(2) * np.pi)) <= 2e-3
    # c3 and the moment constant of the second expansion differ
    assert abs(consts.c3_tilde - consts.c3) > 0.05


def test_validate_high_energy_suite(hyperboloid_model):
    report = hyperboloid_model.validate_high_energy(
        np.geomspace(1.0, 100.0, 8))
    for name, rec in report.items():
        assert rec["ok"], f"{name}: {rec}"
    assert report["m_minus_one"]["constants"]["C"] < 1.0


def test_jost_rejects_bad_lambda(hyperboloid_model):
    with pytest.raises(DomainError):
        hyperboloid_model.jost_plus(0.0)
    with pytest.raises(DomainError):
        hyperboloid_model.wronskian(-1.0)
