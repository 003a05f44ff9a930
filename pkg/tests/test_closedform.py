import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate
from scipy import stats

from fama_idet.channel import SystemParams, port_correlation
from fama_idet.closedform import (
    EnergyInputs,
    WetOutageInputs,
    avg_energy_gl,
    avg_energy_quadrature,
    energy_discrepancy_report,
    expected_max_harvest,
    max_harvest_pdf,
    reliable_throughput,
    system_wdt_outage,
    wdt_outage,
    wet_outage_gl,
    wet_outage_quadrature,
)
from fama_idet.errors import DomainError

MU1 = port_correlation(1.0).mu
MU2 = port_correlation(2.0).mu


# --- WDT ---------------------------------------------------------------------

def test_wdt_outage_values():
    assert wdt_outage(4, 0.0, 1.0, 2) == 0.0
    assert wdt_outage(1, 0.0, 2.0, 2) == 0.5
    assert wdt_outage(10, 0.5, 1e6, 3) == pytest.approx(1.0, abs=1e-9)
    mu = 0.4
    expected = 1 - 3 * (mu**2 / 5) ** 2 - 3 * ((1 - mu**2) / 4) ** 2
    assert wdt_outage(3, mu, 4.0, 3) == pytest.approx(expected, rel=1e-15)


def test_wdt_outage_domain():
    for args in ((1, 0.5, 2.0, 1), (1, 0.5, 0.0, 2), (0, 0.5, 2.0, 2), (1, 1.0, 2.0, 2)):
        with pytest.raises(DomainError):
            wdt_outage(*args)


def test_system_outage_and_throughput():
    assert system_wdt_outage(4, 0.0, 1.0, 2) == 0.0
    s = 1 - wdt_outage(1, 0.3, 5.0, 2)
    assert system_wdt_outage(1, 0.3, 5.0, 2) == pytest.approx(1 - s * s, rel=1e-14)
    assert reliable_throughput(3, 0.5, 2.0, 4, 0.0) == 0.0
    assert reliable_throughput(3, 0.5, 1e-12, 4, 0.7) == pytest.approx(0.0, abs=1e-11)
    tau = reliable_throughput(1, 0.0, 2.0, 2, 0.5)
    assert tau == pytest.approx(2 * math.log2(3) * 0.5 * 0.25, rel=1e-14)
    nats = reliable_throughput(1, 0.0, 2.0, 2, 0.5, log_base=math.e)
    assert nats == pytest.approx(tau * math.log(2), rel=1e-14)
    with pytest.raises(DomainError):
        reliable_throughput(1, 0.0, 2.0, 2, 1.5)


@settings(max_examples=200, deadline=None)
@given(k=st.integers(1, 200), mu=st.floats(0, 0.99), gamma=st.floats(0.05, 1e4), n=st.integers(2, 12))
def test_system_outage_identity(k, mu, gamma, n):
    p = wdt_outage(k, mu, gamma, n)
    sys_p = system_wdt_outage(k, mu, gamma, n)
    assert 0.0 <= p <= sys_p <= 1.0
    if p > 0.0:
        assert sys_p == pytest.approx(1 - (1 - p) ** n, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(k=st.integers(1, 50), mu=st.floats(0, 0.95), g1=st.floats(0.5, 100), g2=st.floats(0.5, 100),
       n=st.integers(2, 8))
def test_wdt_outage_monotone(k, mu, g1, g2, n):
    lo, hi = sorted((g1, g2))
    assert wdt_outage(k, mu, lo, n) <= wdt_outage(k, mu, hi, n) + 1e-15
    assert wdt_outage(k + 1, mu, lo, n) <= wdt_outage(k, mu, lo, n) + 1e-15
    assert wdt_outage(k, mu, lo, n) <= wdt_outage(k, mu, lo, n + 1) + 1e-15


def test_throughput_interior_maximum_on_fig4_grid():
    mu = MU2
    gammas = [10 ** (d / 10) for d in range(0, 21)]
    thr = [reliable_throughput(5000, mu, g, 4, 0.5) for g in gammas]
    i = int(np.argmax(thr))
    assert 0 < i < len(thr) - 1


# --- WET outage --------------------------------------------------------------

def test_wet_outage_inputs():
    p = SystemParams(n_pairs=3, n_ports=7, antenna_size=1.0, harvest_threshold=18.0, tx_power=2.0)
    inp = WetOutageInputs.from_params(p)
    assert inp.normalized_threshold == pytest.approx(18.0 / (2.0 * (1 - MU1**2)))
    with pytest.raises(DomainError):
        WetOutageInputs(2, 3, 1.0, 1.0)
    with pytest.raises(DomainError):
        WetOutageInputs(2, 3, 0.5, -1.0)


def test_wet_outage_zero_threshold():
    inp = WetOutageInputs(4, 10, MU1, 0.0)
    assert wet_outage_quadrature(inp) == 0.0
    assert wet_outage_gl(inp, 100) == 0.0


@pytest.mark.parametrize("n,k,t", [(1, 1, 2.0), (3, 5, 7.0), (6, 40, 20.0)])
def test_wet_outage_central_reduction(n, k, t):
    inp = WetOutageInputs(n, k, 0.0, t)
    exact = stats.chi2.cdf(t, 2 * n) ** k
    assert wet_outage_quadrature(inp) == pytest.approx(exact, abs=1e-10)
    assert wet_outage_gl(inp, 100) == pytest.approx(exact, abs=1e-12)


def test_wet_outage_matches_scipy_quadrature():
    # Independent referee: scipy quad over the same conditional-CDF representation.
    n, k, mu, t = 3, 8, MU1, 12.0
    c = mu * mu / (1 - mu * mu)

    def g(r):
        q = stats.ncx2.sf(t, 2 * n, c * r) if r > 0 else stats.chi2.sf(t, 2 * n)
        return stats.chi2.pdf(r, 2 * n) * (1 - q) ** k

    ref, _ = sp_integrate.quad(g, 0, np.inf, epsabs=1e-12, limit=200)
    assert wet_outage_quadrature(WetOutageInputs(n, k, mu, t)) == pytest.approx(ref, abs=1e-9)


def test_wet_outage_single_port_is_marginal_cdf():
    # With K = 1 the conditioning averages out: Y_1 ~ chi2_{2N} / (1 - mu^2).
    n, mu, t = 4, MU2, 9.0
    exact = stats.chi2.cdf(t * (1 - mu * mu), 2 * n)
    assert wet_outage_quadrature(WetOutageInputs(n, 1, mu, t)) == pytest.approx(exact, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 6), k=st.integers(1, 60), mu=st.floats(0, 0.95),
       t1=st.floats(0.1, 60), t2=st.floats(0.1, 60))
def test_wet_outage_properties(n, k, mu, t1, t2):
    lo, hi = sorted((t1, t2))
    a = wet_outage_gl(WetOutageInputs(n, k, mu, lo), 80)
    b = wet_outage_gl(WetOutageInputs(n, k, mu, hi), 80)
    assert 0.0 <= a <= b + 1e-12 <= 1.0 + 1e-12
    assert wet_outage_gl(WetOutageInputs(n, k + 5, mu, lo), 80) <= a + 1e-12
    assert wet_outage_gl(WetOutageInputs(n + 1, k, mu, lo), 80) <= a + 1e-12


@pytest.mark.parametrize("n", [2, 4, 8])
@pytest.mark.parametrize("k", [1, 10, 100])
def test_wet_gl_agrees_with_reference(n, k):
    for w in (0.5, 1.0, 2.0):
        inp = WetOutageInputs(n, k, port_correlation(w).mu, 2.0 * n + 4.0)
        assert wet_outage_gl(inp, 100) == pytest.approx(wet_outage_quadrature(inp), abs=1e-9)


# --- Density of the maximum and average energy --------------------------------

def test_pdf_central_single_port():
    z = np.array([0.5, 3.0, 10.0])
    np.testing.assert_allclose(max_harvest_pdf(z, 3, 1, 0.0), stats.chi2.pdf(z, 6), rtol=1e-9)
    assert isinstance(max_harvest_pdf(3.0, 3, 1, 0.0), float)


@pytest.mark.parametrize("n,k,mu", [(2, 5, MU1), (4, 10, MU2), (3, 50, 0.9)])
def test_pdf_normalizes_and_is_cdf_derivative(n, k, mu):
    total, _ = sp_integrate.quad(lambda z: max_harvest_pdf(z, n, k, mu), 0, np.inf, limit=200,
                                 epsabs=1e-10)
    assert total == pytest.approx(1.0, abs=1e-6)
    z0, h = 2.0 * n + 3.0, 1e-3
    cdf = [wet_outage_quadrature(WetOutageInputs(n, k, mu, z), epsabs=1e-13) for z in (z0 - h, z0 + h)]
    fd = (cdf[1] - cdf[0]) / (2 * h)
    assert max_harvest_pdf(z0, n, k, mu) == pytest.approx(fd, abs=1e-5)


def test_expected_max_against_survival_integral():
    n, k, mu = 3, 20, MU1
    surv, _ = sp_integrate.quad(lambda z: 1 - wet_outage_quadrature(WetOutageInputs(n, k, mu, z)),
                                0, np.inf, limit=200, epsabs=1e-9)
    assert expected_max_harvest(n, k, mu) == pytest.approx(surv, rel=1e-7)


def test_avg_energy_reductions():
    assert avg_energy_quadrature(EnergyInputs(0.0, 4, 10, MU1)) == 0.0
    assert avg_energy_gl(EnergyInputs(0.0, 4, 10, MU1)) == 0.0
    assert avg_energy_gl(EnergyInputs(0.0, 4, 10, MU1), verbatim=True) == 0.0
    psi = 2.5e-4
    assert avg_energy_quadrature(EnergyInputs(psi, 3, 1, 0.0)) == pytest.approx(psi * 6, rel=1e-7)
    assert avg_energy_gl(EnergyInputs(psi, 3, 1, 1e-9)) == pytest.approx(psi * 6, rel=1e-7)


def test_energy_inputs_from_params():
    p = SystemParams(ts_ratio=0.25, period=2e-3, tx_power=3.0, antenna_size=1.0)
    inp = EnergyInputs.from_params(p)
    assert inp.psi == pytest.approx(0.75 * (1 - MU1**2) * 2e-3 * 3.0)
    assert EnergyInputs.from_params(p.replace(ts_ratio=1.0)).psi == 0.0


@pytest.mark.parametrize("k", [1, 10, 50, 100, 200, 400, 800, 1000])
def test_corrected_double_sum_matches_reference(k):
    inp = EnergyInputs(1.0, 4, k, MU1)
    assert avg_energy_gl(inp, 150, 150) == pytest.approx(avg_energy_quadrature(inp), rel=5e-3)


def test_discrepancy_report_names_corrected_variant():
    rep = energy_discrepancy_report(EnergyInputs(1.0, 4, 100, MU1))
    assert rep["matching"] == ["corrected"]
    assert rep["verbatim"] == pytest.approx(1.0, rel=1e-6)
    assert rep["verbatim_rel_error"] > 0.5


def test_avg_energy_monotone():
    base = SystemParams(n_pairs=4, antenna_size=1.0)
    by_alpha = [avg_energy_quadrature(EnergyInputs.from_params(base.replace(ts_ratio=a)))
                for a in (0.0, 0.3, 0.6, 1.0)]
    assert all(b < a for a, b in zip(by_alpha, by_alpha[1:]))
    by_k = [avg_energy_quadrature(EnergyInputs.from_params(base.replace(n_ports=k)))
            for k in (1, 5, 20, 100, 500)]
    assert all(b > a for a, b in zip(by_k, by_k[1:]))
