import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fama_idet.channel import (
    ChannelRealization,
    PortCorrelation,
    SystemParams,
    harvest_power_per_port,
    port_correlation,
    sample_channel,
    sample_channels,
    select_wdt_port,
    select_wet_port,
    sir_per_port,
)
from fama_idet.errors import DomainError
from fama_idet.rng import KIND_MIMO, Substream, standard_normals, stream_key


def mu_oracle(w):
    mpmath.mp.dps = 40
    x = 2 * mpmath.pi * w
    val = mpmath.sqrt(2 * (mpmath.hyp1f2(0.5, 1, 1.5, -(mpmath.pi * w) ** 2) - mpmath.besselj(1, x) / x))
    mpmath.mp.dps = 15
    return float(val)


@pytest.mark.parametrize("w", [0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0])
def test_port_correlation_matches_extended_precision(w):
    assert port_correlation(w).mu == pytest.approx(mu_oracle(w), abs=1e-12)


def test_port_correlation_small_aperture():
    assert port_correlation(1e-6).mu == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("w", [0.0, -1.0, 6.5, float("nan"), float("inf")])
def test_port_correlation_domain(w):
    with pytest.raises(DomainError):
        port_correlation(w)


def test_port_correlation_decreases_with_size():
    mus = [port_correlation(w).mu for w in np.linspace(0.05, 6.0, 40)]
    assert all(0.0 <= m <= 1.0 for m in mus)
    assert mus[0] > mus[-1]


def test_port_correlation_type():
    with pytest.raises(DomainError):
        PortCorrelation(1.2)
    assert float(PortCorrelation(0.5)) == 0.5


def test_system_params_validation():
    p = SystemParams()
    assert p.gamma_db == pytest.approx(3.6)
    assert p.replace(n_ports=5).n_ports == 5
    for bad in ({"n_pairs": 0}, {"n_ports": 2.5}, {"ts_ratio": 1.5}, {"tx_power": 0.0},
                {"noise_power": -1.0}, {"antenna_size": float("nan")}, {"n_pairs": True}):
        with pytest.raises(DomainError):
            SystemParams(**bad)


def test_batches_reproduce_single_run():
    full = standard_normals(11, 2, 0, 37, 13)
    pieces = np.vstack([standard_normals(11, 2, s, c, 13) for s, c in ((0, 1), (1, 7), (8, 29))])
    assert np.array_equal(full, pieces)
    rows = np.vstack([standard_normals(11, 2, t, 1, 13) for t in range(37)])
    assert np.array_equal(full, rows)


def test_streams_are_distinct():
    a = standard_normals(1, 0, 0, 1, 8)
    assert not np.array_equal(a, standard_normals(1, 1, 0, 1, 8))
    assert not np.array_equal(a, standard_normals(2, 0, 0, 1, 8))
    assert not np.array_equal(a, standard_normals(1, 0, 0, 1, 8, KIND_MIMO))
    with pytest.raises(ValueError):
        stream_key(-1)


def test_normals_moments():
    z = standard_normals(3, 0, 0, 20000, 10).ravel()
    assert abs(z.mean()) < 5 / math.sqrt(z.size)
    assert z.var() == pytest.approx(1.0, abs=0.01)
    assert np.all(np.isfinite(z))


def test_sample_channel_is_deterministic_and_matches_batch():
    p = SystemParams(n_pairs=3, n_ports=6)
    mu = port_correlation(1.0)
    r1 = sample_channel(p, mu, Substream(seed=9, trial=4, ue=1))
    r2 = sample_channel(p, mu, Substream(seed=9, trial=4, ue=1))
    assert np.array_equal(r1.gains, r2.gains)
    gains, anchors = sample_channels(p, mu, 9, 0, 10, ue=1)
    assert np.array_equal(gains[4], r1.gains)
    assert np.array_equal(anchors[4], r1.anchors)
    assert r1.n_ports == 6 and r1.n_aps == 3


def test_gain_construction():
    p = SystemParams(n_pairs=2, n_ports=3)
    mu = 0.6
    real = sample_channel(p, mu, Substream(5, 0))
    s = math.sqrt(1 - mu * mu)
    x0, y0 = real.anchors[:, 0], real.anchors[:, 1]
    # Recover the independent parts; they must reconstruct the gains exactly.
    xk = (real.gains.real - mu * x0) / s
    yk = (real.gains.imag - mu * y0) / s
    np.testing.assert_allclose(s * xk + mu * x0 + 1j * (s * yk + mu * y0), real.gains)


def test_gain_statistics():
    p = SystemParams(n_pairs=2, n_ports=4)
    mu = 0.7
    gains, _ = sample_channels(p, mu, 1, 0, 40000)
    g = gains[:, :, 0]
    assert np.var(g.real) == pytest.approx(1.0, abs=0.03)
    assert np.var(g.imag) == pytest.approx(1.0, abs=0.03)
    corr = np.mean(g[:, 0].real * g[:, 1].real)
    assert corr == pytest.approx(mu * mu, abs=0.03)
    assert np.mean(g[:, 0].real * gains[:, 0, 1].real) == pytest.approx(0.0, abs=0.03)


def _manual_realization():
    gains = np.array([[1 + 0j, 1j], [2 + 0j, 0.5 + 0j], [0j, 3 + 0j]])
    return ChannelRealization(gains=gains, anchors=np.zeros((2, 2)))


def test_sir_and_harvest_per_port():
    real = _manual_realization()
    sir = sir_per_port(real, 0)
    np.testing.assert_allclose(sir, [1.0, 16.0, 0.0])
    np.testing.assert_allclose(sir_per_port(real, 1), [1.0, 1 / 16, np.inf])
    np.testing.assert_allclose(sir_per_port(real, 0, noise_power=1.0, tx_power=2.0),
                               [2 / 3, 8 / 1.5, 0.0])
    np.testing.assert_allclose(harvest_power_per_port(real, 2.0), [4.0, 8.5, 18.0])
    with pytest.raises(DomainError):
        sir_per_port(real, 2)


def test_port_selection():
    assert select_wdt_port([0.1, 3.0, 3.0, 2.0]) == 1
    assert select_wet_port(np.array([5.0])) == 0
    with pytest.raises(DomainError):
        select_wdt_port([])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), trial=st.integers(0, 10**9))
def test_selected_port_is_maximal(seed, trial):
    p = SystemParams(n_pairs=3, n_ports=8)
    real = sample_channel(p, 0.5, Substream(seed, trial))
    sir = sir_per_port(real, 0)
    q = harvest_power_per_port(real, 1.0)
    assert sir[select_wdt_port(sir)] == sir.max()
    assert q[select_wet_port(q)] == q.max()


def test_no_warnings_on_valid_range():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for w in np.linspace(0.01, 6.0, 25):
            port_correlation(float(w))
