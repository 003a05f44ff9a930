import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fama_idet.channel import SystemParams
from fama_idet.config import BaselineSpec, Curve, SweepSpec, parse_config, render_config
from fama_idet.errors import ConfigError
from fama_idet.montecarlo import MCConfig
from fama_idet.presets import PRESETS, figure_preset

MINIMAL = """
[sweep]
axis = K
values = [10, 100]
"""


def test_minimal_config_uses_defaults():
    spec = parse_config(MINIMAL)
    assert spec.axis == "K"
    assert spec.values == (10, 100)
    assert spec.base == SystemParams()
    assert spec.mc is None and spec.baseline is None
    assert spec.quadrature_order == 150
    assert spec.outputs == ("wdt_outage", "wet_outage", "avg_energy")


def test_gamma_db_is_converted():
    spec = parse_config(MINIMAL + "[system]\ngamma_db = 3.6\n")
    assert spec.base.sinr_threshold == 10 ** 0.36


def test_full_config():
    text = """
    # comment line
    [sweep]
    axis = N
    values = 2..5          # inclusive range
    outputs = wdt_outage, mimo_throughput
    quad_order = 64
    [system]
    K = 50
    W = 2
    Qth = 18
    alpha = 0.3
    noise_power = 0.01
    [mc]
    trials = 500
    seed = 12
    [baseline]
    antennas = 2
    [curve small]
    K = 10
    [curve big]
    K = 200
    gamma_db = 6.1
    """
    spec = parse_config(text)
    assert spec.values == (2, 3, 4, 5)
    assert spec.base.n_ports == 50 and spec.base.noise_power == 0.01
    assert spec.mc == MCConfig(trials=500, seed=12, batch=10_000)
    assert spec.baseline == BaselineSpec(antennas=2)
    assert [c.label for c in spec.curves] == ["small", "big"]
    big = spec.point_params(spec.curves[1], 4)
    assert big.n_pairs == 4 and big.n_ports == 200 and big.sinr_threshold == 10 ** 0.61


@pytest.mark.parametrize("text,line,key", [
    (MINIMAL + "[system]\nalpha = 1.5\n", 6, "alpha"),
    (MINIMAL + "[system]\nfoo = 1\n", 6, "foo"),
    ("[sweep]\naxis = K\n", 1, "values"),
    ("[sweep]\naxis = Z\nvalues = 1\n", 2, "axis"),
    ("[sweep]\naxis = K\nvalues = 3, 2, 5\n", 3, "values"),
    ("[sweep]\naxis = K\nvalues = 1.5\n", 3, "values"),
    (MINIMAL + "outputs = nonsense\n", 5, "outputs"),
    (MINIMAL + "outputs = mimo_throughput\n", 5, "outputs"),
    (MINIMAL + "[system]\nN = 0\n", 6, "N"),
    (MINIMAL + "[system]\nW = 7\n", 6, "W"),
    (MINIMAL + "[system]\ngamma = 2\ngamma_db = 3\n", 7, "gamma_db"),
    (MINIMAL + "[mc]\ntrials = 10\n", 6, "trials"),
    (MINIMAL + "[system]\nK = 2\nK = 3\n", 7, "K"),
])
def test_errors_name_line_and_key(text, line, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.key == key
    assert f"line {line}" in str(info.value) and key in str(info.value)


@pytest.mark.parametrize("text", ["[sweep]\naxis K\n", "axis = K\n", "[bogus]\n", "[curve]\nK = 1\n",
                                  MINIMAL + "[sweep]\n"])
def test_structural_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_sweep_section():
    with pytest.raises(ConfigError):
        parse_config("[system]\nN = 3\n")


@pytest.mark.parametrize("name", PRESETS)
def test_presets_round_trip(name):
    spec = figure_preset(name)
    assert parse_config(render_config(spec)) == spec


_float = st.floats(0.01, 100, allow_nan=False)


@st.composite
def specs(draw):
    base = SystemParams(
        n_pairs=draw(st.integers(2, 10)),
        n_ports=draw(st.integers(1, 500)),
        antenna_size=draw(st.floats(0.01, 6.0)),
        tx_power=draw(_float),
        period=draw(_float),
        ts_ratio=draw(st.floats(0, 1)),
        sinr_threshold=draw(_float),
        harvest_threshold=draw(_float),
        noise_power=draw(st.none() | st.floats(0, 10)),
    )
    axis = draw(st.sampled_from(["N", "K", "W", "gamma_db", "Qth", "alpha"]))
    if axis in ("N", "K"):
        vals = draw(st.lists(st.integers(1, 1000), min_size=1, max_size=6, unique=True))
    else:
        vals = draw(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6, unique=True))
    vals = tuple(sorted(vals))
    outputs = tuple(draw(st.lists(st.sampled_from(
        ["mu", "wdt_outage", "wet_outage", "avg_energy", "mimo_wdt_outage"]),
        min_size=1, max_size=4, unique=True)))
    baseline = BaselineSpec(draw(st.integers(1, 4)), draw(st.integers(100, 10**6)),
                            draw(st.integers(0, 2**64 - 1)))
    mc = draw(st.none() | st.builds(MCConfig, st.integers(100, 10**6), st.integers(0, 2**64 - 1),
                                    st.integers(1, 10**5), st.integers(1, 8)))
    curves = tuple(Curve(f"c{i}", (("K", draw(st.integers(1, 50))), ("W", draw(st.floats(0.1, 6.0)))))
                   for i in range(draw(st.integers(0, 3))))
    return SweepSpec(axis=axis, values=vals, base=base, outputs=outputs, mc=mc,
                     quadrature_order=draw(st.integers(1, 512)), curves=curves, baseline=baseline)


@settings(max_examples=150, deadline=None)
@given(specs())
def test_render_parse_round_trip(spec):
    assert parse_config(render_config(spec)) == spec


def test_large_seed_is_exact():
    spec = parse_config(MINIMAL + "[mc]\nseed = 9007199254740993\n")
    assert spec.mc.seed == 2**53 + 1
