import numpy as np
import pytest

from corrinfo.grid import radial_bins
from corrinfo.info import InfoParams, fisher_bits, radial_weight
from corrinfo.metrics import Curve
from corrinfo.transducer import MeasurementSeries, accumulate_fri, envelope, relative_tie, series_band_report, tie


def _series(seed, n_pairs, shape=(32, 32), signal=None, scale=1.0):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_pairs):
        s = signal if signal is not None else 0.0
        pairs.append((scale * (s + rng.standard_normal(shape)), scale * (s + rng.standard_normal(shape))))
    return MeasurementSeries(tuple(pairs), 1.0)


def _curve(values, kind="fsi"):
    values = np.asarray(values, dtype=float)
    f = np.arange(len(values)) / (2 * (len(values) - 1))
    return Curve(kind, values, f, 0.5)


def test_series_validation():
    with pytest.raises(ValueError):
        MeasurementSeries((), 1.0)
    with pytest.raises(ValueError):
        MeasurementSeries(((np.zeros((8, 8)), np.zeros((8, 9))),), 1.0)
    with pytest.raises(ValueError):
        MeasurementSeries(((np.zeros((8, 8, 8)), np.zeros((8, 8, 8))),), 1.0)
    assert len(_series(0, 3)) == 3


def test_identical_pair_ceiling():
    img = np.random.default_rng(1).standard_normal((32, 32))
    c = accumulate_fri(MeasurementSeries(((img, img),), 1.0), InfoParams(d=2, kappa=0.5))
    r = np.arange(c.n_shells)
    np.testing.assert_allclose(c.values, radial_weight(InfoParams(d=2, kappa=0.5), r) * fisher_bits(1.0))
    assert all("saturated" in f for f in c.flags)
    assert c.values[0] == 0


def test_shell_zero_is_zero_every_run():
    for seed in range(5):
        assert accumulate_fri(_series(seed, 3)).values[0] == 0


def test_noise_accumulation_spread_grows_sqrt():
    one = np.array([accumulate_fri(_series(s, 1)).values for s in range(120)])
    four = np.array([accumulate_fri(_series(1000 + s, 4)).values for s in range(120)])
    mid = slice(4, 14)
    assert np.all(np.abs(four[:, mid].mean(axis=0)) < 4 * four[:, mid].std(axis=0) / np.sqrt(120))
    ratio = four[:, mid].std(axis=0) / one[:, mid].std(axis=0)
    assert 1.6 < np.median(ratio) < 2.4


def test_concatenation_additive():
    a, b = _series(1, 3), _series(2, 2)
    whole = accumulate_fri(a + b).values
    parts = accumulate_fri(a).values + accumulate_fri(b).values
    np.testing.assert_allclose(whole, parts, rtol=1e-12, atol=1e-12)


def test_tie_rules():
    fin = _curve([0.0, 1.0, 2.0, 3.0])
    np.testing.assert_array_equal(tie(fin, fin).values[1:], 1.0)
    t = tie(fin, fin)
    assert np.isnan(t.values[0]) and t.flags[0] == "undefined"
    dead = tie(_curve([0.0, 0.0, 0.0, 0.0]), fin)
    np.testing.assert_array_equal(dead.values[1:], 0.0)
    with pytest.raises(ValueError):
        tie(_curve([1.0, 2.0, 3.0]), fin)


def test_relative_tie_algebra():
    a = _curve([0.0, 0.5, -2.0, 3.0, 0.005])
    b = _curve([0.0, 1.5, 4.0, -1.0, 2.0])
    ab, ba = relative_tie(a, b).values, relative_tie(b, a).values
    ok = np.isfinite(ab) & np.isfinite(ba)
    assert ok.sum() == 3
    np.testing.assert_allclose(ab[ok] * ba[ok], 1.0, rtol=1e-15)
    g = relative_tie(b.replace(values=2.5 * b.values), b).values
    np.testing.assert_allclose(g[1:], 2.5)


def test_tie_scale_invariance():
    sig = np.random.default_rng(3).standard_normal((32, 32))
    out, inp = _series(4, 2, signal=sig), _series(5, 2, signal=2 * sig)
    out_s, inp_s = _series(4, 2, signal=sig, scale=3.0), _series(5, 2, signal=2 * sig, scale=0.2)
    t = tie(accumulate_fri(out), accumulate_fri(inp)).values
    ts = tie(accumulate_fri(out_s), accumulate_fri(inp_s)).values
    np.testing.assert_allclose(ts, t, rtol=1e-9, equal_nan=True)


def test_envelope_trivial_cases():
    mono = _curve(np.linspace(5, 0, 30))
    np.testing.assert_array_equal(envelope(mono).values, mono.values)
    const = _curve(np.full(20, 2.0))
    np.testing.assert_array_equal(envelope(const).values, 2.0)
    with pytest.raises(ValueError):
        envelope(mono, 2)


def test_envelope_oscillation():
    x = np.arange(200.0)
    amp = np.exp(-x / 150)
    y = amp * np.abs(np.sin(np.pi * x / 10.3))
    env = envelope(_curve(y)).values
    assert np.all(env >= y)
    core = slice(15, 185)
    assert np.max(np.abs(env[core] / amp[core] - 1)) < 0.02


def test_series_band_report():
    rng = np.random.default_rng(8)
    white = _series(8, 2)
    assert not series_band_report(white).passed
    k = np.fft.fftfreq(32)
    low = np.exp(-(k[:, None] ** 2 + k[None, :] ** 2) / (2 * 0.06**2))
    smooth = tuple(
        tuple(np.fft.ifft2(np.fft.fft2(rng.standard_normal((32, 32))) * low).real for _ in range(2))
        for _ in range(2)
    )
    rep = series_band_report(MeasurementSeries(smooth, 1.0))
    assert rep.passed and rep.check_id == "A"
