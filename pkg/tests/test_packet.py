import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from corrinfo.info import fisher_bits
from corrinfo.packet import (
    DegenerateInputWarning,
    Packet,
    SaturationWarning,
    average_packets,
    ccc_fourier,
    ccc_real,
    channel_throughput,
    estimate_bandwidth,
    estimate_support,
    fourier_cross_imag,
    pic_fourier,
    pic_real,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_packet_validation():
    with pytest.raises(ValueError):
        Packet(np.zeros(7))
    with pytest.raises(ValueError):
        Packet(np.zeros(8), 0.0)
    with pytest.raises(ValueError):
        ccc_real(Packet(np.ones(8)), Packet(np.ones(9)))


def test_ccc_basic(rng):
    x = Packet(rng.standard_normal(64))
    assert ccc_real(x, x) == pytest.approx(1.0)
    assert ccc_real(x, Packet(-x.samples)) == pytest.approx(-1.0)
    assert ccc_fourier(x, x) == pytest.approx(1.0)


def test_ccc_noise_statistics():
    n = 1024
    vals = []
    for s in range(1000):
        r = np.random.default_rng(s)
        vals.append(ccc_real(Packet(r.standard_normal(n)), Packet(r.standard_normal(n))))
    vals = np.array(vals)
    assert abs(vals.mean()) < 3 / math.sqrt(n) / math.sqrt(1000) * 1.5
    assert vals.std() == pytest.approx(1 / math.sqrt(n), rel=0.1)


@given(arrays(np.float64, 16, elements=finite), arrays(np.float64, 16, elements=finite))
def test_parseval_and_symmetry(a, b):
    if not (np.any(a) and np.any(b)):
        return
    x1, x2 = Packet(a), Packet(b)
    assert abs(ccc_fourier(x1, x2) - ccc_real(x1, x2)) < 1e-9
    assert fourier_cross_imag(x1, x2) < 1e-9
    assert ccc_real(x1, x2) == ccc_real(x2, x1)
    assert ccc_real(Packet(3.0 * a), x2) == pytest.approx(ccc_real(x1, x2), abs=1e-12)


def test_zero_packet_flagged():
    with pytest.warns(DegenerateInputWarning):
        assert ccc_real(Packet(np.zeros(8)), Packet(np.ones(8))) == 0.0
    with pytest.warns(DegenerateInputWarning):
        assert ccc_fourier(Packet(np.zeros(8)), Packet(np.ones(8))) == 0.0


def test_centered_variant():
    x = Packet(np.arange(16.0) + 100)
    y = Packet(-np.arange(16.0) + 100)
    assert ccc_real(x, y) > 0.9
    assert ccc_real(x, y, centered=True) == pytest.approx(-1.0)
    assert ccc_fourier(x, y, centered=True) == pytest.approx(-1.0)


def _pair_with_corr(c, n=256, seed=0):
    r = np.random.default_rng(seed)
    a = r.standard_normal(n)
    b = r.standard_normal(n)
    b -= a * (a @ b) / (a @ a)
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    return Packet(a), Packet(c * a + math.sqrt(1 - c * c) * b)


def test_pic_values():
    x1, x2 = _pair_with_corr(0.99)
    assert pic_real(x1, x2, bandwidth=1.0) == pytest.approx(7.6366, abs=1e-3)
    z1, z2 = _pair_with_corr(0.0)
    assert pic_real(z1, z2, bandwidth=2.0) == pytest.approx(0.0, abs=1e-12)
    assert pic_fourier(z1, z2, length=2.0) == pytest.approx(0.0, abs=1e-12)
    n1, n2 = _pair_with_corr(-0.99)
    assert pic_real(n1, n2, bandwidth=1.0) == pytest.approx(-pic_real(x1, x2, bandwidth=1.0), abs=1e-9)


def test_pic_identical_saturates():
    x = Packet(np.random.default_rng(2).standard_normal(64))
    with pytest.warns(SaturationWarning):
        v = pic_fourier(x, x, length=3.0)
    assert v == pytest.approx(3.0 * fisher_bits(1.0))


def test_pic_dual_route_equal(rng):
    for _ in range(50):
        x1 = Packet(rng.standard_normal(128))
        x2 = Packet(x1.samples + rng.standard_normal(128))
        assert abs(pic_real(x1, x2, bandwidth=4.0) - pic_fourier(x1, x2, length=4.0)) < 1e-9


def test_pic_defaults_from_estimators(rng):
    x1 = Packet(rng.standard_normal(128))
    x2 = Packet(x1.samples + rng.standard_normal(128))
    b = estimate_bandwidth(average_packets([x1, x2]))
    assert pic_real(x1, x2) == pytest.approx(pic_real(x1, x2, bandwidth=b))
    length = estimate_support(average_packets([x1, x2]))
    assert pic_fourier(x1, x2) == pytest.approx(pic_fourier(x1, x2, length=length))
    with pytest.raises(ValueError):
        pic_real(x1, x2, bandwidth=0.0)


def test_average_packets():
    p = Packet(np.arange(8.0))
    assert average_packets([p]) is p
    with pytest.raises(ValueError):
        average_packets([p, Packet(np.arange(9.0))])
    with pytest.raises(ValueError):
        average_packets([])


def test_average_noise_shrinks_sqrt_m():
    ratios = []
    wins = 0
    t = np.arange(256)
    clean = np.sin(2 * np.pi * t / 32)
    for s in range(100):
        r = np.random.default_rng(s)
        copies = [Packet(clean + r.standard_normal(256)) for _ in range(16)]
        avg = average_packets(copies)
        ratios.append(np.std(copies[0].samples - clean) / np.std(avg.samples - clean))
        wins += ccc_real(avg, Packet(clean)) > ccc_real(copies[0], Packet(clean))
    assert np.mean(ratios) == pytest.approx(4.0, rel=0.1)
    assert wins >= 99


def test_bandwidth_estimates():
    n, step = 512, 0.5
    t = np.arange(n) * step
    f0 = 37 / (n * step)
    b = estimate_bandwidth(Packet(np.cos(2 * np.pi * f0 * t), step))
    assert abs(b - f0) <= 1 / (n * step)
    noise = np.random.default_rng(4).standard_normal(4096)
    bw = estimate_bandwidth(Packet(noise))
    assert bw == pytest.approx(0.99 * 0.5, rel=0.02)
    with pytest.warns(DegenerateInputWarning):
        assert estimate_bandwidth(Packet(np.full(16, 2.0))) == 0.0
    with pytest.raises(ValueError):
        estimate_bandwidth(Packet(np.zeros(16)))


def test_support_estimate():
    x = np.zeros(100)
    x[40:60] = np.random.default_rng(5).standard_normal(20)
    x[40:60] -= x[40:60].mean()
    assert 15 <= estimate_support(Packet(x)) <= 20
    with pytest.raises(ValueError):
        estimate_support(Packet(np.ones(16)))


def test_channel_throughput():
    assert channel_throughput(7.64, 0) == 0
    assert channel_throughput(7.64, 100) == pytest.approx(764.0)
    assert channel_throughput(-3.0, 10) == -30.0
    with pytest.raises(ValueError):
        channel_throughput(1.0, -1)
