import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrinfo.compliance import (
    check_band_limit,
    check_corner_emptiness,
    check_real_space_apodization,
    check_sampling_claim,
    filling_degree,
    minimum_claimable_resolution,
    run_checks,
)
from corrinfo.grid import Spectrum, Volume, forward_transform, radial_bins
from corrinfo.modelx import generate_phantom


def _freq_radius(dims):
    return np.sqrt(sum(np.meshgrid(*[np.fft.fftfreq(n) ** 2 for n in dims], indexing="ij")))


def _centre_radius(dims):
    return np.sqrt(sum(g.astype(float) ** 2 for g in np.meshgrid(*[np.arange(n) - n // 2 for n in dims], indexing="ij")))


def test_band_limit_truncated_passes(rng):
    dims = (32, 32, 32)
    b = radial_bins(dims, 1.0)
    f = forward_transform(Volume(rng.standard_normal(dims))).values
    f[b.shell_of * b.shell_width > (2 / 3) * 0.5] = 0
    r = check_band_limit(Spectrum(f, 1.0), b)
    assert r.passed and r.measured == 0.0
    assert r.check_id == "A"
    assert any("truncation" in w for w in r.warnings)


def test_band_limit_white_noise_counting_oracle(rng):
    dims = (64, 64, 64)
    b = radial_bins(dims, 1.0)
    r = check_band_limit(forward_transform(Volume(rng.standard_normal(dims))), b)
    cells = r.details["cell_fraction_beyond"]
    assert abs(r.measured - cells) <= 0.1 * cells
    assert not r.passed
    assert not r.warnings


def test_band_limit_gaussian_filtered_passes(rng):
    dims = (64, 64, 64)
    b = radial_bins(dims, 1.0)
    f_cut = (2 / 3) * 0.5
    s = f_cut / math.sqrt(math.log(1e3))  # power falls to 1e-3 at the cut
    filt = np.exp(-0.5 * (_freq_radius(dims) / s) ** 2)
    f = forward_transform(Volume(rng.standard_normal(dims))).values * filt
    r = check_band_limit(Spectrum(f, 1.0), b, tol=1e-2)
    assert r.passed, r.measured


@pytest.mark.parametrize("dims,expect", [((256, 256), 1 - math.pi / 4), ((128, 128, 128), 1 - math.pi / 6)])
def test_corner_geometric_fraction(dims, expect):
    b = radial_bins(dims, 1.0)
    s = Spectrum(np.zeros(dims, dtype=complex), 1.0)
    r = check_corner_emptiness(s, b)
    assert abs(r.details["geometric_fraction"] - expect) <= 0.02
    assert r.passed and r.measured == 0.0


def test_corner_power_inside_sphere_passes(rng):
    dims = (32, 32, 32)
    b = radial_bins(dims, 1.0)
    f = forward_transform(Volume(rng.standard_normal(dims))).values
    f[b.shell_of == b.n_shells] = 0
    r = check_corner_emptiness(Spectrum(f, 1.0), b)
    assert r.passed and r.measured == 0.0
    noisy = check_corner_emptiness(forward_transform(Volume(rng.standard_normal(dims))), b)
    assert not noisy.passed
    assert abs(noisy.measured - noisy.details["geometric_fraction"]) < 0.05


def test_corner_rejects_1d():
    b = radial_bins((32,), 1.0)
    with pytest.raises(ValueError):
        check_corner_emptiness(forward_transform(Volume(np.ones(32))), b)


def test_apodization_soft_sphere_passes():
    dims = (64, 64, 64)
    r = _centre_radius(dims)
    sphere = 0.5 * (1 - np.tanh((r - 64 / 3) / 1.5))
    rep = check_real_space_apodization(Volume(sphere), 0.1, 1e-3)
    assert rep.passed, rep.measured


def test_apodization_white_noise_fails(rng):
    rep = check_real_space_apodization(Volume(rng.standard_normal((48, 48, 48))), 0.1, 1e-3)
    assert not rep.passed
    assert abs(rep.measured - rep.details["edge_voxel_fraction"]) < 0.05


def test_apodization_zero_margin_and_constant():
    x = np.zeros((32, 32))
    x[12:20, 12:20] = 1.0
    rep = check_real_space_apodization(Volume(x))
    assert rep.passed and rep.measured == 0.0
    const = check_real_space_apodization(Volume(np.full((16, 16), 3.0)))
    assert not const.applicable


def test_apodization_ignores_offset():
    dims = (48, 48, 48)
    r = _centre_radius(dims)
    sphere = 0.5 * (1 - np.tanh((r - 16) / 1.5))
    a = check_real_space_apodization(Volume(sphere)).measured
    b = check_real_space_apodization(Volume(sphere + 5.0)).measured
    assert a == pytest.approx(b, abs=1e-12)


def test_filling_degree_sphere_analog():
    n = 128
    # voxel centres at half-integers give an unbiased volume count
    g = np.meshgrid(*[np.arange(n) - n / 2 + 0.5] * 3, indexing="ij")
    r = np.sqrt(sum(x**2 for x in g))
    sphere = (r <= 0.333 * n).astype(float)
    fd = filling_degree(Volume(sphere))
    assert fd.kappa == pytest.approx(4 / 3 * math.pi * 333**3 / 1e9, abs=0.002)
    assert fd.kappa == pytest.approx(0.1547, abs=0.002)
    assert fd.d_over_l == pytest.approx(fd.kappa ** (1 / 3))


def test_filling_degree_full_and_empty():
    x = np.where(np.indices((8, 8)).sum(axis=0) % 2, 1.0, -1.0)
    assert filling_degree(Volume(x)).kappa == 1.0
    assert filling_degree(Volume(np.zeros((8, 8)))).kappa == 0.0


def test_sampling_claim_examples():
    assert minimum_claimable_resolution(1.05) == 3.15
    assert check_sampling_claim(0.84, 3.7).passed
    fail = check_sampling_claim(1.0, 2.9)
    assert not fail.passed
    assert fail.details["minimum_claimable"] == 3.0
    assert check_sampling_claim(1.05, 3.15).passed
    assert 0 <= fail.measured <= 1


@given(st.floats(0.3, 3.0), st.floats(0.5, 10.0), st.sampled_from([2, 3, 5, 10]))
def test_sampling_claim_scale_invariant(step, claim, k):
    assert check_sampling_claim(step, claim).passed == check_sampling_claim(step * k, claim * k).passed


def test_reports_json_and_reproducible():
    p = generate_phantom((32, 32, 32), seed=1)
    a = [r.to_json() for r in run_checks(p, claimed_resolution=3.5)]
    b = [r.to_json() for r in run_checks(p, claimed_resolution=3.5)]
    assert a == b
    doc = json.loads(a[0])
    assert {"check_id", "passed", "measured", "tolerance", "finding"} <= set(doc)
    assert [json.loads(x)["check_id"] for x in a] == ["A", "G", "H", "A"]


def test_clipped_volume_warning():
    x = np.zeros((32, 32, 32))
    x[10:20, 10:20, 10:20] = 1.0
    rep = check_real_space_apodization(Volume(x))
    assert any("negative" in w for w in rep.warnings)
