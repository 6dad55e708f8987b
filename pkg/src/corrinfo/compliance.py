"""Sampling and apodization checks for measured volumes and their spectra.

Check labels follow the methodological inventory used in the docs:
``A`` band limit (and sampling claims), ``G`` empty Fourier corners,
``H`` real-space apodization.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .grid import RadialBins, Spectrum, Volume

DEFAULT_BAND_FRAC = 2.0 / 3.0
DEFAULT_TOL = 1e-2
DEFAULT_APOD_MARGIN = 0.1
DEFAULT_APOD_TOL = 1e-3
# shell power this far below the strongest shell is FFT round-off
ZERO_POWER_RTOL = 1e-20

ABUSE_NOTE = (
    "hard edits like this break the linear, zero-mean phase-contrast nature of the "
    "data and make the map unsuitable for information metrics"
)


@dataclass
class ComplianceReport:
    check_id: str
    name: str
    passed: bool
    measured: float
    tolerance: float
    finding: str
    applicable: bool = True
    details: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _power_without_dc(s: Spectrum) -> np.ndarray:
    p = np.abs(s.values) ** 2
    p.flat[0] = 0.0
    return p


def check_band_limit(
    s: Spectrum,
    bins: RadialBins,
    radius_frac: float = DEFAULT_BAND_FRAC,
    tol: float = DEFAULT_TOL,
) -> ComplianceReport:
    """Fraction of (non-DC) power beyond ``radius_frac`` of Nyquist, overflow included."""
    if s.dims != bins.dims:
        raise ValueError("dims mismatch between spectrum and bins")
    per_bin = bins.bincount(_power_without_dc(s))
    total = float(per_bin.sum())
    beyond = bins.freq > radius_frac * bins.nyquist * (1 + 1e-12)
    outside = float(per_bin[:-1][beyond].sum() + per_bin[-1])
    frac = outside / total if total > 0 else 0.0
    cells = float(bins.counts[beyond].sum() + bins.overflow_count) / math.prod(bins.dims)
    ok = frac <= tol
    rep = ComplianceReport(
        "A",
        "band_limit",
        ok,
        frac,
        tol,
        f"{frac:.3g} of the power lies beyond {radius_frac:.3g} Nyquist "
        f"({'within' if ok else 'exceeds'} tolerance {tol:g})",
        details={"radius_frac": radius_frac, "cell_fraction_beyond": cells},
    )
    rep.warnings.extend(spectrum_abuse_warnings(s, bins))
    return rep


def check_corner_emptiness(
    s: Spectrum, bins: RadialBins, tol: float = DEFAULT_TOL
) -> ComplianceReport:
    """Fraction of (non-DC) power outside the inscribed Nyquist disk/sphere."""
    if s.ndim < 2:
        raise ValueError("corner emptiness is only defined for 2D and 3D data")
    if s.dims != bins.dims:
        raise ValueError("dims mismatch between spectrum and bins")
    per_bin = bins.bincount(_power_without_dc(s))
    total = float(per_bin.sum())
    frac = float(per_bin[-1]) / total if total > 0 else 0.0
    geometric = bins.overflow_count / math.prod(bins.dims)
    ok = frac <= tol
    return ComplianceReport(
        "G",
        "corner_emptiness",
        ok,
        frac,
        tol,
        f"{frac:.3g} of the power sits in the Cartesian corners, which make up "
        f"{geometric:.4f} of the grid",
        details={"geometric_fraction": geometric},
    )


def _radius_from_centre(dims: tuple[int, ...]) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(n) - n // 2 for n in dims], indexing="ij")
    return np.sqrt(sum(g.astype(np.float64) ** 2 for g in grids))


def check_real_space_apodization(
    v: Volume, margin_frac: float = DEFAULT_APOD_MARGIN, tol: float = DEFAULT_APOD_TOL
) -> ComplianceReport:
    """Fraction of signal variance found near the box edges.

    The edge zone is everything outside the inscribed sphere of radius
    ``(1 - margin_frac) * min_dim / 2``.  Variance is taken about the mean of
    that zone, so a constant background offset never counts as edge signal.
    """
    r = _radius_from_centre(v.dims)
    outside = r > (1.0 - margin_frac) * min(v.dims) / 2.0
    x = np.asarray(v.data, dtype=np.float64)
    if not np.any(outside) or np.ptp(x) == 0:
        return ComplianceReport(
            "H",
            "real_space_apodization",
            True,
            0.0,
            tol,
            "inapplicable: volume has no variance" if np.ptp(x) == 0 else "inapplicable: no edge zone",
            applicable=False,
        )
    base = float(x[outside].mean())
    dev = (x - base) ** 2
    total = float(dev.sum())
    frac = float(dev[outside].sum()) / total
    ok = frac <= tol
    rep = ComplianceReport(
        "H",
        "real_space_apodization",
        ok,
        frac,
        tol,
        f"{frac:.3g} of the variance lies within {margin_frac:.3g} of the box edge",
        details={
            "margin_frac": margin_frac,
            "edge_voxel_fraction": float(outside.mean()),
        },
    )
    rep.warnings.extend(volume_abuse_warnings(v))
    return rep


@dataclass(frozen=True)
class FillingDegree:
    kappa: float
    d_over_l: float


def filling_degree(v: Volume, level: float = 0.5) -> FillingDegree:
    """Fraction of voxels whose ``|density - mean|`` exceeds ``level * max``."""
    x = np.asarray(v.data, dtype=np.float64)
    dev = np.abs(x - x.mean())
    top = float(dev.max())
    if top == 0:
        return FillingDegree(0.0, 0.0)
    kappa = float(np.mean(dev > level * top))
    return FillingDegree(kappa, kappa ** (1.0 / v.ndim))


def _exact(x: float) -> Fraction:
    return Fraction(repr(float(x)))


def minimum_claimable_resolution(step: float, band_frac: float = DEFAULT_BAND_FRAC) -> float:
    """Finest resolution supportable at ``step``: ``2 * step / band_frac``.

    Computed in decimal-exact rational arithmetic so 1.05 Å gives 3.15 Å.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    frac = Fraction(2, 3) if band_frac == DEFAULT_BAND_FRAC else _exact(band_frac)
    return float(2 * _exact(step) / frac)


def check_sampling_claim(
    step: float, claimed_resolution: float, band_frac: float = DEFAULT_BAND_FRAC
) -> ComplianceReport:
    if not (step > 0 and claimed_resolution > 0):
        raise ValueError("step and claimed resolution must be positive")
    frac = Fraction(2, 3) if band_frac == DEFAULT_BAND_FRAC else _exact(band_frac)
    minimum = 2 * _exact(step) / frac
    ok = _exact(claimed_resolution) >= minimum
    ratio = float(minimum / _exact(claimed_resolution))
    return ComplianceReport(
        "A",
        "sampling_claim",
        ok,
        min(ratio, 1.0),
        1.0,
        f"at {step:g}/voxel the finest claimable resolution is {float(minimum):g}; "
        f"claim {claimed_resolution:g} {'is supported' if ok else 'is not supported'}",
        details={"minimum_claimable": float(minimum), "claimed": claimed_resolution},
    )


def spectrum_abuse_warnings(s: Spectrum, bins: RadialBins) -> list[str]:
    """Flag a hard-zero outer annulus, the signature of sharp Fourier truncation."""
    per_bin = bins.bincount(np.abs(s.values) ** 2)
    floor = ZERO_POWER_RTOL * per_bin.max()
    shells = per_bin[:-1]
    nonzero = np.flatnonzero(shells > floor)
    if len(nonzero) == 0:
        return []
    last = int(nonzero[-1])
    # only meaningful when the cut sits well inside Nyquist and the corners are zero too
    if last < bins.n_shells - 2 and per_bin[-1] <= floor and last >= 2:
        frac = bins.freq[last] / bins.nyquist
        return [
            f"spectrum is exactly zero beyond {frac:.3f} Nyquist (sharp Fourier "
            f"truncation); {ABUSE_NOTE}"
        ]
    return []


def volume_abuse_warnings(v: Volume) -> list[str]:
    """Flag a volume with no negative densities at all (negatives clipped away)."""
    x = np.asarray(v.data)
    if x.min() >= 0 and np.count_nonzero(x == 0) > 0.1 * x.size and x.max() > 0:
        return [f"volume has no negative densities; {ABUSE_NOTE}"]
    return []


def run_checks(
    v: Volume,
    bins: RadialBins | None = None,
    band_frac: float = DEFAULT_BAND_FRAC,
    band_tol: float = DEFAULT_TOL,
    corner_tol: float = DEFAULT_TOL,
    apod_margin: float = DEFAULT_APOD_MARGIN,
    apod_tol: float = DEFAULT_APOD_TOL,
    claimed_resolution: float | None = None,
) -> list[ComplianceReport]:
    """Run every applicable check on one volume."""
    from .grid import forward_transform, radial_bins

    s = forward_transform(v)
    bins = bins or radial_bins(v.dims, v.step)
    reports = [check_band_limit(s, bins, band_frac, band_tol)]
    if v.ndim >= 2:
        reports.append(check_corner_emptiness(s, bins, corner_tol))
    reports.append(check_real_space_apodization(v, apod_margin, apod_tol))
    if claimed_resolution is not None:
        reports.append(check_sampling_claim(v.step, claimed_resolution, band_frac))
    return reports
