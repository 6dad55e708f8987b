"""Transducer information efficiency from repeated image pairs.

No DQE is computed here: its SNR ratio with a DQE(0) = 1 normalisation is
replaced by the ratio of ring information curves, which is undefined (not 1)
at the information-free origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .compliance import ComplianceReport, check_band_limit
from .grid import Spectrum, Volume, forward_transform, radial_bins
from .info import InfoParams, weighted_information
from .metrics import Curve, fsc, merge_flags

DEFAULT_INFO_FLOOR = 0.01
DEFAULT_ENVELOPE_WINDOW = 5


@dataclass(frozen=True)
class MeasurementSeries:
    """Image pairs of one test sample recorded under identical conditions."""

    pairs: tuple[tuple[NDArray, NDArray], ...]
    step: float = 1.0

    def __post_init__(self) -> None:
        pairs = tuple((np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)) for a, b in self.pairs)
        if not pairs:
            raise ValueError("a series needs at least one pair")
        shape = pairs[0][0].shape
        for a, b in pairs:
            if a.shape != shape or b.shape != shape:
                raise ValueError(f"dims mismatch within series: {a.shape}/{b.shape} vs {shape}")
        if len(shape) != 2:
            raise ValueError("series images must be 2D")
        object.__setattr__(self, "pairs", pairs)

    def __add__(self, other: "MeasurementSeries") -> "MeasurementSeries":
        if other.step != self.step:
            raise ValueError("cannot concatenate series with different steps")
        return MeasurementSeries(self.pairs + other.pairs, self.step)

    def __len__(self) -> int:
        return len(self.pairs)


def accumulate_fri(series: MeasurementSeries, p: InfoParams | None = None) -> Curve:
    """Sum of the radially weighted FRI_r curves of every pair, in pair order."""
    p = p or InfoParams(d=2)
    if p.d != 2:
        raise ValueError("ring information needs d=2 parameters")
    dims = series.pairs[0][0].shape
    bins = radial_bins(dims, series.step)
    total = None
    flags = None
    for a, b in series.pairs:
        fa = forward_transform(Volume(a, series.step))
        fb = forward_transform(Volume(b, series.step))
        fri = weighted_information(fsc(fa, fb, bins), p)
        if total is None:
            total, flags = fri.values.copy(), fri.flags
        else:
            total = total + fri.values
            flags = merge_flags(flags, fri.flags)
    return Curve("fsi", total, bins.freq, bins.nyquist, flags, counts=bins.counts)


def series_band_report(series: MeasurementSeries, radius_frac: float = 2.0 / 3.0, tol: float = 1e-2) -> ComplianceReport:
    """Band-limit check on the pooled power of every image in the series.

    Detector power piling up near Nyquist shows here as a failed report.
    """
    dims = series.pairs[0][0].shape
    power = np.zeros(dims)
    for a, b in series.pairs:
        for img in (a, b):
            power += np.abs(forward_transform(Volume(img, series.step)).values) ** 2
    bins = radial_bins(dims, series.step)
    return check_band_limit(Spectrum(np.sqrt(power).astype(complex), series.step), bins, radius_frac, tol)


def _quotient(num: Curve, den: Curve, floor: float) -> Curve:
    if not num.same_axis(den):
        raise ValueError("curves are on different shell axes")
    undefined = np.abs(den.values) < floor
    values = np.full(num.n_shells, np.nan)
    ok = ~undefined
    values[ok] = num.values[ok] / den.values[ok]
    flags = tuple("undefined" if u else "" for u in undefined)
    return Curve("tie", values, num.freq, num.nyquist, flags)


def tie(fri_out: Curve, fri_in: Curve, floor: float = DEFAULT_INFO_FLOOR) -> Curve:
    """``FRI_out / FRI_in`` per shell; NaN where ``|FRI_in| < floor`` bits."""
    return _quotient(fri_out, fri_in, floor)


def relative_tie(fri_out1: Curve, fri_out2: Curve, floor: float = DEFAULT_INFO_FLOOR) -> Curve:
    """``FRI_out1 / FRI_out2``; the unknown input information cancels."""
    return _quotient(fri_out1, fri_out2, floor)


def envelope(c: Curve, window_shells: int = DEFAULT_ENVELOPE_WINDOW) -> Curve:
    """Upper envelope of an oscillating curve.

    Anchors are the shells equal to the running maximum over a centred window
    of ``window_shells`` (plus both end points).  Between consecutive anchors
    the curve itself is kept where it is monotone, otherwise the anchors are
    joined by a straight line.  The result never lies below the curve.
    """
    if window_shells < 3:
        raise ValueError("envelope window must span at least 3 shells")
    y = c.values
    n = len(y)
    half = window_shells // 2
    padded = np.pad(y, half, mode="edge")
    runmax = np.lib.stride_tricks.sliding_window_view(padded, 2 * half + 1).max(axis=1)
    anchors = np.flatnonzero(y >= runmax)
    anchors = np.union1d(anchors, [0, n - 1])
    env = y.copy()
    for i, j in zip(anchors[:-1], anchors[1:]):
        seg = np.diff(y[i : j + 1])
        if np.all(seg >= 0) or np.all(seg <= 0):
            continue
        t = (np.arange(i, j + 1) - i) / (j - i)
        env[i : j + 1] = y[i] + t * (y[j] - y[i])
    env = np.maximum(env, y)
    return Curve(c.kind, env, c.freq, c.nyquist, c.flags, counts=c.counts)
