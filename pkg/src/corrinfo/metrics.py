"""Fourier shell/ring correlation, the half-bit threshold and resolution crossings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from .grid import RadialBins, Spectrum

CURVE_KINDS = ("fsc", "fsi", "threshold", "power", "tie", "other")

# Closed form of the half-bit curve:
#   T = (A + (1 + C)/sqrt(n)) / (1 + A + C/sqrt(n)),  A = 0.2071, C = 0.9102
HALF_BIT_A = 0.2071
HALF_BIT_C = 0.9102

# Fixed-value overlays, for comparison plots only.
FIXED_THRESHOLDS = {"0.5 (fixed, not endorsed)": 0.5, "0.143 (fixed, not endorsed)": 0.143}


@dataclass(frozen=True)
class Curve:
    """One real value per shell on an absolute frequency axis.

    ``flags`` carries a short per-shell annotation (``""`` when clean), e.g.
    ``"empty"`` for a zero-denominator shell or ``"saturated"`` for a clamped
    correlation.
    """

    kind: str
    values: NDArray[np.float64]
    freq: NDArray[np.float64]
    nyquist: float
    flags: tuple[str, ...] = ()
    counts: NDArray[np.int64] | None = field(default=None, repr=False)
    overflow: float | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        freq = np.asarray(self.freq, dtype=np.float64)
        if values.ndim != 1 or values.shape != freq.shape:
            raise ValueError("values and freq must be 1D arrays of equal length")
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        flags = tuple(self.flags) if self.flags else ("",) * len(values)
        if len(flags) != len(values):
            raise ValueError("one flag entry per shell required")
        if self.kind == "fsc":
            finite = values[np.isfinite(values)]
            if np.any(np.abs(finite) > 1.0):
                raise ValueError("fsc values must lie in [-1, 1]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "flags", flags)

    @property
    def n_shells(self) -> int:
        return len(self.values)

    @property
    def freq_frac(self) -> NDArray[np.float64]:
        """Frequency as a fraction of Nyquist."""
        return self.freq / self.nyquist

    def same_axis(self, other: "Curve") -> bool:
        return self.n_shells == other.n_shells and np.allclose(
            self.freq, other.freq, rtol=1e-9, atol=0.0
        )

    def replace(self, **changes) -> "Curve":
        return replace(self, **changes)


def merge_flags(*flag_sets: tuple[str, ...]) -> tuple[str, ...]:
    out = []
    for parts in zip(*flag_sets):
        seen = []
        for p in parts:
            for tok in p.split("|") if p else ():
                if tok not in seen:
                    seen.append(tok)
        out.append("|".join(seen))
    return tuple(out)


def shell_correlation_sums(
    a: Spectrum, b: Spectrum, bins: RadialBins
) -> tuple[NDArray, NDArray, NDArray]:
    """Per-shell ``Re sum F1 F2*``, ``sum |F1|^2`` and ``sum |F2|^2`` (overflow dropped)."""
    if a.dims != b.dims:
        raise ValueError(f"dims mismatch: {a.dims} vs {b.dims}")
    if a.dims != bins.dims:
        raise ValueError(f"dims mismatch: spectra {a.dims} vs bins {bins.dims}")
    n = bins.n_shells
    cross = bins.bincount((a.values * np.conj(b.values)).real)[:n]
    p1 = bins.bincount(np.abs(a.values) ** 2)[:n]
    p2 = bins.bincount(np.abs(b.values) ** 2)[:n]
    return cross, p1, p2


def fsc(a: Spectrum, b: Spectrum, bins: RadialBins) -> Curve:
    """Fourier shell (or ring) correlation between two spectra.

    Shells where either power sum is zero get the value 0 and the flag
    ``"empty"``.
    """
    if bins.n_shells == 0 or int(np.sum(bins.counts)) == 0:
        raise ValueError("no shells to evaluate")
    cross, p1, p2 = shell_correlation_sums(a, b, bins)
    denom = np.sqrt(p1 * p2)
    empty = denom == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(empty, 0.0, cross / np.where(empty, 1.0, denom))
    values = np.clip(values, -1.0, 1.0)
    flags = tuple("empty" if e else "" for e in empty)
    return Curve("fsc", values, bins.freq, bins.nyquist, flags, counts=bins.counts)


@dataclass(frozen=True)
class ThresholdParams:
    """Inputs to the effective-voxel count of the half-bit threshold.

    ``n_eff(r) = max(1, N(r) * fill_linear**n_eff_exponent / symmetry_order)``.
    ``n_eff_exponent=None`` means ``ndim - 1`` (2 for shells, 1 for rings).
    """

    symmetry_order: int = 1
    fill_linear: float = 1.0
    n_eff_exponent: float | None = None

    def __post_init__(self) -> None:
        if int(self.symmetry_order) != self.symmetry_order or self.symmetry_order < 1:
            raise ValueError("symmetry_order must be an integer >= 1")
        if not 0.0 < self.fill_linear <= 1.0:
            raise ValueError("fill_linear (D/L) must be in (0, 1]")


def half_bit_value(n_eff: NDArray | float) -> NDArray | float:
    """Half-bit threshold as a function of the effective number of voxels."""
    root = np.sqrt(np.maximum(n_eff, 1.0))
    # Rearranged from the closed form so that n_eff == 1 gives exactly 1.0.
    return 1.0 - (1.0 - 1.0 / root) / (1.0 + HALF_BIT_A + HALF_BIT_C / root)


HALF_BIT_ASYMPTOTE = HALF_BIT_A / (1.0 + HALF_BIT_A)


def effective_voxels(bins: RadialBins, p: ThresholdParams) -> NDArray[np.float64]:
    exponent = p.n_eff_exponent
    if exponent is None:
        exponent = max(len(bins.dims) - 1, 1)
    n = bins.counts * p.fill_linear**exponent / p.symmetry_order
    return np.maximum(1.0, n)


def half_bit_threshold(bins: RadialBins, p: ThresholdParams | None = None) -> Curve:
    p = p or ThresholdParams()
    values = half_bit_value(effective_voxels(bins, p))
    return Curve("threshold", values, bins.freq, bins.nyquist, counts=bins.counts)


def fixed_threshold(bins: RadialBins, level: float) -> Curve:
    """Constant comparison overlay (0.5, 0.143, ...).  Not a recommended criterion."""
    values = np.full(bins.n_shells, float(level))
    return Curve("threshold", values, bins.freq, bins.nyquist, ("fixed",) * bins.n_shells)


@dataclass(frozen=True)
class Crossing:
    frequency: float
    resolution: float
    shell_interval: tuple[int, int]
    crossed: bool

    def as_dict(self) -> dict:
        return {
            "frequency": self.frequency,
            "resolution": self.resolution,
            "shell_interval": list(self.shell_interval),
            "crossed": self.crossed,
            "flag": "" if self.crossed else "no-crossing",
        }


def resolution_crossing(curve: Curve, thr: Curve) -> Crossing:
    """First frequency where ``curve`` drops below ``thr`` for two consecutive shells.

    The DC shell is never a crossing candidate.  The reported frequency is
    linearly interpolated between the last shell at/above the threshold and
    the first shell below it.  A crossing on the final shell counts since
    there is no further shell to confirm it.
    """
    if curve.n_shells != thr.n_shells:
        raise ValueError(
            f"curves have different lengths: {curve.n_shells} vs {thr.n_shells}"
        )
    n = curve.n_shells
    d = curve.values - thr.values
    freq = curve.freq
    for k in range(1, n):
        if d[k] < 0 and (k == n - 1 or d[k + 1] < 0):
            lo, hi = d[k - 1], d[k]
            frac = lo / (lo - hi) if lo > 0 else 0.0
            f = freq[k - 1] + frac * (freq[k] - freq[k - 1])
            res = 1.0 / f if f > 0 else math.inf
            return Crossing(float(f), float(res), (k - 1, k), True)
    f = curve.nyquist
    return Crossing(float(f), 1.0 / f, (n - 1, n - 1), False)
