"""Correlation-to-information metrics: FSI/FRI, radial weighting and GIC."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .metrics import Curve, merge_flags

DEFAULT_CLAMP_EPS = 1e-7
DEFAULT_BAND = (0.2, 0.6)

GIC_CAVEAT = (
    "radial weights use shell-index units; information totals are comparable "
    "only between runs with identical grid geometry"
)


@dataclass(frozen=True)
class InfoParams:
    """Parameters of the radially weighted information metrics.

    ``kappa`` is the real-space filling degree.  When omitted it is derived
    from ``d_over_l`` as ``(D/L)**d``.  ``weighting="counts"`` replaces the
    ``r**(d-1)`` proportionality by the actual shell cell counts divided by
    the unit-sphere surface (4π in 3D, 2π in 2D), which has the same scale.
    """

    d: int = 3
    kappa: float | None = None
    d_over_l: float = 1.0
    clamp_eps: float = DEFAULT_CLAMP_EPS
    k_override: float | None = None
    weighting: str = "radial"

    def __post_init__(self) -> None:
        if self.d not in (2, 3):
            raise ValueError(f"dimensionality must be 2 or 3, got {self.d}")
        if not 0.0 < self.clamp_eps < 1e-3:
            raise ValueError("clamp_eps must lie in (0, 1e-3)")
        if not 0.0 < self.d_over_l <= 1.0:
            raise ValueError("D/L must lie in (0, 1]")
        if self.kappa is not None and not 0.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must lie in [0, 1]")
        if self.weighting not in ("radial", "counts"):
            raise ValueError("weighting must be 'radial' or 'counts'")

    @property
    def kappa_value(self) -> float:
        if self.kappa is not None:
            return float(self.kappa)
        return float(self.d_over_l) ** self.d

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "kappa": self.kappa_value,
            "d_over_l": self.d_over_l,
            "clamp_eps": self.clamp_eps,
            "k_override": self.k_override,
            "weighting": self.weighting,
        }


def fisher_bits(c: NDArray | float, eps: float = DEFAULT_CLAMP_EPS) -> NDArray:
    """``log2((1 + c) / (1 - c))`` with ``|c|`` clamped to ``1 - eps``.

    Evaluated on ``|c|`` and signed afterwards so that the result is exactly
    antisymmetric.
    """
    c = np.asarray(c, dtype=np.float64)
    a = np.minimum(np.abs(c), 1.0 - eps)
    mag = (np.log1p(a) - np.log1p(-a)) / math.log(2.0)
    return np.copysign(mag, c)


def saturated(c: NDArray, eps: float = DEFAULT_CLAMP_EPS) -> NDArray[np.bool_]:
    return np.abs(np.asarray(c)) >= 1.0 - eps


def _info_flags(c: NDArray, eps: float, base: tuple[str, ...]) -> tuple[str, ...]:
    sat = tuple("saturated" if s else "" for s in saturated(c, eps))
    return merge_flags(base, sat)


def fisher_information(
    corr: Curve, k: float = 1.0, eps: float = DEFAULT_CLAMP_EPS
) -> Curve:
    """Unweighted FSI/FRI: ``K * log2((1 + c) / (1 - c))`` per shell."""
    values = k * fisher_bits(corr.values, eps)
    flags = _info_flags(corr.values, eps, corr.flags)
    return Curve("fsi", values, corr.freq, corr.nyquist, flags, counts=corr.counts)


def radial_weight(
    p: InfoParams, r: NDArray | float, counts: NDArray | None = None
) -> NDArray:
    """Shell weight ``K_r``: ``kappa * r**2`` in 3D, ``kappa * r`` in 2D."""
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("shell radius must be non-negative")
    if p.k_override is not None:
        return np.where(r == 0, 0.0, float(p.k_override))
    kappa = p.kappa_value
    if p.weighting == "counts":
        if counts is None:
            raise ValueError("count weighting needs per-shell counts")
        surface = 4.0 * math.pi if p.d == 3 else 2.0 * math.pi
        w = kappa * np.asarray(counts, dtype=np.float64) / surface
        return np.where(r == 0, 0.0, w)
    return kappa * r ** (p.d - 1)


def weighted_information(corr: Curve, p: InfoParams) -> Curve:
    """Radially weighted FSI_r / FRI_r; the DC shell is always 0."""
    r = np.arange(corr.n_shells, dtype=np.float64)
    weights = radial_weight(p, r, corr.counts)
    values = weights * fisher_bits(corr.values, p.clamp_eps)
    values[0] = 0.0
    flags = _info_flags(corr.values, p.clamp_eps, corr.flags)
    return Curve("fsi", values, corr.freq, corr.nyquist, flags, counts=corr.counts)


def band_mask(curve: Curve, f_lo: float = 0.2, f_hi: float = 0.6) -> NDArray[np.bool_]:
    """Shells whose centre frequency lies in ``[f_lo, f_hi]`` (fractions of Nyquist)."""
    if not 0.0 <= f_lo < f_hi <= 1.0:
        raise ValueError(f"need 0 <= f_lo < f_hi <= 1, got {f_lo}, {f_hi}")
    frac = curve.freq_frac
    tol = 1e-9
    return (frac >= f_lo - tol) & (frac <= f_hi + tol)


def integrated_information(
    fsi_r: Curve, f_lo: float = DEFAULT_BAND[0], f_hi: float = DEFAULT_BAND[1]
) -> float:
    """Global information content: sum of FSI_r over the band, in bits."""
    sel = band_mask(fsi_r, f_lo, f_hi)
    if not np.any(sel):
        raise ValueError(f"no shell centre falls in [{f_lo}, {f_hi}] of Nyquist")
    return float(np.sum(fsi_r.values[sel]))
