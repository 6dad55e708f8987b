"""Local FSC and local (cross-)information density maps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .grid import Spectrum, Volume, radial_bins
from .info import (
    DEFAULT_BAND,
    InfoParams,
    band_mask,
    integrated_information,
    saturated,
    weighted_information,
)
from .metrics import Curve, fsc

GRID_STEP_RTOL = 1e-3


@dataclass(frozen=True)
class WindowSpec:
    """Cubic (or square) sub-volume with a Gaussian apodization.

    The Gaussian sigma is ``mask_sigma_frac * size / 2`` voxels.
    """

    size: int = 18
    stride: int = 6
    mask_sigma_frac: float = 0.6

    def __post_init__(self) -> None:
        if self.size < 8:
            raise ValueError("window size must be >= 8")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not 0.0 < self.mask_sigma_frac <= 1.0:
            raise ValueError("mask_sigma_frac must lie in (0, 1]")

    def mask(self, ndim: int) -> NDArray[np.float64]:
        c = self.size // 2
        sigma = self.mask_sigma_frac * self.size / 2.0
        x = np.arange(self.size) - c
        g = np.exp(-0.5 * (x / sigma) ** 2)
        m = g
        for _ in range(ndim - 1):
            m = np.multiply.outer(m, g)
        return m

    def kappa(self, ndim: int) -> float:
        """Filling degree of the window: mean of the mask over the window."""
        return float(self.mask(ndim).mean())


@dataclass(frozen=True)
class InfoMap:
    """Per-voxel integrated information; NaN marks voxels no window evaluated."""

    values: NDArray[np.float64]
    step: float
    saturated: NDArray[np.bool_]
    window: WindowSpec
    params: dict

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.values.shape)

    @property
    def evaluated(self) -> NDArray[np.bool_]:
        return np.isfinite(self.values)


def _window_slices(dims, center, size: int) -> tuple[slice, ...]:
    lo = [int(c) - size // 2 for c in center]
    if len(center) != len(dims):
        raise ValueError("center must have one coordinate per axis")
    if any(l < 0 or l + size > n for l, n in zip(lo, dims)):
        raise ValueError(f"window of {size} at {tuple(center)} exceeds grid {dims}")
    return tuple(slice(l, l + size) for l in lo)


def _masked(x: NDArray, mask: NDArray) -> NDArray:
    # remove the mask-weighted mean so the local offset does not leak into low shells
    mean = float(np.sum(x * mask) / np.sum(mask))
    return (x - mean) * mask


def local_fsc(a: Volume, b: Volume, center, w: WindowSpec) -> Curve:
    """FSC between the Gaussian-windowed sub-volumes of ``a`` and ``b`` at ``center``."""
    if a.dims != b.dims:
        raise ValueError(f"dims mismatch: {a.dims} vs {b.dims}")
    sl = _window_slices(a.dims, center, w.size)
    mask = w.mask(a.ndim)
    fa = np.fft.fftn(_masked(a.data[sl], mask))
    fb = np.fft.fftn(_masked(b.data[sl], mask))
    bins = radial_bins((w.size,) * a.ndim, a.step)
    return fsc(Spectrum(fa, a.step), Spectrum(fb, b.step), bins)


def window_centres(dims, w: WindowSpec) -> list[tuple[int, ...]]:
    per_axis = [list(range(w.size // 2, n - (w.size - w.size // 2) + 1, w.stride)) for n in dims]
    return list(itertools.product(*per_axis))


def _local_params(ndim: int, w: WindowSpec, p: InfoParams) -> InfoParams:
    if p.k_override is not None:
        return p
    return InfoParams(
        d=ndim, kappa=w.kappa(ndim), clamp_eps=p.clamp_eps, weighting=p.weighting
    )


def _density_map(
    a: Volume, b: Volume, w: WindowSpec, p: InfoParams, f_lo: float, f_hi: float
) -> InfoMap:
    if a.dims != b.dims:
        raise ValueError(f"dims mismatch: {a.dims} vs {b.dims}")
    if a.ndim not in (2, 3):
        raise ValueError("information maps need 2D or 3D volumes")
    lp = _local_params(a.ndim, w, p)
    values = np.full(a.dims, np.nan)
    sat = np.zeros(a.dims, dtype=bool)
    centres = window_centres(a.dims, w)
    if not centres:
        raise ValueError(f"window of {w.size} does not fit in grid {a.dims}")
    for centre in centres:
        curve = local_fsc(a, b, centre, w)
        info = weighted_information(curve, lp)
        gic = integrated_information(info, f_lo, f_hi)
        sel = band_mask(curve, f_lo, f_hi)
        cell = tuple(
            slice(max(c - w.stride // 2, 0), max(c - w.stride // 2, 0) + w.stride)
            for c in centre
        )
        values[cell] = gic
        sat[cell] = bool(np.any(saturated(curve.values[sel], lp.clamp_eps)))
    params = {"f_lo": f_lo, "f_hi": f_hi, **lp.as_dict(), "window": w.size, "stride": w.stride}
    return InfoMap(values, a.step, sat, w, params)


def lid_map(
    a: Volume,
    b: Volume,
    w: WindowSpec | None = None,
    p: InfoParams | None = None,
    f_lo: float = DEFAULT_BAND[0],
    f_hi: float = DEFAULT_BAND[1],
) -> InfoMap:
    """Local information density between two half-dataset reconstructions.

    Every window centre on the stride lattice writes its integrated FSI_r to
    the ``stride``-sized cell around it; cells do not overlap, so each voxel
    has at most one writer.  ``kappa`` is taken from the window mask.
    """
    w = w or WindowSpec()
    p = p or InfoParams(d=a.ndim if a.ndim in (2, 3) else 3)
    return _density_map(a, b, w, p, f_lo, f_hi)


def lcid_map(
    m1: Volume,
    m2: Volume,
    w: WindowSpec | None = None,
    p: InfoParams | None = None,
    f_lo: float = DEFAULT_BAND[0],
    f_hi: float = DEFAULT_BAND[1],
) -> InfoMap:
    """Local cross-information density between two independently determined maps.

    Both maps must already be aligned, on a common grid and amplitude-matched.
    """
    if abs(m1.step - m2.step) > GRID_STEP_RTOL * max(m1.step, m2.step):
        raise ValueError(f"grids not matched: step {m1.step} vs {m2.step}")
    if m1.dims != m2.dims:
        raise ValueError(f"grids not matched: dims {m1.dims} vs {m2.dims}")
    w = w or WindowSpec()
    p = p or InfoParams(d=m1.ndim if m1.ndim in (2, 3) else 3)
    return _density_map(m1, m2, w, p, f_lo, f_hi)
