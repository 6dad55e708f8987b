"""Volumes, discrete Fourier transforms and the radial ring/shell geometry.

Conventions used throughout the package:

* arrays are row-major with the x axis fastest, i.e. ``data[z, y, x]``;
* the forward DFT is unnormalised and the inverse carries ``1/N``, so a
  forward/inverse round trip is the identity;
* the spectrum keeps numpy's unshifted layout (DC at index 0 on every axis);
* a Fourier cell belongs to shell ``round(|k| / shell_width)`` where
  ``shell_width = 1 / (min_dim * step)``.  Cells whose shell index exceeds
  ``floor(min_dim / 2)`` (the inscribed Nyquist radius of the shortest axis)
  go to an overflow bin that never takes part in a metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

HERMITIAN_RTOL = 1e-6


@dataclass(frozen=True)
class Volume:
    """A real 1D/2D/3D sampled measurement with an isotropic sampling step."""

    data: NDArray[np.floating]
    step: float = 1.0

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.ndim not in (1, 2, 3):
            raise ValueError(f"volume must be 1D, 2D or 3D, got {data.ndim}D")
        if np.iscomplexobj(data):
            raise TypeError("volume data must be real")
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(np.float64)
        if any(n < 2 for n in data.shape):
            raise ValueError(f"every extent must be >= 2, got {data.shape}")
        if not (np.isfinite(self.step) and self.step > 0):
            raise ValueError(f"step must be a positive number, got {self.step}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "step", float(self.step))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def with_data(self, data: NDArray) -> "Volume":
        return Volume(np.asarray(data), self.step)


@dataclass(frozen=True)
class Spectrum:
    """Unshifted complex DFT of a Volume."""

    values: NDArray[np.complexfloating]
    step: float = 1.0

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.values.shape)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def step_freq(self) -> tuple[float, ...]:
        """Frequency increment per axis, ``1 / (n * step)``."""
        return tuple(1.0 / (n * self.step) for n in self.dims)


@dataclass(frozen=True)
class RadialBins:
    """Shell assignment of every Fourier cell of a grid.

    ``shell_of`` holds values ``0 .. n_shells``; the value ``n_shells`` marks
    the overflow bin (corners beyond the inscribed Nyquist radius).
    """

    dims: tuple[int, ...]
    step: float
    shell_of: NDArray[np.intp] = field(repr=False)
    counts: NDArray[np.int64]
    overflow_count: int
    shell_width: float

    @property
    def n_shells(self) -> int:
        return len(self.counts)

    @property
    def overflow(self) -> int:
        """Index used in ``shell_of`` for the overflow bin."""
        return self.n_shells

    @property
    def freq(self) -> NDArray[np.float64]:
        """Absolute frequency of each shell centre (1/Å or Hz)."""
        return np.arange(self.n_shells) * self.shell_width

    @property
    def nyquist(self) -> float:
        return 0.5 / self.step

    def bincount(self, weights: NDArray) -> NDArray[np.float64]:
        """Per-bin sums of ``weights``, overflow bin last.

        ``np.bincount`` accumulates sequentially in index order, so the result
        is run-to-run identical.
        """
        return np.bincount(
            self.shell_of.ravel(), weights=np.ravel(weights), minlength=self.n_shells + 1
        )


def _check_finite(a: NDArray) -> None:
    if not np.all(np.isfinite(a)):
        bad = np.unravel_index(np.argmin(np.isfinite(a)), a.shape)
        raise ValueError(f"non-finite value at index {tuple(int(i) for i in bad)}")


def forward_transform(v: Volume) -> Spectrum:
    """Unnormalised forward DFT of ``v``."""
    _check_finite(v.data)
    return Spectrum(np.fft.fftn(v.data), v.step)


def hermitian_partner(values: NDArray) -> NDArray:
    """Return ``values[-k]`` (indices modulo the grid) for every cell ``k``."""
    flipped = np.flip(values)
    return np.roll(flipped, shift=1, axis=tuple(range(values.ndim)))


def hermitian_defect(values: NDArray) -> tuple[float, tuple[int, ...]]:
    """Worst relative violation of ``F(k) == conj(F(-k))`` and where it occurs."""
    diff = np.abs(values - np.conj(hermitian_partner(values)))
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    idx = np.unravel_index(int(np.argmax(diff)), values.shape)
    worst = float(diff[idx])
    rel = worst / scale if scale > 0 else 0.0
    return rel, tuple(int(i) for i in idx)


def inverse_transform(s: Spectrum, rtol: float = HERMITIAN_RTOL) -> Volume:
    """Inverse DFT (with ``1/N``) of a Hermitian spectrum, returning a real Volume."""
    _check_finite(s.values)
    rel, idx = hermitian_defect(s.values)
    if rel > rtol:
        raise ValueError(
            f"spectrum is not Hermitian: relative defect {rel:.3g} at cell {idx}"
        )
    return Volume(np.fft.ifftn(s.values).real, s.step)


@lru_cache(maxsize=64)
def _radial_bins_cached(dims: tuple[int, ...], step: float) -> RadialBins:
    min_dim = min(dims)
    width = 1.0 / (min_dim * step)
    axes = [np.fft.fftfreq(n, d=step) for n in dims]
    r2 = np.zeros(dims)
    for ax, f in enumerate(axes):
        shape = [1] * len(dims)
        shape[ax] = dims[ax]
        r2 = r2 + (f**2).reshape(shape)
    # round half up; only DC itself may land in shell 0 (long axes of
    # anisotropic grids have steps finer than half a shell width)
    shell = np.floor(np.sqrt(r2) / width + 0.5).astype(np.intp)
    shell[(shell == 0) & (r2 > 0)] = 1
    n_shells = min_dim // 2 + 1
    shell[shell >= n_shells] = n_shells
    shell.setflags(write=False)
    tally = np.bincount(shell.ravel(), minlength=n_shells + 1)
    counts = tally[:n_shells].astype(np.int64)
    counts.setflags(write=False)
    return RadialBins(
        dims=dims,
        step=step,
        shell_of=shell,
        counts=counts,
        overflow_count=int(tally[n_shells]),
        shell_width=width,
    )


def radial_bins(dims: tuple[int, ...] | list[int], step: float = 1.0) -> RadialBins:
    """Assign every Fourier cell of a ``dims`` grid to its ring/shell."""
    dims = tuple(int(n) for n in dims)
    if not dims or any(n < 2 for n in dims) or len(dims) > 3:
        raise ValueError(f"invalid grid dims {dims}")
    if not step > 0:
        raise ValueError("step must be positive")
    return _radial_bins_cached(dims, float(step))


def shell_power(s: Spectrum, bins: RadialBins) -> "Curve":
    """Per-shell sum of ``|F|^2``."""
    from .metrics import Curve

    if s.dims != bins.dims:
        raise ValueError(f"dims mismatch: spectrum {s.dims} vs bins {bins.dims}")
    power = bins.bincount(np.abs(s.values) ** 2)
    return Curve(
        kind="power",
        values=power[: bins.n_shells],
        freq=bins.freq,
        nyquist=bins.nyquist,
        counts=bins.counts,
        overflow=float(power[-1]),
    )
