"""Preparing two independently determined maps for cross-comparison.

Fourier resampling to a common step, sub-voxel magnification correction,
per-shell amplitude matching, soft masking and translational alignment.
Rotational alignment is deliberately absent: inputs must already share an
orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .grid import RadialBins, Spectrum, Volume, forward_transform

MIN_RESAMPLED_EXTENT = 8
ZERO_POWER_RTOL = 1e-20


@dataclass(frozen=True)
class ResamplePlan:
    src_dims: tuple[int, ...]
    src_step: float
    dst_dims: tuple[int, ...]
    dst_step: float

    @classmethod
    def build(cls, src_dims, src_step: float, dst_step: float) -> "ResamplePlan":
        if not dst_step > 0:
            raise ValueError("dst_step must be positive")
        src_dims = tuple(int(n) for n in src_dims)
        if dst_step == src_step:
            return cls(src_dims, float(src_step), src_dims, float(dst_step))
        ratio = src_step / dst_step
        # nearest even extent keeps an unambiguous Nyquist element
        dst = tuple(2 * int(round(n * ratio / 2.0)) for n in src_dims)
        if min(dst) < MIN_RESAMPLED_EXTENT:
            raise ValueError(
                f"resampled grid {dst} would have fewer than "
                f"{MIN_RESAMPLED_EXTENT} voxels on an axis"
            )
        return cls(src_dims, float(src_step), dst, float(dst_step))

    @property
    def extent_error(self) -> tuple[float, ...]:
        """Physical extent change per axis, in destination voxels."""
        return tuple(
            abs(d * self.dst_step - s * self.src_step) / self.dst_step
            for s, d in zip(self.src_dims, self.dst_dims)
        )


def _resample_axis(f: NDArray, n_out: int, axis: int) -> NDArray:
    """Zero-pad or crop an unshifted spectrum about DC along one axis."""
    n_in = f.shape[axis]
    if n_out == n_in:
        return f
    f = np.moveaxis(f, axis, 0)
    out = np.zeros((n_out,) + f.shape[1:], dtype=np.complex128)
    if n_out > n_in:
        h = n_in // 2
        if n_in % 2:
            out[: h + 1] = f[: h + 1]
            out[n_out - h :] = f[n_in - h :]
        else:
            out[:h] = f[:h]
            if h > 1:
                out[n_out - h + 1 :] = f[n_in - h + 1 :]
            out[h] = 0.5 * f[h]
            out[n_out - h] = 0.5 * f[h]
    else:
        h = n_out // 2
        if n_out % 2:
            out[: h + 1] = f[: h + 1]
            out[n_out - h :] = f[n_in - h :]
        else:
            out[:h] = f[:h]
            if h > 1:
                out[n_out - h + 1 :] = f[n_in - h + 1 :]
            out[h] = f[h] + f[n_in - h]
    return np.moveaxis(out, 0, axis)


def fourier_resample(v: Volume, dst_step: float) -> Volume:
    """Resample ``v`` to ``dst_step`` by zero-padding or cropping its spectrum.

    The physical extent is preserved to within one destination voxel per
    axis and the mean density is unchanged.
    """
    plan = ResamplePlan.build(v.dims, v.step, dst_step)
    if plan.dst_dims == plan.src_dims:
        return Volume(v.data.copy(), plan.dst_step)
    f = np.fft.fftn(v.data)
    for axis, n_out in enumerate(plan.dst_dims):
        f = _resample_axis(f, n_out, axis)
    scale = math.prod(plan.dst_dims) / math.prod(plan.src_dims)
    return Volume(np.fft.ifftn(f).real * scale, plan.dst_step)


def trig_interp_matrix(n: int, positions: NDArray) -> NDArray[np.float64]:
    """Matrix evaluating the band-limited periodic interpolant of ``n`` samples.

    Row ``j`` gives the weights that produce the value at fractional index
    ``positions[j]``.  The Nyquist term of even ``n`` is taken as a cosine so
    that real samples give real values.
    """
    d = np.asarray(positions, dtype=np.float64)[:, None] - np.arange(n)[None, :]
    kern = np.ones_like(d)
    for k in range(1, (n - 1) // 2 + 1):
        kern += 2.0 * np.cos(2.0 * np.pi * k * d / n)
    if n % 2 == 0:
        kern += np.cos(np.pi * d)
    return kern / n


def magnification_scale(v: Volume, scale: float) -> Volume:
    """Isotropically magnify the content of ``v`` by ``scale`` about the box centre.

    Values are taken from the band-limited (Fourier) interpolant at
    ``centre + (x - centre) / scale``; the grid and step stay the same.
    """
    if not 0.9 <= scale <= 1.1:
        raise ValueError(f"scale {scale} outside the supported range [0.9, 1.1]")
    if scale == 1.0:
        return Volume(v.data.copy(), v.step)
    out = np.asarray(v.data, dtype=np.float64)
    for axis, n in enumerate(v.dims):
        c = n // 2
        pos = c + (np.arange(n) - c) / scale
        m = trig_interp_matrix(n, pos)
        out = np.moveaxis(np.tensordot(m, np.moveaxis(out, axis, 0), axes=(1, 0)), 0, axis)
    return Volume(out, v.step)


class MatchResult(NamedTuple):
    spectrum: Spectrum
    factors: NDArray[np.float64]
    zero_shells: NDArray[np.bool_]


def amplitude_match(target: Spectrum, source: Spectrum, bins: RadialBins) -> MatchResult:
    """Rescale ``source`` per shell so its shell power equals ``target``'s.

    The overflow bin is matched like any other shell.  Phases are untouched.
    Shells with zero source power (round-off level relative to the
    strongest shell) stay zero and are reported in ``zero_shells`` (the
    last entry is the overflow bin).
    """
    if target.dims != source.dims or source.dims != bins.dims:
        raise ValueError(
            f"dims mismatch: target {target.dims}, source {source.dims}, bins {bins.dims}"
        )
    pt = bins.bincount(np.abs(target.values) ** 2)
    ps = bins.bincount(np.abs(source.values) ** 2)
    # shells holding only FFT round-off count as empty
    zero = ps <= ZERO_POWER_RTOL * ps.max()
    factors = np.where(zero, 0.0, np.sqrt(pt / np.where(zero, 1.0, ps)))
    matched = source.values * factors[bins.shell_of]
    return MatchResult(Spectrum(matched, source.step), factors, zero)


def _centre_radius(dims: tuple[int, ...]) -> NDArray[np.float64]:
    grids = np.meshgrid(*[np.arange(n) - n // 2 for n in dims], indexing="ij")
    return np.sqrt(sum(g.astype(np.float64) ** 2 for g in grids))


def soft_mask_profile(
    dims: tuple[int, ...], radius_frac: float, softness_frac: float
) -> NDArray[np.float64]:
    if not 0.0 < radius_frac <= 1.0:
        raise ValueError("radius_frac must lie in (0, 1]")
    half = min(dims) / 2.0
    r = _centre_radius(tuple(dims))
    flat = radius_frac * half
    if math.isinf(softness_frac):
        return np.ones(dims)
    sigma = softness_frac * half
    if sigma <= 0:
        raise ValueError("softness_frac must be positive")
    excess = np.maximum(r - flat, 0.0)
    return np.exp(-0.5 * (excess / sigma) ** 2)


def soft_mask(v: Volume, radius_frac: float = 2.0 / 3.0, softness_frac: float = 0.08) -> Volume:
    """Multiply ``v`` by a flat-top mask with Gaussian fall-off beyond ``radius_frac``."""
    return Volume(v.data * soft_mask_profile(v.dims, radius_frac, softness_frac), v.step)


def fourier_shift(v: Volume, shift) -> Volume:
    """Circularly translate ``v`` by ``shift`` voxels (sub-voxel allowed)."""
    f = np.fft.fftn(v.data)
    phase = np.zeros(v.dims)
    for axis, (n, s) in enumerate(zip(v.dims, shift)):
        shape = [1] * v.ndim
        shape[axis] = n
        phase = phase + (np.fft.fftfreq(n) * s).reshape(shape)
    return Volume(np.fft.ifftn(f * np.exp(-2j * np.pi * phase)).real, v.step)


def _parabolic_offset(cm: float, c0: float, cp: float) -> float:
    denom = cm - 2.0 * c0 + cp
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (cm - cp) / denom, -0.5, 0.5))


def translational_align(ref: Volume, mov: Volume) -> tuple[NDArray[np.float64], Volume]:
    """Find the shift that best maps ``mov`` onto ``ref`` and apply it.

    Integer peak of the circular cross-correlation, refined per axis by a
    parabola through the peak and its two neighbours.  Returns the shift
    (voxels, per array axis) and ``mov`` translated by it.
    """
    if ref.dims != mov.dims:
        raise ValueError(f"grid mismatch: {ref.dims} vs {mov.dims}")
    if not np.any(ref.data) or not np.any(mov.data):
        raise ValueError("cannot align an all-zero volume")
    cc = np.fft.ifftn(np.fft.fftn(ref.data) * np.conj(np.fft.fftn(mov.data))).real
    peak = np.unravel_index(int(np.argmax(cc)), cc.shape)
    shift = np.zeros(ref.ndim)
    for axis, n in enumerate(ref.dims):
        p = peak[axis]
        idx = list(peak)
        idx[axis] = (p - 1) % n
        cm = cc[tuple(idx)]
        idx[axis] = (p + 1) % n
        cp = cc[tuple(idx)]
        s = p + _parabolic_offset(cm, cc[peak], cp)
        if s > n / 2:
            s -= n
        shift[axis] = s
    return shift, fourier_shift(mov, shift)
