"""Packet information content of finite 1D measurements.

Correlations follow the uncentred sums by default; ``centered=True`` gives
the mean-subtracted Pearson variant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .info import DEFAULT_CLAMP_EPS, fisher_bits, saturated


class DegenerateInputWarning(UserWarning):
    """A correlation or estimate fell back to a convention value (e.g. 0)."""


class SaturationWarning(UserWarning):
    """A correlation was clamped at ``1 - eps`` before the information transform."""


@dataclass(frozen=True)
class Packet:
    samples: NDArray[np.float64]
    sample_step: float = 1.0
    support_L: float | None = None
    bandwidth_B: float | None = None

    def __post_init__(self) -> None:
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1 or len(x) < 8:
            raise ValueError("a packet is a 1D vector of at least 8 samples")
        if not self.sample_step > 0:
            raise ValueError("sample_step must be positive")
        object.__setattr__(self, "samples", x)

    def __len__(self) -> int:
        return len(self.samples)


def _pair(x1: Packet, x2: Packet, centered: bool) -> tuple[NDArray, NDArray]:
    if len(x1) != len(x2):
        raise ValueError(f"packet lengths differ: {len(x1)} vs {len(x2)}")
    a, b = x1.samples, x2.samples
    if centered:
        a, b = a - a.mean(), b - b.mean()
    # the coefficient is scale free; unit peak keeps the energy products finite
    return _unit_peak(a), _unit_peak(b)


def _unit_peak(x: NDArray) -> NDArray:
    top = np.max(np.abs(x))
    return x / top if top > 0 else x


def _normalise(num: float, p1: float, p2: float) -> float:
    denom = np.sqrt(p1 * p2)
    if denom == 0:
        warnings.warn("zero-energy packet; correlation set to 0", DegenerateInputWarning, stacklevel=3)
        return 0.0
    return float(np.clip(num / denom, -1.0, 1.0))


def ccc_real(x1: Packet, x2: Packet, centered: bool = False) -> float:
    """Real-space cross-correlation coefficient ``sum x1 x2 / sqrt(sum x1^2 sum x2^2)``."""
    a, b = _pair(x1, x2, centered)
    return _normalise(float(np.dot(a, b)), float(np.dot(a, a)), float(np.dot(b, b)))


def ccc_fourier(x1: Packet, x2: Packet, centered: bool = False) -> float:
    """The same coefficient computed from the full DFTs of both packets."""
    a, b = _pair(x1, x2, centered)
    fa, fb = np.fft.fft(a), np.fft.fft(b)
    num = np.sum(fa * np.conj(fb))
    return _normalise(float(num.real), float(np.sum(np.abs(fa) ** 2)), float(np.sum(np.abs(fb) ** 2)))


def fourier_cross_imag(x1: Packet, x2: Packet) -> float:
    """Relative size of the imaginary part of the Fourier-space cross sum."""
    fa, fb = np.fft.fft(x1.samples), np.fft.fft(x2.samples)
    num = np.sum(fa * np.conj(fb))
    scale = np.sqrt(np.sum(np.abs(fa) ** 2) * np.sum(np.abs(fb) ** 2))
    return float(abs(num.imag) / scale) if scale else 0.0


def _pic(c: float, scale: float, eps: float) -> float:
    if saturated(c, eps):
        warnings.warn("correlation clamped at the ceiling", SaturationWarning, stacklevel=3)
    return float(scale * fisher_bits(c, eps))


def pic_real(
    x1: Packet,
    x2: Packet,
    bandwidth: float | None = None,
    centered: bool = False,
    eps: float = DEFAULT_CLAMP_EPS,
) -> float:
    """Real-space packet information content ``B * log2((1 + c) / (1 - c))``."""
    if bandwidth is None:
        bandwidth = x1.bandwidth_B
    if bandwidth is None:
        bandwidth = estimate_bandwidth(average_packets([x1, x2]))
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    return _pic(ccc_real(x1, x2, centered), bandwidth, eps)


def pic_fourier(
    x1: Packet,
    x2: Packet,
    length: float | None = None,
    centered: bool = False,
    eps: float = DEFAULT_CLAMP_EPS,
) -> float:
    """Fourier-space packet information content ``L * log2((1 + c) / (1 - c))``."""
    if length is None:
        length = x1.support_L
    if length is None:
        length = estimate_support(average_packets([x1, x2]))
    if not length > 0:
        raise ValueError("support length must be positive")
    return _pic(ccc_fourier(x1, x2, centered), length, eps)


def average_packets(ps: list[Packet]) -> Packet:
    """Element-wise mean of repeated measurements."""
    if not ps:
        raise ValueError("nothing to average")
    n, step = len(ps[0]), ps[0].sample_step
    if any(len(p) != n for p in ps):
        raise ValueError("packets have mixed lengths")
    if any(p.sample_step != step for p in ps):
        raise ValueError("packets have mixed sample steps")
    if len(ps) == 1:
        return ps[0]
    mean = np.mean(np.stack([p.samples for p in ps]), axis=0)
    return Packet(mean, step, ps[0].support_L, ps[0].bandwidth_B)


def estimate_bandwidth(p: Packet, power_frac: float = 0.99) -> float:
    """Smallest frequency holding ``power_frac`` of the non-DC power."""
    x = p.samples
    if not np.any(x):
        raise ValueError("cannot estimate the bandwidth of an all-zero packet")
    n = len(x)
    spec = np.abs(np.fft.rfft(x)) ** 2
    # one-sided power: every bin except DC and (even n) Nyquist stands for two cells
    weights = np.full(len(spec), 2.0)
    weights[0] = 0.0
    if n % 2 == 0:
        weights[-1] = 1.0
    power = spec * weights
    total = power.sum()
    freqs = np.fft.rfftfreq(n, d=p.sample_step)
    if total <= 0 or total < 1e-24 * spec[0]:
        warnings.warn("packet has no power beyond DC; bandwidth set to 0", DegenerateInputWarning, stacklevel=2)
        return 0.0
    cum = np.cumsum(power)
    k = int(np.searchsorted(cum, power_frac * total * (1 - 1e-12)))
    return float(freqs[min(k, len(freqs) - 1)])


def estimate_support(p: Packet, var_frac: float = 0.99) -> float:
    """Length of the shortest contiguous region holding ``var_frac`` of the variance."""
    x = p.samples
    e = (x - x.mean()) ** 2
    total = e.sum()
    if total == 0:
        raise ValueError("cannot estimate the support of a constant packet")
    cum = np.concatenate([[0.0], np.cumsum(e)])
    need = var_frac * total * (1 - 1e-12)
    # for each start i, the first end j with cum[j] - cum[i] >= need
    ends = np.searchsorted(cum, cum[:-1] + need)
    valid = ends <= len(x)
    widths = np.where(valid, ends - np.arange(len(x)), len(x) + 1)
    return float(widths.min() * p.sample_step)


def channel_throughput(pic_bits: float, packets_per_second: float) -> float:
    """Bits per second for a stream of packets."""
    if packets_per_second < 0:
        raise ValueError("packet rate must be non-negative")
    return float(pic_bits * packets_per_second)
