"""Correlation-based information metrics for 1D, 2D and 3D measurements."""

__version__ = "0.1.0"

from .grid import (
    RadialBins,
    Spectrum,
    Volume,
    forward_transform,
    inverse_transform,
    radial_bins,
    shell_power,
)
from .info import (
    InfoParams,
    fisher_bits,
    fisher_information,
    integrated_information,
    radial_weight,
    weighted_information,
)
from .metrics import (
    Crossing,
    Curve,
    ThresholdParams,
    fixed_threshold,
    fsc,
    half_bit_threshold,
    half_bit_value,
    resolution_crossing,
)

__all__ = [
    "RadialBins", "Spectrum", "Volume", "forward_transform", "inverse_transform",
    "radial_bins", "shell_power",
    "InfoParams", "fisher_bits", "fisher_information", "integrated_information",
    "radial_weight", "weighted_information",
    "Crossing", "Curve", "ThresholdParams", "fixed_threshold", "fsc",
    "half_bit_threshold", "half_bit_value", "resolution_crossing",
]
