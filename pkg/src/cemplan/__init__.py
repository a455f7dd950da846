"""Sampling-based trajectory optimization: colored-noise CEM planning."""

from cemplan.noise import (
    NoiseSpec,
    SpectralFitError,
    SpectrumEstimate,
    estimate_psd,
    fit_spectral_exponent,
    sample_colored,
    sample_colored_batch,
)

__all__ = [
    "NoiseSpec",
    "SpectralFitError",
    "SpectrumEstimate",
    "estimate_psd",
    "fit_spectral_exponent",
    "sample_colored",
    "sample_colored_batch",
]

__version__ = "0.1.0"
