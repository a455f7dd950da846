"""Colored Gaussian noise and power-spectrum analysis.

Noise rows with power spectral density proportional to 1/f**beta are
synthesized in the frequency domain: independent Gaussian Fourier
coefficients are scaled by f**(-beta/2) and inverted with a real FFT.
beta = 0 is white noise, beta = 1 pink, beta = 2 red/Brownian.  The
companion estimators (periodogram, log-log slope fit) are what the tests
and the experiment harness use to check the spectral law.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SpectralFitError(RuntimeError):
    """Raised when a power-law slope cannot be fitted to a spectrum."""


@dataclass(frozen=True)
class NoiseSpec:
    """Shape and color of a block of noise rows.

    beta is the spectral exponent (>= 0), dims the number of independent
    rows, horizon the number of timesteps per row (>= 2 for the FFT).
    """

    beta: float
    dims: int
    horizon: int

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.dims < 1:
            raise ValueError(f"dims must be >= 1, got {self.dims}")
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")


def _spectral_amplitudes(beta: float, horizon: int) -> tuple[np.ndarray, float]:
    """Filter amplitudes on the rfft grid and the analytic output scale.

    The diverging zero-frequency amplitude is pinned to the lowest positive
    frequency (1/horizon), which bounds long-horizon drift.  The returned
    scale is the standard deviation the filtered series would have in
    expectation; dividing by it normalizes rows analytically instead of
    per-sample, which preserves Gaussianity and a seed-deterministic scale.
    The DC bin is excluded from the scale because it only shifts the row
    mean, which the sample variance ignores.
    """
    freqs = np.fft.rfftfreq(horizon)
    freqs[0] = freqs[1]
    amplitudes = freqs ** (-beta / 2.0)
    weights = amplitudes[1:].copy()
    if horizon % 2 == 0:
        weights[-1] *= 0.5  # Nyquist coefficient is real-valued
    scale = 2.0 * np.sqrt(np.sum(weights**2)) / horizon
    return amplitudes, scale


def sample_colored_batch(
    spec: NoiseSpec, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Draw ``count`` independent noise blocks, shape (count, dims, horizon).

    Each row has zero mean and unit variance in expectation and a power
    spectral density proportional to 1/f**beta.  Deterministic given the
    generator state.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    amplitudes, scale = _spectral_amplitudes(spec.beta, spec.horizon)
    shape = (count, spec.dims, amplitudes.size)
    real = rng.standard_normal(shape) * amplitudes
    imag = rng.standard_normal(shape) * amplitudes
    imag[..., 0] = 0.0
    real[..., 0] *= np.sqrt(2.0)
    if spec.horizon % 2 == 0:
        # f = 0.5 coincides with f = -0.5, so the coefficient must be real.
        imag[..., -1] = 0.0
        real[..., -1] *= np.sqrt(2.0)
    series = np.fft.irfft(real + 1j * imag, n=spec.horizon, axis=-1)
    return series / scale


def sample_colored(spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw one (dims, horizon) block of colored noise rows."""
    return sample_colored_batch(spec, rng, 1)[0]


@dataclass(frozen=True)
class SpectrumEstimate:
    """Periodogram over the positive frequencies of a sequence."""

    frequencies: np.ndarray  # cycles per step, strictly increasing, > 0
    power: np.ndarray  # nonnegative, same length as frequencies

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        power = np.asarray(self.power, dtype=float)
        if freqs.shape != power.shape or freqs.ndim != 1:
            raise ValueError("frequencies and power must be equal-length 1-d arrays")
        if freqs.size and (np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0)):
            raise ValueError("frequencies must be strictly increasing and positive")
        if np.any(power < 0):
            raise ValueError("power must be nonnegative")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "power", power)


def estimate_psd(sequence: np.ndarray, taper: bool = False) -> SpectrumEstimate:
    """Periodogram of a sequence over positive frequencies.

    The mean is removed, so the DC bin is exactly zero and excluded.  The
    normalization is chosen so that sum(power) equals the biased sample
    variance times the sequence length exactly (discrete Parseval identity,
    up to rounding): interior bins carry 2|X_k|^2 / h and the Nyquist bin
    (even h) carries |X_k|^2 / h.

    With taper=True a Hann window (scaled to unit mean-square) is applied
    first.  The plain periodogram's leakage floor falls off only as f**-2,
    so spectra steeper than that, e.g. cumulative sums of colored noise,
    need the taper to fit correctly; the Parseval identity then holds for
    the windowed sequence rather than the raw one.
    """
    values = np.asarray(sequence, dtype=float)
    if values.ndim != 1:
        raise ValueError(f"sequence must be 1-d, got shape {values.shape}")
    h = values.size
    if h < 8:
        raise ValueError(f"sequence too short for a periodogram: {h} < 8")
    centered = values - values.mean()
    if taper:
        window = np.hanning(h)
        centered = centered * (window / np.sqrt(np.mean(window**2)))
    coeffs = np.fft.rfft(centered)
    power = np.abs(coeffs[1:]) ** 2 * (2.0 / h)
    if h % 2 == 0:
        power[-1] /= 2.0
    return SpectrumEstimate(np.fft.rfftfreq(h)[1:], power)


def fit_spectral_exponent(
    spectrum: SpectrumEstimate,
    fmin: float | None = None,
    fmax: float | None = None,
) -> float:
    """Least-squares slope of log(power) against log(frequency).

    The default band drops the lowest bin (contaminated by the generator's
    low-frequency cutoff) and the top 10% of bins (discretization effects);
    pass fmin/fmax to override, e.g. for integrated sequences whose spectrum
    flattens towards Nyquist.
    """
    freqs = spectrum.frequencies
    power = spectrum.power
    if freqs.size < 4:
        raise ValueError(f"need >= 4 positive-frequency bins, got {freqs.size}")
    if fmin is None:
        fmin = freqs[1]
    if fmax is None:
        fmax = freqs[freqs.size - 1 - int(np.ceil(0.10 * freqs.size))]
    band = (freqs >= fmin) & (freqs <= fmax)
    if np.count_nonzero(band) < 2:
        raise SpectralFitError("fitting band contains fewer than 2 bins")
    if np.any(power[band] <= 0):
        raise SpectralFitError("non-positive power in fitting band")
    slope, _ = np.polyfit(np.log(freqs[band]), np.log(power[band]), 1)
    return float(slope)
