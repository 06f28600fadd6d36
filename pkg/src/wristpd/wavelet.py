"""Pyramidal discrete wavelet transform on power-of-two signals.

Implements the orthonormal Daubechies family (2, 4, 6 or 8 filter taps)
with periodic boundary extension, run to full depth: an n = 2^k sample
signal decomposes into k detail scales plus a single approximation
coefficient.  Detail level 1 is the highest frequency band; at sampling
rate Fs, level j covers (Fs / 2**(j + 1), Fs / 2**j].

Also provides the cubic-spline resampler used to bring raw windows
(e.g. 500 samples at 50 Hz) onto a power-of-two grid before transforming.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ValidationError

__all__ = [
    "DAUBECHIES_TAPS",
    "daubechies_filters",
    "next_pow2",
    "resample_to_pow2",
    "WaveletCoeffs",
    "ScaleEnergies",
    "dwt_forward",
    "dwt_inverse",
    "scale_energies",
    "band_edges",
]

# ---------------------------------------------------------------------------
# Filters
# ---------------------------------------------------------------------------

# Orthonormal Daubechies low-pass coefficients, normalised to sum(h) = sqrt(2)
# and sum(h**2) = 1.  Values are the float64 roundings of the exact
# spectral-factorisation solutions.
_DAUBECHIES_H = {
    2: (
        0.7071067811865476,
        0.7071067811865476,
    ),
    4: (
        0.48296291314453416,
        0.8365163037378079,
        0.2241438680420134,
        -0.12940952255126037,
    ),
    6: (
        0.33267055295008263,
        0.8068915093110925,
        0.45987750211849154,
        -0.13501102001025458,
        -0.08544127388202666,
        0.03522629188570953,
    ),
    8: (
        0.2303778133088965,
        0.7148465705529157,
        0.6308807679298589,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.0328830116668852,
        -0.010597401785069032,
    ),
}

DAUBECHIES_TAPS = tuple(sorted(_DAUBECHIES_H))


def daubechies_filters(taps: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Return the (low-pass, high-pass) analysis pair for a tap count.

    The high-pass filter is the quadrature mirror of the low-pass one:
    ``g[t] = (-1)**t * h[taps - 1 - t]``.

    Parameters
    ----------
    taps : int
        Filter length; one of 2, 4, 6, 8.

    Returns
    -------
    (h, g) : tuple of ndarray
        Low-pass and high-pass filter coefficients, each of length ``taps``.
    """
    if taps not in _DAUBECHIES_H:
        raise ValidationError(
            f"unsupported filter length {taps!r}; choose one of {DAUBECHIES_TAPS}"
        )
    h = np.asarray(_DAUBECHIES_H[taps], dtype=np.float64)
    t = np.arange(taps)
    g = ((-1.0) ** t) * h[::-1]
    return h, g


def next_pow2(n: int) -> int:
    """Smallest power of two that is >= n (n must be positive)."""
    if n < 1:
        raise ValidationError(f"need a positive length, got {n}")
    return 1 << (int(n) - 1).bit_length()


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------

def resample_to_pow2(
    values: np.ndarray,
    timestamps: np.ndarray,
    target_length: int | None = None,
) -> np.ndarray:
    """Resample a signal onto a uniform power-of-two grid.

    A natural cubic spline is fit to ``(timestamps, values)`` and evaluated
    at ``target_length`` evenly spaced points spanning the same time range.
    When ``target_length`` is omitted it defaults to ``next_pow2(len(values))``.
    If the signal already has exactly the target length it is returned
    unchanged (no spline round-trip).

    Parameters
    ----------
    values : ndarray, shape (n,)
        Signal samples; n >= 4 (cubic spline needs four points).
    timestamps : ndarray, shape (n,)
        Strictly increasing sample times.
    target_length : int, optional
        Explicit output length; must be a power of two >= 4.

    Returns
    -------
    ndarray, shape (target_length,)
    """
    values = np.asarray(values, dtype=np.float64)
    timestamps = np.asarray(timestamps, dtype=np.float64)
    n = values.shape[0]
    if values.ndim != 1 or timestamps.shape != values.shape:
        raise ValidationError("values and timestamps must be 1-D and equal length")
    if n < 4:
        raise ValidationError(f"need at least 4 samples to resample, got {n}")
    if np.any(np.diff(timestamps) <= 0):
        raise ValidationError("timestamps must be strictly increasing")

    if target_length is None:
        target_length = next_pow2(n)
    else:
        target_length = int(target_length)
        if target_length < 4 or target_length & (target_length - 1):
            raise ValidationError(
                f"target_length must be a power of two >= 4, got {target_length}"
            )

    if n == target_length:
        return values.copy()

    spline = CubicSpline(timestamps, values, bc_type="natural")
    grid = np.linspace(timestamps[0], timestamps[-1], target_length)
    return spline(grid)


# ---------------------------------------------------------------------------
# Transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveletCoeffs:
    """Full-depth decomposition of a 2**k sample signal.

    Attributes
    ----------
    details : tuple of ndarray
        ``details[j - 1]`` holds detail level j (level 1 = highest band)
        and has length ``2**(k - j)``.
    approximation : float
        The single depth-k approximation coefficient (carries the DC /
        gravity component).
    """

    details: tuple[np.ndarray, ...]
    approximation: float

    @property
    def k(self) -> int:
        return len(self.details)

    @property
    def n(self) -> int:
        return 1 << self.k


@dataclass(frozen=True)
class ScaleEnergies:
    """Summed squared detail coefficients per scale.

    ``cont[j - 1]`` is the energy of detail level j; ``approx_energy`` is
    the squared approximation coefficient (kept separate so relative
    features can ignore the DC term).
    """

    cont: np.ndarray
    approx_energy: float

    @property
    def k(self) -> int:
        return len(self.cont)

    @property
    def total(self) -> float:
        return float(self.cont.sum() + self.approx_energy)


def _check_pow2_signal(signal: np.ndarray) -> np.ndarray:
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1:
        raise ValidationError(f"expected a 1-D signal, got shape {signal.shape}")
    n = signal.shape[0]
    if n < 2 or n & (n - 1):
        raise ValidationError(f"signal length must be a power of two >= 2, got {n}")
    if not np.all(np.isfinite(signal)):
        raise ValidationError("signal contains NaN or infinite samples")
    return signal


def dwt_forward(signal: np.ndarray, taps: int = 4) -> WaveletCoeffs:
    """Decompose a power-of-two signal to full depth.

    Each level convolves the running approximation with the analysis pair
    under periodic extension and keeps every second output, halving the
    length until a single approximation coefficient remains.

    Parameters
    ----------
    signal : ndarray, shape (2**k,)
        Input samples, k >= 1.
    taps : int
        Daubechies filter length (2, 4, 6 or 8).

    Returns
    -------
    WaveletCoeffs
        k detail arrays (level 1 first) plus the approximation scalar.
    """
    signal = _check_pow2_signal(signal)
    h, g = daubechies_filters(taps)
    L = taps

    details: list[np.ndarray] = []
    approx = signal
    while approx.shape[0] > 1:
        m = approx.shape[0]
        idx = (2 * np.arange(m // 2)[:, None] + np.arange(L)[None, :]) % m
        windows = approx[idx]
        details.append(windows @ g)
        approx = windows @ h
    return WaveletCoeffs(details=tuple(details), approximation=float(approx[0]))


def dwt_inverse(coeffs: WaveletCoeffs, taps: int = 4) -> np.ndarray:
    """Reconstruct the signal from a full-depth decomposition.

    Exact inverse of :func:`dwt_forward` for the same ``taps`` (up to
    float rounding): each level scatters the coarse approximation and the
    matching detail back through the synthesis filters with periodic
    wrap-around.
    """
    h, g = daubechies_filters(taps)
    k = coeffs.k
    if k < 1:
        raise ValidationError("decomposition must contain at least one detail level")
    for j, d in enumerate(coeffs.details, start=1):
        if d.shape != (1 << (k - j),):
            raise ValidationError(
                f"detail level {j} has length {d.shape[0]}, expected {1 << (k - j)}"
            )

    approx = np.array([coeffs.approximation], dtype=np.float64)
    for d in coeffs.details[::-1]:
        m = 2 * approx.shape[0]
        out = np.zeros(m)
        idx = (2 * np.arange(approx.shape[0])[:, None] + np.arange(taps)[None, :]) % m
        np.add.at(out, idx, approx[:, None] * h[None, :] + d[:, None] * g[None, :])
        approx = out
    return approx


def scale_energies(coeffs: WaveletCoeffs) -> ScaleEnergies:
    """Sum squared coefficients per detail scale.

    By orthonormality the detail energies plus the squared approximation
    equal the input signal's energy (Parseval), which the tests pin.
    """
    cont = np.array([float(d @ d) for d in coeffs.details])
    return ScaleEnergies(cont=cont, approx_energy=coeffs.approximation ** 2)


def band_edges(level: int, sample_rate: float, k: int | None = None) -> tuple[float, float]:
    """Frequency band (low, high) in Hz covered by a detail level.

    Level j spans (Fs / 2**(j + 1), Fs / 2**j]; e.g. at 50 Hz, level 3
    covers 3.125-6.25 Hz, which brackets the 4-6 Hz tremor band.
    """
    if level < 1 or (k is not None and level > k):
        raise ValidationError(f"detail level {level} out of range")
    if sample_rate <= 0:
        raise ValidationError("sample_rate must be positive")
    return sample_rate / 2.0 ** (level + 1), sample_rate / 2.0 ** level
