"""Full-reference similarity metrics and the common [0, 1] normalization.

Raw metric values keep their natural scale (MSE in squared gray levels,
PSNR in dB, SSIM in [-1, 1]); `normalize` maps any raw value onto a shared
0..1 axis where 1 means the pair is identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, DomainError, TooSmall
from .imageops import ensure_image, to_luma

PEAK = 255.0
PSNR_CAP_DB = 50.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_C1 = (0.01 * PEAK) ** 2
_C2 = (0.03 * PEAK) ** 2


@dataclass(frozen=True)
class MetricDescriptor:
    """Identity, orientation, and raw range of one metric."""

    name: str
    orientation: str  # "similarity" | "distance"
    raw_range: tuple[float, float]
    command: tuple[str, ...] | None = None  # argv for external providers

    @property
    def builtin(self) -> bool:
        return self.command is None


MSE_DESC = MetricDescriptor("mse", "distance", (0.0, PEAK * PEAK))
PSNR_DESC = MetricDescriptor("psnr", "similarity", (0.0, math.inf))
SSIM_DESC = MetricDescriptor("ssim", "similarity", (-1.0, 1.0))

BUILTIN_METRICS = {"mse": MSE_DESC, "psnr": PSNR_DESC, "ssim": SSIM_DESC}


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    ensure_image(a)
    ensure_image(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared difference over all pixels and channels."""
    _check_pair(a, b)
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; +inf for an identical pair."""
    m = mse(a, b)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / m)


def _windowed_mean(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Separable windowing; interior crop keeps only fully-covered windows.
    r = len(kernel) // 2
    out = correlate1d(plane, kernel, axis=0, mode="constant")
    out = correlate1d(out, kernel, axis=1, mode="constant")
    return out[r:plane.shape[0] - r, r:plane.shape[1] - r]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM on luma over all fully-interior 11x11 windows."""
    _check_pair(a, b)
    h, w = a.shape[:2]
    if min(h, w) < _SSIM_WINDOW:
        raise TooSmall(f"SSIM needs at least {_SSIM_WINDOW}px per side, got {w}x{h}")
    la, lb = to_luma(a), to_luma(b)

    x = np.arange(-(_SSIM_WINDOW // 2), _SSIM_WINDOW // 2 + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * _SSIM_SIGMA ** 2))
    k /= k.sum()

    mu_a = _windowed_mean(la, k)
    mu_b = _windowed_mean(lb, k)
    var_a = _windowed_mean(la * la, k) - mu_a * mu_a
    var_b = _windowed_mean(lb * lb, k) - mu_b * mu_b
    cov = _windowed_mean(la * lb, k) - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + _C1) * (2.0 * cov + _C2)
    den = (mu_a * mu_a + mu_b * mu_b + _C1) * (var_a + var_b + _C2)
    return float(np.mean(num / den))


_BUILTIN_FNS = {"mse": mse, "psnr": psnr, "ssim": ssim}


def compute_builtin(name: str, a: np.ndarray, b: np.ndarray) -> float:
    try:
        fn = _BUILTIN_FNS[name]
    except KeyError:
        raise DomainError(f"unknown builtin metric {name!r}") from None
    return fn(a, b)


def normalize(value: float, metric: MetricDescriptor) -> float:
    """Map a raw score to [0, 1] with 1 meaning an identical pair.

    PSNR saturates at 50 dB (visually lossless); SSIM clamps negatives to 0;
    MSE and external distances invert their declared range.
    """
    if metric.builtin:
        if metric.name == "psnr":
            if math.isinf(value) and value > 0:
                return 1.0
            return min(max(value, 0.0), PSNR_CAP_DB) / PSNR_CAP_DB
        if metric.name == "ssim":
            return min(max(value, 0.0), 1.0)
        if metric.name == "mse":
            return 1.0 - min(max(value / (PEAK * PEAK), 0.0), 1.0)
        raise DomainError(f"unknown builtin metric {metric.name!r}")
    low, high = metric.raw_range
    if not (math.isfinite(low) and math.isfinite(high)) or high <= low:
        raise DomainError(
            f"external metric {metric.name!r} must declare a finite range")
    t = min(max((value - low) / (high - low), 0.0), 1.0)
    return 1.0 - t if metric.orientation == "distance" else t


def in_declared_range(value: float, metric: MetricDescriptor) -> bool:
    """Whether a raw value sits inside the metric's declared raw range."""
    low, high = metric.raw_range
    return low <= value <= high
