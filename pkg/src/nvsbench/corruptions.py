"""Severity-parameterized corruption generators for render benchmarking.

Twelve core corruption kinds plus two extended kinds (fog, gaussian_noise),
each driven by an integer severity 0..20 where 0 is the identity. Stochastic
kinds draw every random number from a stream seeded only by CorruptionSpec's
seed field, so output is a pure function of (image, spec).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from scipy.ndimage import map_coordinates

from .errors import DomainError, GlobalOnlyKind, MaskMismatch
from .imageops import (
    blur_plane,
    ensure_image,
    gaussian_blur,
    hsv_to_rgb,
    resample,
    rgb_to_hsv,
    to_luma,
    to_uint8,
)
from .rng import SplitMix64

MAX_SEVERITY = 20


class CorruptionKind(enum.Enum):
    """Corruption families; the first twelve form the core suite."""

    BLUR = "blur"
    BRIGHTNESS = "brightness"
    COLOR_SHIFT = "color_shift"
    CONTRAST = "contrast"
    FLOATERS = "floaters"
    GRAYSCALE = "grayscale"
    PIXELATION = "pixelation"
    ROTATION = "rotation"
    SATURATION = "saturation"
    SHADOWS = "shadows"
    SPLATS = "splats"
    WARP = "warp"
    FOG = "fog"
    GAUSSIAN_NOISE = "gaussian_noise"

    @property
    def extended(self) -> bool:
        """True for the two kinds outside the core twelve."""
        return self in (CorruptionKind.FOG, CorruptionKind.GAUSSIAN_NOISE)

    @property
    def global_only(self) -> bool:
        """True for kinds that displace the whole frame and cannot be masked."""
        return self in (CorruptionKind.ROTATION, CorruptionKind.WARP)


CORE_KINDS = tuple(CorruptionKind)[:12]


def kind_from_name(name: str) -> CorruptionKind:
    try:
        return CorruptionKind(name)
    except ValueError:
        raise DomainError(f"unknown corruption kind {name!r}") from None


@dataclass(frozen=True)
class CorruptionSpec:
    """Fully determines one corruption application."""

    kind: CorruptionKind
    severity: int
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.severity <= MAX_SEVERITY:
            raise DomainError(f"severity {self.severity} outside [0, {MAX_SEVERITY}]")


def contrast_factor(severity: int) -> float:
    """Contrast scale about mid-gray; > 1 raises contrast, < 1 flattens."""
    return 1.5 - 0.07 * severity


# ---------------------------------------------------------------------------
# Per-kind implementations (severity >= 1)
# ---------------------------------------------------------------------------

def _blur(img, severity, _):
    return gaussian_blur(img, 0.25 * severity)


def _brightness(img, severity, _):
    return to_uint8(img.astype(np.float64) * (1.0 + 0.075 * severity))


def _color_shift(img, severity, _):
    h, s, v = rgb_to_hsv(img)
    h = np.mod(h + 9.0 * severity, 360.0)
    h[h >= 360.0] = 0.0
    return hsv_to_rgb(h, s, v)


def _contrast(img, severity, _):
    f = contrast_factor(severity)
    return to_uint8(128.0 + f * (img.astype(np.float64) - 128.0))


def _grayscale(img, severity, _):
    t = severity / MAX_SEVERITY
    luma = to_luma(img)[:, :, None]
    return to_uint8((1.0 - t) * img.astype(np.float64) + t * luma)


def _pixelation(img, severity, _):
    h, w = img.shape[:2]
    f = 1.0 + severity / 2.0
    down_w = max(1, int(w / f))
    down_h = max(1, int(h / f))
    small = resample(img, down_w, down_h, "nearest")
    return resample(small, w, h, "nearest")


def _saturation(img, severity, _):
    h, s, v = rgb_to_hsv(img)
    s = np.minimum(s * (1.0 + 0.15 * severity), 1.0)
    return hsv_to_rgb(h, s, v)


def _rotation_coords(w: int, h: int, angle_deg: float):
    theta = math.radians(angle_deg)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dx, dy = xx - cx, yy - cy
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    sx = cos_t * dx + sin_t * dy + cx
    sy = -sin_t * dx + cos_t * dy + cy
    return sy, sx


def _sample_bilinear(img, sy, sx):
    # Snap coordinates that are integer up to float noise: 'constant' mode
    # treats -1e-14 as fully outside, which would blacken frame edges on
    # full-turn rotations.
    ry, rx = np.rint(sy), np.rint(sx)
    sy = np.where(np.abs(sy - ry) < 1e-9, ry, sy)
    sx = np.where(np.abs(sx - rx) < 1e-9, rx, sx)
    planes = [
        map_coordinates(img[:, :, c].astype(np.float64), [sy, sx],
                        order=1, mode="constant", cval=0.0)
        for c in range(3)
    ]
    return to_uint8(np.stack(planes, axis=-1))


def _rotation(img, severity, _):
    h, w = img.shape[:2]
    sy, sx = _rotation_coords(w, h, 18.0 * severity)
    return _sample_bilinear(img, sy, sx)


def _warp(img, severity, _):
    h, w = img.shape[:2]
    sy, sx = _rotation_coords(w, h, 18.0 * severity)
    amp = 0.5 * severity
    wavelength = min(w, h) / 4.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    sx = sx + amp * np.sin(2.0 * np.pi * yy / wavelength)
    sy = sy + amp * np.sin(2.0 * np.pi * xx / wavelength)
    return _sample_bilinear(img, sy, sx)


def _ellipse(w: int, h: int, cx: float, cy: float, rx: float, ry: float) -> np.ndarray:
    yy, xx = np.ogrid[:h, :w]
    return (((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0).astype(np.float64)


def _soft_ellipse(w, h, cx, cy, rx, ry):
    feather = max(1.0, 0.25 * min(rx, ry))
    return np.clip(blur_plane(_ellipse(w, h, cx, cy, rx, ry), feather), 0.0, 1.0)


def _floaters(img, severity, stream):
    h, w = img.shape[:2]
    m = min(w, h)
    n = severity
    cxs = stream.uniforms(n, 0, w)
    cys = stream.uniforms(n, 0, h)
    rxs = stream.uniforms(n, 0.02 * m, 0.10 * m)
    rys = stream.uniforms(n, 0.02 * m, 0.10 * m)
    tones = stream.uniforms(n, 60, 220)
    acc = img.astype(np.float64)
    for i in range(n):
        alpha = 0.5 * _soft_ellipse(w, h, cxs[i], cys[i], rxs[i], rys[i])[:, :, None]
        acc = acc * (1.0 - alpha) + tones[i] * alpha
    return to_uint8(acc)


def _shadows(img, severity, stream):
    h, w = img.shape[:2]
    m = min(w, h)
    n = math.ceil(severity / 4)
    opacity = 0.25 + 0.025 * severity
    cxs = stream.uniforms(n, 0, w)
    cys = stream.uniforms(n, 0, h)
    rxs = stream.uniforms(n, 0.10 * m, 0.30 * m)
    rys = stream.uniforms(n, 0.10 * m, 0.30 * m)
    acc = img.astype(np.float64)
    for i in range(n):
        soft = _soft_ellipse(w, h, cxs[i], cys[i], rxs[i], rys[i])[:, :, None]
        acc = acc * (1.0 - opacity * soft)
    return to_uint8(acc)


def _splats(img, severity, stream):
    h, w = img.shape[:2]
    m = min(w, h)
    n = severity
    cxs = stream.uniforms(n, 0, w)
    cys = stream.uniforms(n, 0, h)
    rxs = stream.uniforms(n, 0.03 * m, 0.08 * m)
    rys = stream.uniforms(n, 0.03 * m, 0.08 * m)
    colors = stream.integers(3 * n, 0, 256).reshape(n, 3)
    out = img.copy()
    for i in range(n):
        mask = _ellipse(w, h, cxs[i], cys[i], rxs[i], rys[i]) > 0.0
        out[mask] = colors[i]
    return out


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def _plasma(size: int, stream: SplitMix64) -> np.ndarray:
    """Diamond-square fractal field on a power-of-two grid, scaled to [0, 1]."""
    grid = np.zeros((size, size), dtype=np.float64)
    step = size
    wibble = 100.0
    decay = 3.0
    while step >= 2:
        half = step // 2
        corners = grid[0::step, 0::step]
        acc = corners + np.roll(corners, -1, axis=0)
        acc = acc + np.roll(acc, -1, axis=1)
        noise = stream.uniforms(acc.size, -wibble, wibble).reshape(acc.shape)
        grid[half::step, half::step] = acc / 4.0 + noise

        centers = grid[half::step, half::step]
        top = grid[0::step, 0::step]
        ld = centers + np.roll(centers, 1, axis=0)
        lu = top + np.roll(top, -1, axis=1)
        noise = stream.uniforms(ld.size, -wibble, wibble).reshape(ld.shape)
        grid[0::step, half::step] = (ld + lu) / 4.0 + noise

        td = centers + np.roll(centers, 1, axis=1)
        tu = top + np.roll(top, -1, axis=0)
        noise = stream.uniforms(td.size, -wibble, wibble).reshape(td.shape)
        grid[half::step, 0::step] = (td + tu) / 4.0 + noise

        step = half
        wibble /= decay
    lo, hi = grid.min(), grid.max()
    if hi == lo:
        return np.zeros_like(grid)
    return (grid - lo) / (hi - lo)


def _fog(img, severity, stream):
    h, w = img.shape[:2]
    weight = 0.6 * severity / MAX_SEVERITY
    field = _plasma(_next_pow2(max(w, h)), stream)[:h, :w] * 255.0
    out = (1.0 - weight) * img.astype(np.float64) + weight * field[:, :, None]
    return to_uint8(out)


def _gaussian_noise(img, severity, stream):
    h, w = img.shape[:2]
    noise = stream.normals(h * w * 3, sigma=2.5 * severity).reshape(h, w, 3)
    return to_uint8(img.astype(np.float64) + noise)


_APPLIERS = {
    CorruptionKind.BLUR: _blur,
    CorruptionKind.BRIGHTNESS: _brightness,
    CorruptionKind.COLOR_SHIFT: _color_shift,
    CorruptionKind.CONTRAST: _contrast,
    CorruptionKind.FLOATERS: _floaters,
    CorruptionKind.GRAYSCALE: _grayscale,
    CorruptionKind.PIXELATION: _pixelation,
    CorruptionKind.ROTATION: _rotation,
    CorruptionKind.SATURATION: _saturation,
    CorruptionKind.SHADOWS: _shadows,
    CorruptionKind.SPLATS: _splats,
    CorruptionKind.WARP: _warp,
    CorruptionKind.FOG: _fog,
    CorruptionKind.GAUSSIAN_NOISE: _gaussian_noise,
}


def apply_corruption(img: np.ndarray, spec: CorruptionSpec) -> np.ndarray:
    """Apply one corruption; severity 0 returns a bit-identical copy."""
    ensure_image(img)
    if spec.severity == 0:
        return img.copy()
    stream = SplitMix64(spec.seed)
    return _APPLIERS[spec.kind](img, spec.severity, stream)


# ---------------------------------------------------------------------------
# Masks and masked application
# ---------------------------------------------------------------------------

def ensure_mask(mask: np.ndarray) -> np.ndarray:
    if not isinstance(mask, np.ndarray) or mask.dtype != np.bool_ or mask.ndim != 2:
        raise DomainError("mask must be a 2D boolean array")
    return mask


def apply_masked_corruption(img: np.ndarray, mask: np.ndarray,
                            spec: CorruptionSpec) -> np.ndarray:
    """Corrupt only where the mask is true; elsewhere pixels are untouched."""
    ensure_image(img)
    ensure_mask(mask)
    if mask.shape != img.shape[:2]:
        raise MaskMismatch(
            f"mask {mask.shape} does not match image {img.shape[:2]}")
    if spec.kind.global_only:
        raise GlobalOnlyKind(
            f"{spec.kind.value} alters the whole frame and cannot be masked")
    corrupted = apply_corruption(img, spec)
    return np.where(mask[:, :, None], corrupted, img)


def mask_coverage(mask: np.ndarray) -> float:
    """Fraction of true bits."""
    ensure_mask(mask)
    return float(mask.mean())


def load_mask(path) -> np.ndarray:
    """Read a single-channel PNG mask; values >= 128 count as foreground."""
    gray = np.asarray(PILImage.open(path).convert("L"))
    return gray >= 128


def save_mask(mask: np.ndarray, path) -> None:
    ensure_mask(mask)
    PILImage.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(
        path, format="PNG")


# ---------------------------------------------------------------------------
# Pixel cropping
# ---------------------------------------------------------------------------

def crop_and_rescale(img: np.ndarray, n: int) -> np.ndarray:
    """Trim n pixels from every edge, then resample back to the input size.

    Emulates a render whose camera view is off by a sub-pixel amount after
    rescaling; n = 0 is the identity.
    """
    ensure_image(img)
    if n < 0:
        raise DomainError("crop amount must be >= 0")
    if n == 0:
        return img.copy()
    h, w = img.shape[:2]
    if 2 * n >= min(w, h):
        raise DomainError(f"crop of {n}px per side degenerates a {w}x{h} image")
    cropped = img[n:h - n, n:w - n]
    return resample(cropped, w, h, "bilinear")
