"""Raster primitives: decode/encode, luma, HSV, blur, resampling.

Images are numpy arrays of shape (height, width, 3), dtype uint8, RGB.
Single-channel planes (luma, masks being feathered) are float64 arrays of
shape (height, width). All operations are pure.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from scipy.ndimage import correlate1d

from .errors import DomainError, FormatError

_PNG_SIG = b"\x89PNG\r\n\x1a\n"

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def ensure_image(img: np.ndarray) -> np.ndarray:
    """Validate the (h, w, 3) uint8 image convention; returns the input."""
    if not isinstance(img, np.ndarray):
        raise DomainError(f"expected ndarray image, got {type(img).__name__}")
    if img.dtype != np.uint8:
        raise DomainError(f"image dtype must be uint8, got {img.dtype}")
    if img.ndim != 3 or img.shape[2] != 3:
        raise DomainError(f"image shape must be (h, w, 3), got {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise DomainError("image dimensions must be >= 1")
    return img


def to_uint8(arr: np.ndarray) -> np.ndarray:
    """Round and saturate a float array to uint8."""
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# Decode / encode
# ---------------------------------------------------------------------------

def load_image(path) -> np.ndarray:
    """Decode a PNG or binary PPM (P6) file to an RGB uint8 array.

    16-bit channels are truncated to their high 8 bits; alpha is composited
    over black; grayscale and palette images are expanded to RGB.
    """
    data = Path(path).read_bytes()
    if data[:8] == _PNG_SIG:
        return _decode_png(data)
    if data[:2] == b"P6":
        return _decode_ppm(data)
    raise FormatError(f"{path}: not a PNG or binary PPM (P6) file")


def _decode_png(data: bytes) -> np.ndarray:
    try:
        im = PILImage.open(io.BytesIO(data))
        im.load()
    except Exception as exc:
        raise FormatError(f"corrupt PNG stream: {exc}") from exc
    if im.width < 1 or im.height < 1:
        raise FormatError("PNG has a zero dimension")

    if im.mode in ("I", "I;16", "I;16B", "I;16L"):
        # 16-bit grayscale: keep the high byte.
        gray = (np.asarray(im, dtype=np.uint32) >> 8).astype(np.uint8)
        return np.repeat(gray[:, :, None], 3, axis=2)

    has_alpha = "A" in im.getbands() or (im.mode == "P" and "transparency" in im.info)
    if has_alpha:
        arr = np.asarray(im.convert("RGBA"), dtype=np.float64)
        rgb = arr[:, :, :3] * (arr[:, :, 3:4] / 255.0)  # composite over black
        return to_uint8(rgb)
    return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def _decode_ppm(data: bytes) -> np.ndarray:
    pos = 2  # past magic
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise FormatError("malformed PPM header")
        fields.append(int(token))
    pos += 1  # the single whitespace byte after maxval
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError("PPM has a zero dimension")
    if not 0 < maxval < 65536:
        raise FormatError(f"PPM maxval {maxval} out of range")

    count = width * height * 3
    if maxval < 256:
        payload = data[pos : pos + count]
        if len(payload) != count:
            raise FormatError("truncated PPM payload")
        samples = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    else:
        payload = data[pos : pos + 2 * count]
        if len(payload) != 2 * count:
            raise FormatError("truncated PPM payload")
        samples = np.frombuffer(payload, dtype=">u2").astype(np.float64)
    if maxval != 255:
        samples = samples * (255.0 / maxval)
    return to_uint8(samples).reshape(height, width, 3)


def save_image(img: np.ndarray, path) -> None:
    """Encode to PNG or binary PPM (P6); the extension selects the codec."""
    ensure_image(img)
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        PILImage.fromarray(img, mode="RGB").save(path, format="PNG")
    elif suffix == ".ppm":
        height, width = img.shape[:2]
        header = b"P6\n%d %d\n255\n" % (width, height)
        path.write_bytes(header + img.tobytes())
    else:
        raise FormatError(f"unknown image extension {suffix!r}")


# ---------------------------------------------------------------------------
# Color
# ---------------------------------------------------------------------------

def to_luma(img: np.ndarray) -> np.ndarray:
    """Rec. 601 luma plane, float64, unrounded, range [0, 255]."""
    ensure_image(img)
    r, g, b = LUMA_WEIGHTS
    arr = img.astype(np.float64)
    return r * arr[:, :, 0] + g * arr[:, :, 1] + b * arr[:, :, 2]


def rgb_to_hsv(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hexcone HSV planes: H in [0, 360), S and V in [0, 1]."""
    ensure_image(img)
    rgb = img.astype(np.float64) / 255.0
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    v = rgb.max(axis=2)
    c = v - rgb.min(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(v > 0.0, c / v, 0.0)
        hr = np.mod((g - b) / c, 6.0)
        hg = (b - r) / c + 2.0
        hb = (r - g) / c + 4.0
    h = np.select([c == 0.0, v == r, v == g], [0.0, hr, hg], default=hb) * 60.0
    h = np.where(h >= 360.0, h - 360.0, h)
    return h, s, v


def hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse hexcone conversion back to a uint8 RGB image."""
    h = np.asarray(h, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.any(h < 0.0) or np.any(h >= 360.0):
        raise DomainError("H out of [0, 360)")
    if np.any(s < 0.0) or np.any(s > 1.0) or np.any(v < 0.0) or np.any(v > 1.0):
        raise DomainError("S or V out of [0, 1]")
    hp = h / 60.0
    c = v * s
    x = c * (1.0 - np.abs(np.mod(hp, 2.0) - 1.0))
    m = v - c
    zero = np.zeros_like(c)
    sector = np.floor(hp).astype(np.int64)
    r1 = np.choose(sector, [c, x, zero, zero, x, c])
    g1 = np.choose(sector, [x, c, c, x, zero, zero])
    b1 = np.choose(sector, [zero, zero, x, c, c, x])
    rgb = np.stack([r1 + m, g1 + m, b1 + m], axis=-1)
    return to_uint8(rgb * 255.0)


# ---------------------------------------------------------------------------
# Convolution and resampling
# ---------------------------------------------------------------------------

def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled 1D Gaussian, radius ceil(3*sigma), normalized to sum 1."""
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def blur_plane(plane: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of a float plane, clamp-to-edge boundary."""
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return plane.astype(np.float64).copy()
    k = gaussian_kernel(sigma)
    out = correlate1d(plane.astype(np.float64), k, axis=0, mode="nearest")
    return correlate1d(out, k, axis=1, mode="nearest")


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Per-channel separable Gaussian blur; sigma 0 is the identity."""
    ensure_image(img)
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    k = gaussian_kernel(sigma)
    out = correlate1d(img.astype(np.float64), k, axis=0, mode="nearest")
    out = correlate1d(out, k, axis=1, mode="nearest")
    return to_uint8(out)


def _source_coords(dst_size: int, src_size: int) -> np.ndarray:
    # Pixel-center alignment: src = (i + 0.5) * scale - 0.5, clamped.
    scale = src_size / dst_size
    coords = (np.arange(dst_size, dtype=np.float64) + 0.5) * scale - 0.5
    return np.clip(coords, 0.0, src_size - 1.0)


def resample_plane(plane: np.ndarray, new_w: int, new_h: int) -> np.ndarray:
    """Bilinear resample of a float plane with pixel-center alignment."""
    h, w = plane.shape
    sx = _source_coords(new_w, w)
    sy = _source_coords(new_h, h)
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    p = plane.astype(np.float64)
    top = p[np.ix_(y0, x0)] * (1 - fx) + p[np.ix_(y0, x1)] * fx
    bot = p[np.ix_(y1, x0)] * (1 - fx) + p[np.ix_(y1, x1)] * fx
    return top * (1 - fy)[:, None] + bot * fy[:, None]


def resample(img: np.ndarray, new_w: int, new_h: int, filter: str = "bilinear") -> np.ndarray:
    """Resize to (new_w, new_h) with nearest or bilinear sampling."""
    ensure_image(img)
    if new_w < 1 or new_h < 1:
        raise DomainError("resample dimensions must be >= 1")
    if filter not in ("nearest", "bilinear"):
        raise DomainError(f"unknown filter {filter!r}")
    h, w = img.shape[:2]
    if (new_w, new_h) == (w, h):
        return img.copy()
    if filter == "nearest":
        ix = np.clip(np.floor(_source_coords(new_w, w) + 0.5), 0, w - 1).astype(np.int64)
        iy = np.clip(np.floor(_source_coords(new_h, h) + 0.5), 0, h - 1).astype(np.int64)
        return img[np.ix_(iy, ix)].copy()
    channels = [resample_plane(img[:, :, c], new_w, new_h) for c in range(3)]
    return to_uint8(np.stack(channels, axis=-1))
