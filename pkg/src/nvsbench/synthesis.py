"""Deterministic synthetic test corpora and coverage-controlled masks.

Stands in for scene photography at desk scale: every image is a seeded
composite of a color gradient, a checkerboard, value noise, and a handful of
building-like rectangles, so there is both low-frequency structure and
enough fine texture for pixel-level metrics to react to.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import DomainError
from .imageops import resample_plane, save_image, to_uint8
from .rng import SplitMix64, fnv1a64


def _gradient(w, h, stream):
    c0 = stream.uniforms(3, 0, 256)
    c1 = stream.uniforms(3, 0, 256)
    angle = stream.uniforms(1, 0, 2 * np.pi)[0]
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    proj = np.cos(angle) * xx / max(w - 1, 1) + np.sin(angle) * yy / max(h - 1, 1)
    lo, hi = proj.min(), proj.max()
    t = (proj - lo) / (hi - lo) if hi > lo else np.zeros_like(proj)
    return c0 + t[:, :, None] * (c1 - c0)


def _checkerboard(w, h, stream):
    period = int(stream.integers(1, 2, 13)[0])
    ox = int(stream.integers(1, 0, period)[0])
    oy = int(stream.integers(1, 0, period)[0])
    ca = stream.uniforms(3, 0, 256)
    cb = stream.uniforms(3, 0, 256)
    yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    cell = (((xx + ox) // period) + ((yy + oy) // period)) % 2
    return np.where(cell[:, :, None] == 0, ca, cb)


def _value_noise(w, h, stream):
    cell = int(stream.integers(1, 4, 25)[0])
    gw = max(2, w // cell + 1)
    gh = max(2, h // cell + 1)
    grid = stream.uniforms(gw * gh, -1.0, 1.0).reshape(gh, gw)
    return resample_plane(grid, w, h)


def _buildings(acc, stream):
    h, w = acc.shape[:2]
    count = int(stream.integers(1, 3, 9)[0])
    for _ in range(count):
        bw = int(stream.uniforms(1, 0.10, 0.35)[0] * w)
        bh = int(stream.uniforms(1, 0.10, 0.45)[0] * h)
        x0 = int(stream.integers(1, 0, max(1, w - bw))[0])
        y0 = int(stream.integers(1, 0, max(1, h - bh))[0])
        color = stream.uniforms(3, 40, 220)
        acc[y0:y0 + bh, x0:x0 + bw] = color
        if bw > 24 and bh > 24:
            # Window grid: darker pits every few pixels give facade texture.
            step = int(stream.integers(1, 6, 11)[0])
            win = max(2, step // 2)
            shade = color * 0.45
            for wy in range(y0 + 3, y0 + bh - win - 1, step):
                for wx in range(x0 + 3, x0 + bw - win - 1, step):
                    acc[wy:wy + win, wx:wx + win] = shade
    return acc


def synthesize_image(width: int, height: int, seed: int) -> np.ndarray:
    """One deterministic composite test image."""
    stream = SplitMix64(seed)
    acc = _gradient(width, height, stream)
    board_weight = stream.uniforms(1, 0.35, 0.60)[0]
    acc = (1 - board_weight) * acc + board_weight * _checkerboard(width, height, stream)
    noise_amp = stream.uniforms(1, 20, 45)[0]
    acc = acc + noise_amp * _value_noise(width, height, stream)[:, :, None]
    acc = _buildings(acc, stream)
    return to_uint8(acc)


def generate_test_corpus(out_dir, count: int, width: int, height: int,
                         seed: int) -> list[str]:
    """Write `count` PNG images named img_0000.png...; returns image ids.

    Re-running with the same arguments reproduces the files bit-identically.
    """
    if count < 1:
        raise DomainError(f"corpus count must be >= 1, got {count}")
    if width < 1 or height < 1:
        raise DomainError("corpus image dimensions must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = []
    for i in range(count):
        image_id = f"img_{i:04d}"
        img = synthesize_image(width, height, fnv1a64(seed, "corpus", i))
        save_image(img, out_dir / f"{image_id}.png")
        ids.append(image_id)
    return ids


def _ellipse_fill(w, h, cx, cy, alpha):
    # Semi-axes alpha*w/2, alpha*h/2 around (cx, cy).
    rx = max(alpha * w / 2.0, 1e-9)
    ry = max(alpha * h / 2.0, 1e-9)
    yy, xx = np.ogrid[:h, :w]
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def generate_synthetic_mask(width: int, height: int, coverage: float,
                            seed: int) -> np.ndarray:
    """Centered-ellipse foreground mask hitting `coverage` within +/- 0.02.

    The same seed yields the same ellipse center, so masks of increasing
    coverage nest inside each other.
    """
    if not 0.0 < coverage < 1.0:
        raise DomainError(f"coverage must be in (0, 1), got {coverage}")
    stream = SplitMix64(fnv1a64(seed, "mask"))
    cx = width / 2.0 + stream.uniforms(1, -0.02, 0.02)[0] * width
    cy = height / 2.0 + stream.uniforms(1, -0.02, 0.02)[0] * height

    # The clipped-ellipse area is monotone in the axis scale; bisect on it.
    lo, hi = 0.0, 2.0 * math.sqrt(2.0)
    mask = None
    for _ in range(40):
        mid = (lo + hi) / 2.0
        mask = _ellipse_fill(width, height, cx, cy, mid)
        got = mask.mean()
        if abs(got - coverage) <= 0.005:
            break
        if got < coverage:
            lo = mid
        else:
            hi = mid
    return mask
