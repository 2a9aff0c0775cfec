"""Model-backed pair scorers.

Each builder returns a `scorer(ref_path, test_path) -> float` distance. All
heavyweight imports happen inside the builders so that protocol plumbing and
configuration stay importable without torch, and so a missing optional
dependency surfaces as a clean InitError before any handshake is written.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .config import InitError, ProviderConfig


def _resolve_device(requested: str):
    import torch

    if requested == "cpu":
        return torch.device("cpu")
    cuda = torch.cuda.is_available()
    if requested == "accelerator":
        if not cuda:
            raise InitError("no accelerator available on this host")
        return torch.device("cuda")
    return torch.device("cuda" if cuda else "cpu")


def _load_rgb(path) -> Image.Image:
    img = Image.open(path)
    img.load()
    return img.convert("RGB")


def build_lpips(config: ProviderConfig):
    """LPIPS at native resolution; inputs scaled to [-1, 1] per its docs."""
    try:
        import lpips
        import torch
    except ImportError as exc:
        raise InitError(f"lpips backend unavailable: {exc}") from exc
    device = _resolve_device(config.device)
    try:
        model = lpips.LPIPS(net=config.model_variant, verbose=False)
    except Exception as exc:
        raise InitError(f"cannot load LPIPS({config.model_variant!r}): {exc}") from exc
    model = model.to(device).eval()

    def to_tensor(img: Image.Image):
        arr = np.asarray(img, dtype=np.float32) / 127.5 - 1.0
        return torch.from_numpy(arr).permute(2, 0, 1).unsqueeze(0).to(device)

    def score(ref_path, test_path) -> float:
        ref = _load_rgb(ref_path)
        test = _load_rgb(test_path)
        if ref.size != test.size:
            raise ValueError(
                f"size mismatch: ref {ref.size} vs test {test.size}")
        with torch.no_grad():
            return float(model(to_tensor(ref), to_tensor(test)).item())

    return score


def build_dreamsim(config: ProviderConfig):
    """DreamSim with its packaged canonical preprocessing (224px, ViT)."""
    try:
        import torch
        from dreamsim import dreamsim
    except ImportError as exc:
        raise InitError(f"dreamsim backend unavailable: {exc}") from exc
    device = _resolve_device(config.device)
    try:
        model, preprocess = dreamsim(
            pretrained=True, device=str(device),
            dreamsim_type=config.model_variant)
    except Exception as exc:
        raise InitError(
            f"cannot load DreamSim({config.model_variant!r}): {exc}") from exc
    model.eval()

    def score(ref_path, test_path) -> float:
        a = preprocess(_load_rgb(ref_path)).to(device)
        b = preprocess(_load_rgb(test_path)).to(device)
        with torch.no_grad():
            return float(model(a, b).item())

    return score


_BUILDERS = {"lpips": build_lpips, "dreamsim": build_dreamsim}


def build_scorer(config: ProviderConfig):
    return _BUILDERS[config.metric](config)
