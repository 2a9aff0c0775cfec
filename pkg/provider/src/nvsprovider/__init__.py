"""Neural full-reference metrics served over the jsonl-v1 provider protocol."""

from .config import DEVICES, METRICS, InitError, ProviderConfig, default_variant
from .serve import Descriptor, serve_loop

__all__ = [
    "DEVICES",
    "Descriptor",
    "InitError",
    "METRICS",
    "ProviderConfig",
    "default_variant",
    "serve_loop",
]

__version__ = "0.1.0"
