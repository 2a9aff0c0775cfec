"""Provider configuration: which metric, which checkpoint, which device."""

from __future__ import annotations

from dataclasses import dataclass

METRICS = ("lpips", "dreamsim")
DEVICES = ("auto", "cpu", "accelerator")

# Each project's published default checkpoint.
_DEFAULT_VARIANTS = {"lpips": "alex", "dreamsim": "ensemble"}


class InitError(RuntimeError):
    """Unrecoverable startup failure (missing package, weights, device)."""


def default_variant(metric: str) -> str:
    return _DEFAULT_VARIANTS[metric]


@dataclass(frozen=True)
class ProviderConfig:
    metric: str
    device: str = "auto"
    model_variant: str = ""

    def __post_init__(self):
        if self.metric not in METRICS:
            raise InitError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.device not in DEVICES:
            raise InitError(f"device must be one of {DEVICES}, got {self.device!r}")
        if not self.model_variant:
            object.__setattr__(self, "model_variant",
                               default_variant(self.metric))

    @property
    def handshake_name(self) -> str:
        """Metric plus checkpoint variant, e.g. "dreamsim:ensemble"."""
        return f"{self.metric}:{self.model_variant}"
