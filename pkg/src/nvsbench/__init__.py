"""Benchmark toolkit for full-reference quality metrics under render corruptions."""

from .corruptions import (
    CORE_KINDS,
    CorruptionKind,
    CorruptionSpec,
    apply_corruption,
    apply_masked_corruption,
    contrast_factor,
    crop_and_rescale,
    kind_from_name,
    load_mask,
    mask_coverage,
    save_mask,
)
from .errors import (
    DimensionMismatch,
    DomainError,
    EmptyTable,
    FormatError,
    GlobalOnlyKind,
    HandshakeError,
    ManifestError,
    MaskMismatch,
    NVSBenchError,
    NoData,
    ProtocolError,
    ProviderError,
    ProviderTimeout,
    SpawnError,
    TooSmall,
)
from .harness import (
    RunManifest,
    ScoreRecord,
    ScoreTable,
    SummaryRow,
    aggregate_median,
    load_manifest,
    run_benchmark,
    write_csv,
)
from .imageops import load_image, save_image, to_luma
from .metrics import (
    BUILTIN_METRICS,
    MetricDescriptor,
    compute_builtin,
    mse,
    normalize,
    psnr,
    ssim,
)
from .plotting import emit_plot
from .provider_client import ProviderSession, provider_open
from .rng import SplitMix64, fnv1a64
from .synthesis import generate_synthetic_mask, generate_test_corpus

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_METRICS",
    "CORE_KINDS",
    "CorruptionKind",
    "CorruptionSpec",
    "DimensionMismatch",
    "DomainError",
    "EmptyTable",
    "FormatError",
    "GlobalOnlyKind",
    "HandshakeError",
    "ManifestError",
    "MaskMismatch",
    "MetricDescriptor",
    "NVSBenchError",
    "NoData",
    "ProtocolError",
    "ProviderError",
    "ProviderSession",
    "ProviderTimeout",
    "RunManifest",
    "ScoreRecord",
    "ScoreTable",
    "SpawnError",
    "SplitMix64",
    "SummaryRow",
    "TooSmall",
    "aggregate_median",
    "apply_corruption",
    "apply_masked_corruption",
    "compute_builtin",
    "contrast_factor",
    "crop_and_rescale",
    "emit_plot",
    "fnv1a64",
    "generate_synthetic_mask",
    "generate_test_corpus",
    "kind_from_name",
    "load_image",
    "load_manifest",
    "load_mask",
    "mask_coverage",
    "mse",
    "normalize",
    "provider_open",
    "psnr",
    "run_benchmark",
    "save_image",
    "save_mask",
    "ssim",
    "to_luma",
    "write_csv",
]
