"""Declarative benchmark runs over an image corpus.

A manifest names a corpus, a corruption matrix, and a metric set; the run
scores every cell of the cross product against the pristine reference,
aggregates per-axis medians, and leaves raw.csv / summary.csv / SVG plots
behind. Equal manifest and seed give byte-identical outputs at any worker
count: every cell derives its own seed, and all emission is sorted.
"""

from __future__ import annotations

import json
import math
import os
import queue
import shutil
import statistics
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .corruptions import (
    CORE_KINDS,
    CorruptionKind,
    CorruptionSpec,
    apply_corruption,
    apply_masked_corruption,
    crop_and_rescale,
    kind_from_name,
    load_mask,
)
from .errors import (
    DomainError,
    EmptyTable,
    ManifestError,
    NVSBenchError,
    ProtocolError,
    ProviderError,
    ProviderTimeout,
)
from .imageops import load_image, save_image
from .metrics import (
    BUILTIN_METRICS,
    MetricDescriptor,
    compute_builtin,
    in_declared_range,
    normalize,
)
from .provider_client import provider_open
from .rng import fnv1a64
from .synthesis import generate_synthetic_mask

MODES = ("global", "fgbg", "crop")
MAX_SEVERITY = 20
CROP_KIND = "crop"
REGION_FG = "foreground"
REGION_BG = "background"
PARALLELISM_ENV = "NVSBENCH_PARALLELISM"

RAW_COLUMNS = ("image_id", "kind", "severity", "crop_pixels", "coverage",
               "region", "metric", "raw", "normalized", "error")
SUMMARY_COLUMNS = ("kind", "axis_name", "axis_value", "region", "metric",
                   "median_normalized", "n", "errors")


@dataclass(frozen=True)
class RunManifest:
    """Everything a benchmark run depends on, in one value."""

    corpus_dir: Path
    output_dir: Path
    metrics: tuple = ("ssim", "psnr", "mse")  # names or external argv tuples
    mode: str = "global"
    corruptions: tuple = CORE_KINDS
    severities: tuple = tuple(range(MAX_SEVERITY + 1))
    crop_levels: tuple = ()
    mask_dir: Path | None = None
    coverages: tuple = ()
    global_seed: int = 0
    parallelism: int | None = None  # None = one worker per CPU


@dataclass(frozen=True)
class ScoreRecord:
    """One scored (or failed) matrix cell."""

    image_id: str
    kind: str
    severity: int | None
    crop_pixels: int | None
    coverage: float | None
    region: str
    metric: str
    raw: float | None
    normalized: float | None
    error: str = ""


@dataclass
class ScoreTable:
    """All records of one run plus the axis they vary along."""

    records: list
    axis_name: str  # severity | crop_pixels | coverage
    out_of_range: int = 0  # external raw values outside their declared range


@dataclass(frozen=True)
class SummaryRow:
    kind: str
    axis_name: str
    axis_value: float  # int-valued for severity / crop_pixels
    region: str
    metric: str
    median_normalized: float | None  # None when every cell in the group failed
    n: int
    errors: int


# ---------------------------------------------------------------------------
# Manifest loading and validation
# ---------------------------------------------------------------------------

def _manifest_schema() -> dict:
    text = resources.files("nvsbench").joinpath(
        "schemas/manifest.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_manifest(path) -> RunManifest:
    """Parse and validate a manifest JSON file.

    Relative paths inside the file resolve against the file's directory.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, _manifest_schema())
    except jsonschema.ValidationError as exc:
        raise ManifestError(f"manifest {path}: {exc.message}") from exc
    return manifest_from_dict(data, base_dir=path.parent)


def manifest_from_dict(data: dict, base_dir=".") -> RunManifest:
    base = Path(base_dir)

    def respath(value):
        p = Path(value)
        return p if p.is_absolute() else base / p

    kinds = data.get("corruptions", "core")
    if kinds == "all":
        kinds = tuple(CorruptionKind)
    elif kinds == "core":
        kinds = CORE_KINDS
    else:
        try:
            kinds = tuple(kind_from_name(k) for k in kinds)
        except DomainError as exc:
            raise ManifestError(str(exc)) from exc

    severities = data.get("severities", "all")
    if severities == "all":
        severities = tuple(range(MAX_SEVERITY + 1))
    else:
        severities = tuple(int(s) for s in severities)

    metrics = []
    for entry in data.get("metrics", ["ssim", "psnr", "mse"]):
        if isinstance(entry, str):
            metrics.append(entry)
        else:
            metrics.append(tuple(str(a) for a in entry["command"]))

    mask_dir = None
    coverages = ()
    source = data.get("mask_source")
    if source is not None:
        if "directory" in source:
            mask_dir = respath(source["directory"])
        else:
            coverages = tuple(float(c) for c in source["synthetic"])

    parallelism = data.get("parallelism", "auto")
    if parallelism == "auto":
        parallelism = None

    manifest = RunManifest(
        corpus_dir=respath(data["corpus_dir"]),
        output_dir=respath(data["output_dir"]),
        metrics=tuple(metrics),
        mode=data.get("mode", "global"),
        corruptions=kinds,
        severities=severities,
        crop_levels=tuple(int(n) for n in data.get("crop_levels", ())),
        mask_dir=mask_dir,
        coverages=coverages,
        global_seed=int(data.get("global_seed", 0)),
        parallelism=parallelism,
    )
    validate_manifest(manifest)
    return manifest


def scan_corpus(corpus_dir) -> list:
    """Sorted (image_id, path) pairs for every .png/.ppm in the directory."""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise ManifestError(f"corpus directory {corpus_dir} does not exist")
    files = sorted(p for p in corpus_dir.iterdir()
                   if p.suffix.lower() in (".png", ".ppm"))
    if not files:
        raise ManifestError(f"corpus directory {corpus_dir} holds no .png/.ppm")
    return [(p.stem, p) for p in files]


def validate_manifest(m: RunManifest) -> None:
    if m.mode not in MODES:
        raise ManifestError(f"mode must be one of {MODES}, got {m.mode!r}")
    if not m.metrics:
        raise ManifestError("at least one metric is required")
    names = [e for e in m.metrics if isinstance(e, str)]
    for name in names:
        if name not in BUILTIN_METRICS:
            raise ManifestError(f"unknown builtin metric {name!r}")
    if len(set(names)) != len(names):
        raise ManifestError("duplicate metric names in manifest")

    if m.mode == "crop":
        if not m.crop_levels:
            raise ManifestError("crop mode requires crop_levels")
        for n in m.crop_levels:
            if n < 0:
                raise ManifestError(f"crop level {n} is negative")
        if len(set(m.crop_levels)) != len(m.crop_levels):
            raise ManifestError("duplicate crop levels")
        return

    if not m.corruptions:
        raise ManifestError("at least one corruption kind is required")
    if len(set(m.corruptions)) != len(m.corruptions):
        raise ManifestError("duplicate corruption kinds")
    if not m.severities:
        raise ManifestError("at least one severity is required")
    for s in m.severities:
        if not 0 <= s <= MAX_SEVERITY:
            raise ManifestError(f"severity {s} outside [0, {MAX_SEVERITY}]")
    if len(set(m.severities)) != len(m.severities):
        raise ManifestError("duplicate severities")

    if m.mode == "fgbg":
        for kind in m.corruptions:
            if kind.global_only:
                raise ManifestError(
                    f"{kind.value} cannot run region-masked (whole-frame kind)")
        have_dir = m.mask_dir is not None
        have_cov = bool(m.coverages)
        if have_dir == have_cov:
            raise ManifestError(
                "fgbg mode needs exactly one mask source: a directory or "
                "a synthetic coverage list")
        if have_cov:
            for c in m.coverages:
                if not 0.0 < c < 1.0:
                    raise ManifestError(f"coverage {c} outside (0, 1)")
            if len(set(m.coverages)) != len(m.coverages):
                raise ManifestError("duplicate coverages")
            if len(m.severities) != 1:
                raise ManifestError(
                    "synthetic-coverage fgbg runs sweep coverage, so exactly "
                    "one severity must be given")


def _resolve_parallelism(m: RunManifest) -> int:
    env = os.environ.get(PARALLELISM_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ManifestError(
                f"{PARALLELISM_ENV}={env!r} is not an integer") from None
    elif m.parallelism is not None:
        value = m.parallelism
    else:
        value = os.cpu_count() or 1
    if value < 1:
        raise ManifestError(f"parallelism must be >= 1, got {value}")
    return value


# ---------------------------------------------------------------------------
# The run itself
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Variant:
    """One corrupted rendition to score with every metric."""

    index: int
    image_id: str
    image_path: Path
    kind: str
    severity: int | None = None
    crop_pixels: int | None = None
    coverage: float | None = None
    region: str = ""
    seed: int = 0


def _plan(m: RunManifest, images) -> tuple:
    """Deterministic variant list plus the table's axis name."""
    variants = []
    idx = 0

    def add(**kw):
        nonlocal idx
        variants.append(_Variant(index=idx, **kw))
        idx += 1

    if m.mode == "crop":
        for image_id, path in images:
            for n in sorted(m.crop_levels):
                add(image_id=image_id, image_path=path, kind=CROP_KIND,
                    crop_pixels=n)
        return variants, "crop_pixels"

    if m.mode == "global":
        for image_id, path in images:
            for kind in m.corruptions:
                for s in sorted(m.severities):
                    add(image_id=image_id, image_path=path, kind=kind.value,
                        severity=s,
                        seed=fnv1a64(m.global_seed, image_id, kind.value, s))
        return variants, "severity"

    # fgbg: axis is coverage for synthetic masks, severity for directory masks.
    synthetic = bool(m.coverages)
    for image_id, path in images:
        for kind in m.corruptions:
            for s in sorted(m.severities):
                seed = fnv1a64(m.global_seed, image_id, kind.value, s)
                points = sorted(m.coverages) if synthetic else [None]
                for cov in points:
                    for region in (REGION_FG, REGION_BG):
                        add(image_id=image_id, image_path=path,
                            kind=kind.value, severity=s, coverage=cov,
                            region=region, seed=seed)
    return variants, ("coverage" if synthetic else "severity")


def _prepare_masks(m: RunManifest, refs) -> dict:
    """Foreground masks keyed by (image_id, coverage-or-None)."""
    masks = {}
    if m.mode != "fgbg":
        return masks
    shapes = {image_id: img.shape[:2] for image_id, img in refs.items()}
    if m.mask_dir is not None:
        for image_id in sorted(refs):
            mask_path = Path(m.mask_dir) / f"{image_id}.png"
            if not mask_path.is_file():
                raise ManifestError(f"no mask for {image_id}: {mask_path}")
            mask = load_mask(mask_path)
            if mask.shape != shapes[image_id]:
                raise ManifestError(
                    f"mask {mask_path} shape {mask.shape} does not match "
                    f"image {shapes[image_id]}")
            masks[(image_id, None)] = mask
    else:
        for image_id in sorted(refs):
            h, w = shapes[image_id]
            mask_seed = fnv1a64(m.global_seed, image_id, "mask")
            for cov in m.coverages:
                masks[(image_id, cov)] = generate_synthetic_mask(
                    w, h, cov, mask_seed)
    return masks


def _render_variant(ref, v: _Variant, masks):
    if v.kind == CROP_KIND:
        return crop_and_rescale(ref, v.crop_pixels)
    spec = CorruptionSpec(kind_from_name(v.kind), v.severity, v.seed)
    if not v.region:
        return apply_corruption(ref, spec)
    fg = masks[(v.image_id, v.coverage)]
    mask = fg if v.region == REGION_FG else ~fg
    return apply_masked_corruption(ref, mask, spec)


def run_benchmark(manifest: RunManifest) -> ScoreTable:
    """Score the manifest's full (image x corruption x metric) cross product.

    Provider failures on individual pairs become error rows; only a failed
    spawn or handshake aborts the run.
    """
    validate_manifest(manifest)
    images = scan_corpus(manifest.corpus_dir)
    workers = _resolve_parallelism(manifest)
    refs = {image_id: load_image(path) for image_id, path in images}
    masks = _prepare_masks(manifest, refs)
    variants, axis_name = _plan(manifest, images)

    external_cmds = [e for e in manifest.metrics if not isinstance(e, str)]
    pools = {}
    all_sessions = []
    tmp_dir = None
    try:
        taken = set(e for e in manifest.metrics if isinstance(e, str))
        for cmd in external_cmds:
            pool = queue.Queue()
            for _ in range(workers):
                session = provider_open(cmd)
                all_sessions.append(session)
                pool.put(session)
            name = all_sessions[-1].descriptor.name
            if name in taken:
                raise ManifestError(
                    f"metric name {name!r} of provider {cmd} collides with "
                    "another metric in this run")
            taken.add(name)
            pools[cmd] = pool
        if external_cmds:
            tmp_dir = Path(tempfile.mkdtemp(prefix="nvsbench-"))

        counters = {"out_of_range": 0}

        def score_variant(v: _Variant) -> list:
            ref = refs[v.image_id]
            test = _render_variant(ref, v, masks)
            test_path = None
            if external_cmds:
                test_path = tmp_dir / f"v{v.index:08d}.png"
                save_image(test, test_path)
            out = []

            def record(metric_name, raw=None, normalized=None, error=""):
                out.append(ScoreRecord(
                    image_id=v.image_id, kind=v.kind, severity=v.severity,
                    crop_pixels=v.crop_pixels, coverage=v.coverage,
                    region=v.region, metric=metric_name, raw=raw,
                    normalized=normalized, error=error))

            for entry in manifest.metrics:
                if isinstance(entry, str):
                    desc = BUILTIN_METRICS[entry]
                    try:
                        raw = compute_builtin(entry, ref, test)
                    except NVSBenchError as exc:
                        record(entry, error=f"{type(exc).__name__}: {exc}")
                        continue
                    record(entry, raw, normalize(raw, desc))
                else:
                    pool = pools[entry]
                    session = pool.get()
                    try:
                        desc = session.descriptor
                        raw = session.score(str(v.image_path), str(test_path))
                    except (ProviderError, ProtocolError,
                            ProviderTimeout) as exc:
                        record(desc.name,
                               error=f"{type(exc).__name__}: {exc}")
                        continue
                    finally:
                        pool.put(session)
                    if not in_declared_range(raw, desc):
                        counters["out_of_range"] += 1
                    record(desc.name, raw, normalize(raw, desc))
            if test_path is not None:
                test_path.unlink(missing_ok=True)
            return out

        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(score_variant, v) for v in variants]
            results = [f.result() for f in futures]
    finally:
        for session in all_sessions:
            session.close()
        if tmp_dir is not None:
            shutil.rmtree(tmp_dir, ignore_errors=True)

    records = [r for recs in results for r in recs]
    expected = len(variants) * len(manifest.metrics)
    if len(records) != expected:
        raise RuntimeError(
            f"internal accounting error: {len(records)} records for "
            f"{expected} cells")
    records.sort(key=_record_sort_key)
    return ScoreTable(records, axis_name, counters["out_of_range"])


def _record_sort_key(r: ScoreRecord):
    return (r.kind, r.metric,
            r.severity if r.severity is not None else -1,
            r.crop_pixels if r.crop_pixels is not None else -1,
            r.coverage if r.coverage is not None else -1.0,
            r.region, r.image_id)


# ---------------------------------------------------------------------------
# Aggregation and emission
# ---------------------------------------------------------------------------

def _axis_value(r: ScoreRecord, axis_name: str):
    if axis_name == "severity":
        return r.severity
    if axis_name == "crop_pixels":
        return r.crop_pixels
    return r.coverage


def aggregate_median(table: ScoreTable) -> list:
    """Per-(kind, axis, region, metric) medians of normalized scores.

    Error rows are excluded from the median but surface in the `errors`
    count; a group with no surviving cells keeps n = 0 and no median.
    """
    if not table.records:
        raise EmptyTable("no records to aggregate")
    groups = {}
    for r in table.records:
        key = (r.kind, _axis_value(r, table.axis_name), r.region, r.metric)
        groups.setdefault(key, []).append(r)
    rows = []
    for (kind, axis_value, region, metric), recs in groups.items():
        values = [r.normalized for r in recs if not r.error]
        errors = len(recs) - len(values)
        median = statistics.median(values) if values else None
        rows.append(SummaryRow(kind=kind, axis_name=table.axis_name,
                               axis_value=axis_value, region=region,
                               metric=metric, median_normalized=median,
                               n=len(values), errors=errors))
    rows.sort(key=lambda s: (s.kind, s.metric, s.axis_value, s.region))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_csv(rows, path, kind: str | None = None) -> None:
    """RFC-4180 CSV with CRLF line ends; byte-identical for identical rows.

    `kind` picks the schema ("raw" or "summary"); inferred from the first
    row when omitted, defaulting to "summary" for an empty list.
    """
    import csv

    if kind is None:
        if rows and isinstance(rows[0], ScoreRecord):
            kind = "raw"
        else:
            kind = "summary"
    if kind not in ("raw", "summary"):
        raise DomainError(f"unknown csv schema {kind!r}")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        if kind == "raw":
            writer.writerow(RAW_COLUMNS)
            for r in rows:
                writer.writerow([
                    r.image_id, r.kind, _fmt(r.severity), _fmt(r.crop_pixels),
                    _fmt(r.coverage), r.region, r.metric, _fmt(r.raw),
                    _fmt(r.normalized), r.error,
                ])
        else:
            writer.writerow(SUMMARY_COLUMNS)
            for s in rows:
                writer.writerow([
                    s.kind, s.axis_name, _fmt(s.axis_value), s.region,
                    s.metric, _fmt(s.median_normalized), s.n, s.errors,
                ])


def run_to_directory(manifest: RunManifest):
    """Run a manifest and write raw.csv, summary.csv, and plots/<kind>.svg.

    Returns (table, summary rows); callers decide exit behavior from
    the error rows.
    """
    from .plotting import emit_plot

    table = run_benchmark(manifest)
    summary = aggregate_median(table)
    out = Path(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(table.records, out / "raw.csv", kind="raw")
    write_csv(summary, out / "summary.csv", kind="summary")
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    for kind in sorted({s.kind for s in summary}):
        emit_plot(summary, kind, plots / f"{kind}.svg")
    return table, summary
