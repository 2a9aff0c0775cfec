"""Command-line front end.

Exit codes: 0 success, 1 validation problem (bad arguments, bad manifest,
bad inputs), 2 runtime failure (provider died, I/O error) — including runs
that finish but carry error rows.
"""

from __future__ import annotations

import argparse
import shlex
import sys
from dataclasses import replace
from pathlib import Path

from .corruptions import (
    CORE_KINDS,
    CorruptionKind,
    CorruptionSpec,
    apply_corruption,
    kind_from_name,
)
from .errors import NVSBenchError
from .errors import (
    DimensionMismatch,
    DomainError,
    EmptyTable,
    FormatError,
    GlobalOnlyKind,
    ManifestError,
    MaskMismatch,
    NoData,
    TooSmall,
)
from .harness import (
    RunManifest,
    ScoreRecord,
    load_manifest,
    run_to_directory,
    scan_corpus,
    write_csv,
)
from .imageops import load_image, save_image
from .metrics import BUILTIN_METRICS, compute_builtin, normalize
from .provider_client import provider_open
from .rng import fnv1a64
from .synthesis import generate_test_corpus

_VALIDATION = (ManifestError, DomainError, FormatError, MaskMismatch,
               GlobalOnlyKind, EmptyTable, NoData, TooSmall,
               DimensionMismatch)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; here that is a validation failure -> 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_size(text: str) -> tuple:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise DomainError(f"size must look like 640x480, got {text!r}") from None


def _parse_kinds(text: str) -> tuple:
    if text == "all":
        return tuple(CorruptionKind)
    if text == "core":
        return CORE_KINDS
    return tuple(kind_from_name(k.strip()) for k in text.split(","))


def _parse_severities(text: str) -> tuple:
    if text == "all":
        return tuple(range(21))
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _parse_metrics(text: str) -> tuple:
    """Comma-separated names; ext:"CMD ARGS" entries may hold commas."""
    items, buf, quoted = [], [], False
    for ch in text:
        if ch == '"':
            quoted = not quoted
            buf.append(ch)
        elif ch == "," and not quoted:
            items.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    if buf:
        items.append("".join(buf))

    metrics = []
    for item in items:
        item = item.strip()
        if not item:
            continue
        if item.startswith("ext:"):
            spec = item[4:].strip()
            if len(spec) >= 2 and spec[0] == '"' and spec[-1] == '"':
                spec = spec[1:-1]
            argv = tuple(shlex.split(spec))
            if not argv:
                raise DomainError(f"empty provider command in {item!r}")
            metrics.append(argv)
        else:
            if item not in BUILTIN_METRICS:
                raise DomainError(f"unknown builtin metric {item!r}")
            metrics.append(item)
    if not metrics:
        raise DomainError("at least one metric is required")
    return tuple(metrics)


def _finish_run(manifest: RunManifest) -> int:
    table, summary = run_to_directory(manifest)
    errors = sum(1 for r in table.records if r.error)
    if table.out_of_range:
        print(f"warning: {table.out_of_range} provider values fell outside "
              "their declared range and were clamped", file=sys.stderr)
    print(f"{len(table.records)} records ({errors} errors), "
          f"{len(summary)} summary rows -> {manifest.output_dir}")
    return 2 if errors else 0


def _cmd_gen_corpus(args) -> int:
    w, h = _parse_size(args.size)
    ids = generate_test_corpus(args.out, args.count, w, h, args.seed)
    print(f"wrote {len(ids)} images to {args.out}")
    return 0


def _cmd_corrupt(args) -> int:
    kinds = _parse_kinds(args.kinds)
    severities = _parse_severities(args.severities)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    count = 0
    for image_id, path in scan_corpus(args.in_dir):
        img = load_image(path)
        for kind in kinds:
            for s in severities:
                seed = fnv1a64(args.seed, image_id, kind.value, s)
                result = apply_corruption(
                    img, CorruptionSpec(kind, s, seed))
                name = f"{image_id}__{kind.value}__s{s:02d}.png"
                save_image(result, out_dir / name)
                count += 1
    print(f"wrote {count} corrupted images to {out_dir}")
    return 0


def _cmd_score(args) -> int:
    metrics = _parse_metrics(args.metrics)
    ref_images = scan_corpus(args.ref)
    test_dir = Path(args.test)
    pairs = []
    for image_id, ref_path in ref_images:
        test_path = test_dir / ref_path.name
        if not test_path.is_file():
            raise ManifestError(f"no test image for {image_id}: {test_path}")
        pairs.append((image_id, ref_path, test_path))

    sessions = {}
    records = []
    try:
        for entry in metrics:
            if not isinstance(entry, str):
                sessions[entry] = provider_open(entry)
        for image_id, ref_path, test_path in pairs:
            ref = load_image(ref_path)
            test = load_image(test_path)
            for entry in metrics:
                if isinstance(entry, str):
                    desc = BUILTIN_METRICS[entry]
                    raw = compute_builtin(entry, ref, test)
                    records.append(ScoreRecord(
                        image_id, "", None, None, None, "", entry,
                        raw, normalize(raw, desc)))
                else:
                    session = sessions[entry]
                    raw = session.score(str(ref_path), str(test_path))
                    records.append(ScoreRecord(
                        image_id, "", None, None, None, "",
                        session.descriptor.name, raw,
                        normalize(raw, session.descriptor)))
    finally:
        for session in sessions.values():
            session.close()
    write_csv(records, args.out, kind="raw")
    print(f"wrote {len(records)} scores to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    manifest = load_manifest(args.manifest)
    if args.out:
        manifest = replace(manifest, output_dir=Path(args.out))
    return _finish_run(manifest)


def _cmd_crop_bench(args) -> int:
    manifest = RunManifest(
        corpus_dir=Path(args.in_dir),
        output_dir=Path(args.out),
        metrics=_parse_metrics(args.metrics),
        mode="crop",
        crop_levels=tuple(int(n) for n in args.pixels.split(",")),
        global_seed=args.seed,
    )
    return _finish_run(manifest)


def _cmd_fgbg_bench(args) -> int:
    mask_dir = None
    coverages = ()
    if args.masks.startswith("synthetic:"):
        coverages = tuple(float(c) for c in args.masks[10:].split(","))
    else:
        mask_dir = Path(args.masks)
    manifest = RunManifest(
        corpus_dir=Path(args.in_dir),
        output_dir=Path(args.out),
        metrics=_parse_metrics(args.metrics),
        mode="fgbg",
        corruptions=_parse_kinds(args.kinds),
        severities=_parse_severities(args.severities),
        mask_dir=mask_dir,
        coverages=coverages,
        global_seed=args.seed,
    )
    return _finish_run(manifest)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nvsbench",
                     description="Benchmark full-reference image metrics "
                                 "against render corruptions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="write a deterministic synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--size", default="256x256", help="WxH, default 256x256")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_gen_corpus)

    p = sub.add_parser("corrupt", help="write corrupted copies of a corpus")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kinds", default="core", help="comma list, 'core', or 'all'")
    p.add_argument("--severities", default="all", help="list, A..B ranges, or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_corrupt)

    p = sub.add_parser("score", help="score directory pairs by filename")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--metrics", default="ssim,psnr,mse",
                   help='names and ext:"CMD ARGS" providers, comma separated')
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("bench", help="run a manifest end to end")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="override the manifest output_dir")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("crop-bench", help="border-crop sensitivity sweep")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--pixels", default="1,2,5,10")
    p.add_argument("--metrics", default="ssim,psnr,mse")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_crop_bench)

    p = sub.add_parser("fgbg-bench", help="region-masked corruption sweep")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--masks", required=True,
                   help="mask directory, or synthetic:0.1,0.25,...")
    p.add_argument("--kinds", default="blur")
    p.add_argument("--severities", default="5")
    p.add_argument("--metrics", default="ssim,psnr,mse")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_fgbg_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _VALIDATION as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NVSBenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
