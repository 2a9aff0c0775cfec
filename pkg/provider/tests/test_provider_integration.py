"""The provider loop driven by the benchmark's own subprocess client.

These tests put a real provider process (the torch-free stub) on the other
end of the pipe that the benchmarking package uses for external metrics, so
both halves of the line protocol are exercised against each other: spawn,
handshake validation, scoring, per-request errors, and shutdown — then a
whole benchmark run whose external column can be recomputed exactly.
"""

import numpy as np
import pytest

from nvsbench.corruptions import CorruptionKind
from nvsbench.errors import ProviderError
from nvsbench.harness import RunManifest, aggregate_median, run_benchmark
from nvsbench.metrics import normalize
from nvsbench.provider_client import provider_open
from nvsbench.synthesis import generate_test_corpus
from stub_provider import stub_cmd


def test_handshake_descriptor_round_trip():
    with provider_open(stub_cmd()) as session:
        descriptor = session.descriptor
    assert descriptor.name == "stub:absdiff"
    assert descriptor.orientation == "distance"
    assert descriptor.raw_range == (0.0, 1.0)
    assert not descriptor.builtin


def test_identical_pair_scores_zero_distance(png_pair, write_png):
    ref, _, ref_pixels, _ = png_pair
    twin = write_png("twin.png", ref_pixels)
    with provider_open(stub_cmd()) as session:
        assert session.score(str(ref), str(twin)) == 0.0


def test_score_matches_recomputed_mean_absolute_difference(png_pair):
    ref, test, ref_pixels, test_pixels = png_pair
    expected = float(np.mean(np.abs(
        ref_pixels.astype(np.float64) - test_pixels.astype(np.float64))) / 255.0)
    with provider_open(stub_cmd()) as session:
        value = session.score(str(ref), str(test))
    assert value == pytest.approx(expected, abs=1e-12)


def test_normalized_external_is_one_minus_distance(png_pair):
    ref, test, _, _ = png_pair
    with provider_open(stub_cmd()) as session:
        value = session.score(str(ref), str(test))
        got = normalize(value, session.descriptor)
    assert got == pytest.approx(1.0 - value, abs=1e-12)


def test_missing_file_raises_but_session_survives(png_pair, tmp_path):
    ref, test, _, _ = png_pair
    with provider_open(stub_cmd()) as session:
        with pytest.raises(ProviderError, match="file not found"):
            session.score(str(tmp_path / "ghost.png"), str(test))
        assert session.score(str(ref), str(ref)) == 0.0


def test_size_mismatch_raises_per_request(png_pair, write_png):
    ref, _, _, _ = png_pair
    small = write_png("small.png", np.zeros((8, 8, 3), dtype=np.uint8))
    with provider_open(stub_cmd()) as session:
        with pytest.raises(ProviderError, match="size mismatch"):
            session.score(str(ref), str(small))


def test_clean_shutdown_exits_zero():
    session = provider_open(stub_cmd())
    assert session.alive
    assert session.close() == 0


def test_benchmark_run_with_stub_external_metric(tmp_path):
    corpus = tmp_path / "corpus"
    generate_test_corpus(corpus, 2, 48, 48, 77)
    manifest = RunManifest(
        corpus_dir=corpus,
        output_dir=tmp_path / "out",
        metrics=("mse", stub_cmd()),
        corruptions=(CorruptionKind.BRIGHTNESS,),
        severities=(0, 4),
        global_seed=5,
        parallelism=1,
    )
    table = run_benchmark(manifest)

    external = [r for r in table.records if r.metric == "stub:absdiff"]
    assert len(external) == 4
    assert all(r.error == "" for r in external)
    by_key = {(r.image_id, r.severity): r for r in external}
    for image_id in ("img_0000", "img_0001"):
        pristine = by_key[(image_id, 0)]
        bright = by_key[(image_id, 4)]
        assert pristine.raw == 0.0
        assert pristine.normalized == 1.0
        assert 0.0 < bright.raw <= 1.0
        assert bright.normalized == pytest.approx(1.0 - bright.raw)

    rows = {(s.metric, s.axis_value): s
            for s in aggregate_median(table)}
    assert rows[("stub:absdiff", 0)].median_normalized == 1.0
    assert rows[("stub:absdiff", 4)].median_normalized < 1.0
    assert rows[("stub:absdiff", 4)].n == 2
    assert rows[("stub:absdiff", 4)].errors == 0


def test_benchmark_raw_scores_match_a_hand_driven_session(tmp_path):
    """Harness cells equal scores obtained over a manually driven session."""
    corpus = tmp_path / "corpus"
    generate_test_corpus(corpus, 3, 32, 32, 9)
    manifest = RunManifest(
        corpus_dir=corpus,
        output_dir=tmp_path / "out",
        metrics=(stub_cmd(),),
        corruptions=(CorruptionKind.GAUSSIAN_NOISE,),
        severities=(6,),
        global_seed=2,
        parallelism=1,
    )
    table = run_benchmark(manifest)

    from nvsbench.corruptions import CorruptionSpec, apply_corruption
    from nvsbench.imageops import load_image, save_image
    from nvsbench.rng import fnv1a64

    with provider_open(stub_cmd()) as session:
        for record in sorted(table.records, key=lambda r: r.image_id):
            source = corpus / f"{record.image_id}.png"
            spec = CorruptionSpec(
                kind=CorruptionKind.GAUSSIAN_NOISE, severity=6,
                seed=fnv1a64(2, record.image_id, "gaussian_noise", 6))
            rendered = tmp_path / f"{record.image_id}_s6.png"
            save_image(apply_corruption(load_image(source), spec), rendered)
            expected = session.score(str(source), str(rendered))
            assert record.raw == pytest.approx(expected, abs=1e-12)
