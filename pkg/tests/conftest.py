import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0xBEEF)


@pytest.fixture
def make_image(rng):
    """Factory for seeded random uint8 RGB images."""
    def make(w=64, h=48):
        return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    return make


@pytest.fixture
def textured_image(rng):
    """A single image with gradients and fine detail, for metric trends."""
    h, w = 96, 128
    yy, xx = np.mgrid[0:h, 0:w]
    base = np.stack([
        (xx * 255.0 / (w - 1)),
        (yy * 255.0 / (h - 1)),
        ((xx // 8 + yy // 8) % 2) * 255.0,
    ], axis=-1)
    noise = rng.normal(0.0, 12.0, size=(h, w, 3))
    return np.clip(np.rint(base + noise), 0, 255).astype(np.uint8)


@pytest.fixture
def corpus_dir(tmp_path):
    """A tiny on-disk corpus of three deterministic synthetic images."""
    from nvsbench.synthesis import generate_test_corpus

    out = tmp_path / "corpus"
    generate_test_corpus(out, 3, 64, 64, 1234)
    return out


# --- acceptance checklist -------------------------------------------------
# One line per acceptance criterion in the terminal summary. Results come
# from test_acceptance.CHECKLIST; criteria that never reached their check
# (fixture error, collection problem) are reported from the test outcome.

_criterion_outcomes = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    number = int(name.split("_")[2])
    if report.failed:
        _criterion_outcomes[number] = "FAIL"
    elif report.when == "call" and report.passed:
        _criterion_outcomes.setdefault(number, "PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_outcomes:
        return
    try:
        from test_acceptance import CHECKLIST
    except ImportError:
        CHECKLIST = []
    detail = {number: (status, text) for number, status, text in CHECKLIST}
    terminalreporter.write_sep("-", "acceptance checklist")
    for number in sorted(_criterion_outcomes):
        status, text = detail.get(
            number, (_criterion_outcomes[number], "did not reach its check"))
        terminalreporter.write_line(f"[criterion {number:2d}] {status} - {text}")
