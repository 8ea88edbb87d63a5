import sys

import pytest

from wdlbp.harness.config import PipelineConfig
from wdlbp.harness.manifest import load_manifest
from wdlbp.harness.pipeline import load_samples
from wdlbp.harness.synth import SynthConfig, write_dataset


@pytest.fixture(scope="session")
def synth_manifest_path(tmp_path_factory):
    """Default synthetic dataset: 10 subjects x 10 images, 5 train / 5 test each."""
    return write_dataset(tmp_path_factory.mktemp("synth"), SynthConfig())


@pytest.fixture(scope="session")
def synth_manifest(synth_manifest_path):
    return load_manifest(synth_manifest_path)


@pytest.fixture(scope="session")
def synth_samples(synth_manifest):
    cfg = PipelineConfig()
    return load_samples(synth_manifest.train, cfg), load_samples(synth_manifest.test, cfg)


@pytest.fixture(scope="session")
def small_manifest_path(tmp_path_factory):
    """Tiny dataset for fast CLI and persistence tests."""
    cfg = SynthConfig(subjects=3, images_per_subject=4, train_per_subject=2, seed=3)
    return write_dataset(tmp_path_factory.mktemp("small"), cfg)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance"):
            lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
