import numpy as np
import pytest

from gesture_synth.dataset import ingest
from gesture_synth.fixtures import data_path
from gesture_synth.library import LibraryConfig, build
from gesture_synth.motion import DEFAULT_SKELETON, MotionClip
from gesture_synth.pipeline import TextModels
from gesture_synth.text import EmbeddingTable, LinearHead


def random_clip(rng, n_frames, fps=25.0, scale=0.3):
    """Rest pose plus a smooth random walk on every joint except the neck."""
    base = DEFAULT_SKELETON.rest_pose()
    steps = rng.normal(0, scale / np.sqrt(n_frames), size=(n_frames, base.shape[0], 3))
    steps[:, 0] = 0.0
    return MotionClip(base + np.cumsum(steps, axis=0), fps)


@pytest.fixture(scope="session")
def fixture_dataset():
    return ingest(data_path("fixture.jsonl"))


@pytest.fixture(scope="session")
def fixture_records(fixture_dataset):
    return fixture_dataset[0]


@pytest.fixture(scope="session")
def table():
    return EmbeddingTable.load(data_path("embeddings.txt"))


@pytest.fixture(scope="session")
def models(table):
    return TextModels(
        table,
        LinearHead.load(data_path("type_head.txt")),
        LinearHead.load(data_path("word_head.txt")),
    )


@pytest.fixture(scope="session")
def fixture_lib(fixture_records, table):
    return build(fixture_records, table, LibraryConfig(seed=0))


@pytest.fixture(scope="session")
def fixture_lib_k4(fixture_records, table):
    return build(fixture_records, table, LibraryConfig(seed=0, k=4))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
