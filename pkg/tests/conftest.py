import csv

import numpy as np
import pytest

from dskf.partition import Partition


def nested_reference(name: str) -> Partition:
    """Reference partitions of 50 samples around the cluster c = samples 0..19.

    pi1 has c as a cluster, pi2 splits c into 15 + 5, pi3..pi5 hold c inside
    a cluster of 35, 40 or 45 samples.
    """
    layouts = {
        "pi1": [20, 30],
        "pi2": [15, 5, 30],
        "pi3": [35, 15],
        "pi4": [40, 10],
        "pi5": [45, 5],
    }
    labels = np.concatenate([np.full(s, i + 1) for i, s in enumerate(layouts[name])])
    return Partition(labels)


def _write_sklearn_csv(path, bunch):
    names = [f"f{i}" for i in range(bunch.data.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["class"])
        for row, target in zip(bunch.data, bunch.target):
            w.writerow([repr(float(v)) for v in row] + [bunch.target_names[target]])
    return path


@pytest.fixture(scope="session")
def iris_csv(tmp_path_factory):
    datasets = pytest.importorskip("sklearn.datasets")
    return _write_sklearn_csv(tmp_path_factory.mktemp("data") / "iris.csv", datasets.load_iris())


@pytest.fixture(scope="session")
def wine_csv(tmp_path_factory):
    datasets = pytest.importorskip("sklearn.datasets")
    return _write_sklearn_csv(tmp_path_factory.mktemp("data") / "wine.csv", datasets.load_wine())


@pytest.fixture
def blobs():
    """Two tight, far-apart groups of 10 points in 2-D."""
    rng = np.random.default_rng(7)
    a = rng.normal(0.0, 0.1, size=(10, 2))
    b = rng.normal(10.0, 0.1, size=(10, 2))
    return np.vstack([a, b])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
