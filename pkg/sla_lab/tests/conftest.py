# tests/conftest.py
import logging
from pathlib import Path

import numpy as np
import pytest

from sla_lab.config import settings as _settings
from sla_lab.domain.data import Dataset
from sla_lab.domain.model import BackboneKind, build_model
from sla_lab.infrastructure.idx import write_idx

for name in ("sla_lab.mem",):
    logging.getLogger(name).setLevel(logging.WARNING)

logging.getLogger("sla_lab").setLevel(logging.INFO)

MNIST_FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def digit_like(per_class: int, seed: int, side: int = 6, n_classes: int = 10, templates_seed: int = 99) -> Dataset:
    """Ten noisy prototypes on a ``side x side`` grid, quantised to whole grey levels."""
    templates = np.random.default_rng(templates_seed).uniform(0.0, 1.0, size=(n_classes, side, side))
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(n_classes), per_class)
    rng.shuffle(labels)
    noisy = templates[labels] + 0.1 * rng.standard_normal((labels.size, side, side))
    images = np.rint(np.clip(noisy, 0.0, 1.0) * 255.0) / 255.0
    return Dataset(name="digits", images=images[..., None], labels=labels.astype(np.int64), n_classes=n_classes)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def fake_mnist_dir(tmp_path: Path, monkeypatch) -> Path:
    """MNIST-format files under a fresh ``SLA_DATA_DIR``."""
    data_dir = tmp_path / "data"
    write_idx(digit_like(20, seed=1), data_dir / MNIST_FILES[0], data_dir / MNIST_FILES[1])
    write_idx(digit_like(10, seed=2), data_dir / MNIST_FILES[2], data_dir / MNIST_FILES[3])
    monkeypatch.setenv("SLA_DATA_DIR", str(data_dir))
    monkeypatch.setenv("SLA_RUNS_DIR", str(tmp_path / "runs"))
    _settings.cache_clear()
    yield data_dir
    _settings.cache_clear()


@pytest.fixture(scope="session")
def real_mnist_dir() -> Path:
    data_dir = Path(_settings().data_dir)
    if not all((data_dir / f).exists() or (data_dir / f"{f}.gz").exists() for f in MNIST_FILES):
        pytest.skip(f"MNIST files not found under {data_dir}")
    return data_dir


@pytest.fixture
def make_model():
    """Factory for small random models with the requested heads."""

    def _make(n=3, m=4, heads=("w", "u", "v"), kind=BackboneKind.LINEAR, sizes=(5,), shape=(3, 3, 1), seed=0):
        return build_model(shape, kind, list(sizes), n, m, set(heads), seed)

    return _make
