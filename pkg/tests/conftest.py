import numpy as np
import pytest

from ldtf import model
from ldtf.records import Segment


@pytest.fixture(autouse=True)
def verify_attention_rows():
    """Every attention matrix produced anywhere in the suite must have
    nonnegative entries and rows that sum to 1 within 1e-6."""
    failures = []

    def check(weights):
        if np.any(weights < 0):
            failures.append("negative attention weight")
        sums = weights.sum(axis=-1)
        if np.max(np.abs(sums - 1.0)) > 1e-6:
            failures.append(f"attention row sum off by {np.max(np.abs(sums - 1.0)):.2e}")

    model.register_attention_hook(check)
    yield
    model.unregister_attention_hook(check)
    assert not failures, failures[:5]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_segment(rng, n=241, label=0, channels=2):
    from ldtf.aami import AamiClass

    data = rng.normal(size=(channels, n))
    return Segment(data=data, label=AamiClass(label), source=("test", n // 2))


@pytest.fixture
def tiny_config():
    return model.ModelConfig(rows=3, seq_len=5, num_heads=2, num_layers=1,
                             ffb_hidden=7, num_classes=3, dropout=0.0, seed=11)
