import numpy as np
import pytest

import ghdsim


@pytest.fixture(scope="session")
def demo_doc():
    doc, diags = ghdsim.load_scene(ghdsim.asset_path("demo.scene"))
    assert doc is not None, diags
    return doc


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
