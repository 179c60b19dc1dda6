import os

import numpy as np
import pytest

from capteamcli.tensorcore import RngStream


def pytest_collection_modifyitems(config, items):
    if os.getenv("CAPTEAM_RUN_SLOW", "").strip() == "1":
        return
    skip_slow = pytest.mark.skip(reason="set CAPTEAM_RUN_SLOW=1 to run learning checks")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def generator():
    return np.random.default_rng(2024)
