import os
import sys

import pytest

# Add the repository root to path for `src` imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config_loader import reset_config  # noqa: E402
from src.graph.generators import complete, cycle  # noqa: E402
from src.graph.core import lazify  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test starts from the repository defaults."""
    yield reset_config()
    reset_config()


@pytest.fixture
def c4():
    return cycle(4)


@pytest.fixture
def k4():
    return complete(4)


@pytest.fixture
def lazy_c4():
    return lazify(cycle(4), 0.5)
