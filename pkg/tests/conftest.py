import pytest

from fareanon.config import AnonymizationConfig

TEST_KEY = bytes(range(32))


@pytest.fixture
def key():
    return TEST_KEY


@pytest.fixture
def config():
    return AnonymizationConfig(secret_key=TEST_KEY, run_seed=7)
