import pytest

from franson import RandomSource, chain_settings


@pytest.fixture
def chain4():
    return chain_settings(4)


@pytest.fixture
def chain6():
    return chain_settings(6)


@pytest.fixture
def rs():
    return RandomSource(seed=12345)
