import pytest

from qdlab.bitcore import RandomSource


@pytest.fixture
def rng():
    return RandomSource(20240611, 0)
