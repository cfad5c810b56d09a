import pytest

from helpers import fresh_engine, light_config


@pytest.fixture
def config(tmp_path):
    return light_config(tmp_path)


@pytest.fixture
def engine(tmp_path):
    return fresh_engine(tmp_path)
