# conftest.py

import os

import pytest

from src.character_engine import CharacterTableSlice


def pytest_collection_modifyitems(config, items):
    if os.getenv('SYMCHAR_RUN_SLOW') == '1':
        return
    skip_slow = pytest.mark.skip(reason="long exact sweep; set SYMCHAR_RUN_SLOW=1")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def engine():
    """A fresh character cache, independent of the shared one."""
    return CharacterTableSlice()


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    target = tmp_path / 'cache'
    monkeypatch.setenv('SYMCHAR_CACHE_DIR', str(target))
    return target
