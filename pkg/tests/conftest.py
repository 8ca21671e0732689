import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prosit import Engine, read, read_one  # noqa: E402


def load(engine, text, sit=None):
    for form in read(text):
        engine.tell(form, sit)


@pytest.fixture
def engine():
    return Engine()


@pytest.fixture
def run():
    """Build an engine from program text: ``run('(foo a)')``."""
    def make(text=""):
        e = Engine()
        load(e, text)
        return e
    return make


def verdict(engine, text, sit=None):
    return engine.query_dual(read_one(text), sit).verdict.value


def sit_at(engine, path):
    s = engine.store.find_path(path)
    assert s is not None, path
    return s
