import shutil

import pytest

import semiograph
from semiograph.workspace import load_workspace


@pytest.fixture(scope="session")
def memomines_ws():
    return load_workspace(semiograph.sample_workspace("memomines"))


@pytest.fixture(scope="session")
def language_ws():
    return load_workspace(semiograph.sample_workspace("language"))


@pytest.fixture()
def tmp_memomines(tmp_path):
    """Writable copy of the memomines workspace."""
    dst = tmp_path / "memomines"
    shutil.copytree(semiograph.sample_workspace("memomines"), dst)
    return dst


@pytest.fixture()
def tmp_language(tmp_path):
    dst = tmp_path / "language"
    shutil.copytree(semiograph.sample_workspace("language"), dst)
    return dst
