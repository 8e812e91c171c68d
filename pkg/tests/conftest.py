import functools

import pytest

from gsedtiles import robinson, tm


@functools.lru_cache(maxsize=None)
def tileset(layers=("robinson", "dash"), machine=None):
    cm = compiled(machine) if machine else None
    return robinson.build_tileset(layers, cm)


@functools.lru_cache(maxsize=None)
def compiled(name, n0=None):
    return tm.compile(tm.TOY_MACHINES[name](), n0)


@pytest.fixture(scope="session")
def ts_basic():
    return tileset()


@pytest.fixture(scope="session")
def ts_obs():
    return tileset(("robinson", "dash", "obstruction"))


@pytest.fixture(scope="session")
def tm_tileset():
    return lambda name: tileset(robinson.LAYERS, name)
