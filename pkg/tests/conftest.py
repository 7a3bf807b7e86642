import pytest

from sepfilt.filtration import SeparationConfig, build_filtration
from sepfilt.generators import circle, genus_surface, torus


@pytest.fixture(scope="session")
def circle8():
    return circle(8, 4.0)


@pytest.fixture(scope="session")
def circle8_geom(circle8):
    return circle8.geometry(1)


@pytest.fixture(scope="session")
def torus4():
    return torus(4)


@pytest.fixture(scope="session")
def torus4_d1(torus4):
    return torus4.geometry(1)


@pytest.fixture(scope="session")
def torus4_d2(torus4):
    return torus4.geometry(2)


@pytest.fixture(scope="session")
def torus3():
    return torus(3)


@pytest.fixture(scope="session")
def genus2():
    return genus_surface(2)


@pytest.fixture(scope="session")
def circle_filtration(circle8_geom):
    config = SeparationConfig(
        radius=1.0, epsilon=0.05, move_budget=10, rng_seed=0, subdivision_depth=1
    )
    return build_filtration(circle8_geom, config)


@pytest.fixture(scope="session")
def torus_filtration_d1(torus4_d1):
    config = SeparationConfig(
        radius=1.1, epsilon=0.05, move_budget=15, rng_seed=3, subdivision_depth=1
    )
    return build_filtration(torus4_d1, config)


@pytest.fixture(scope="session")
def torus_filtration_d2(torus4_d2):
    # the acceptance fixture: side 4, R = 1, depth 2
    config = SeparationConfig(
        radius=1.0, epsilon=0.05, move_budget=40, rng_seed=7, subdivision_depth=2
    )
    return build_filtration(torus4_d2, config)


@pytest.fixture(scope="session")
def tiny_torus():
    # rescaled so the whole complex sits far inside one unit ball
    return torus(4, scale=0.15)


@pytest.fixture(scope="session")
def tiny_torus_filtration(tiny_torus):
    config = SeparationConfig(
        radius=1.0, epsilon=0.01, move_budget=5, rng_seed=1, subdivision_depth=2
    )
    return build_filtration(tiny_torus.geometry(2), config)
