import warnings

import numpy as np
import pytest

from toric_liouville.lattice_fan import build_fan, pl_from_ray_values, section_polytope


def make(dim, rays, cones, values, r=None):
    return section_polytope(pl_from_ray_values(build_fan(dim, rays, cones), values, r))


SQUARE_RAYS = [(1, 0), (0, 1), (-1, 0), (0, -1)]
SQUARE_CONES = [[0, 1], [1, 2], [2, 3], [3, 0]]
PLANE_RAYS = [(1, 0), (0, 1), (-1, -1)]
PLANE_CONES = [[0, 1], [1, 2], [2, 0]]
PYRAMID_RAYS = [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1), (0, 0, -1)]
PYRAMID_CONES = [[0, 1, 2, 3], [0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]]


@pytest.fixture(scope="session")
def line():
    return make(1, [(1,), (-1,)], [[0], [1]], [-1, -1])


@pytest.fixture(scope="session")
def square():
    return make(2, SQUARE_RAYS, SQUARE_CONES, [-1] * 4)


@pytest.fixture(scope="session")
def skewed():
    return make(2, SQUARE_RAYS, SQUARE_CONES, [-1, -1, -2, -1])


@pytest.fixture(scope="session")
def plane():
    return make(2, PLANE_RAYS, PLANE_CONES, [-1] * 3)


@pytest.fixture(scope="session")
def pyramid():
    return make(3, PYRAMID_RAYS, PYRAMID_CONES, [-1] * 5)


@pytest.fixture(scope="session")
def polytopes(line, square, skewed, plane, pyramid):
    return {"line": line, "square": square, "skewed": skewed, "plane": plane, "pyramid": pyramid}


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance reporting ---------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or (call.when != "call" and call.excinfo is None):
        return
    number, title = marker.args
    passed = call.excinfo is None
    _ACCEPTANCE[number] = (title, passed and _ACCEPTANCE.get(number, (title, True))[1])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{number:2d}] {'PASS' if passed else 'FAIL'}  {title}")
