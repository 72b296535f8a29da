import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from symshape.mesh import Mesh
from symshape.registration import RegistrationConfig
from symshape.synthetic import ellipsoid

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_shape():
    """42-vertex ellipsoid, diameter ~3."""
    return ellipsoid((1.0, 1.0, 1.5), subdivisions=1)


def flat_config(shape: Mesh, alpha_squared=0.01, **kw) -> RegistrationConfig:
    """Kernel 10x wider than the shape, single control point at the box centre.

    A spacing of 2 sigma exceeds the inflated bounding box, so the control grid
    collapses to one point and velocity fields are translations up to
    ``(diameter / sigma)^2 / 4``.
    """
    sigma = 10.0 * shape.bounding_box_diagonal()
    kw.setdefault("max_iterations", 500)
    return RegistrationConfig(alpha_squared=alpha_squared, sigma=sigma,
                              control_point_spacing=2 * sigma, **kw)


def rms(a, b):
    a = getattr(a, "vertices", a)
    b = getattr(b, "vertices", b)
    return float(np.sqrt(np.mean(np.sum((np.asarray(a) - np.asarray(b)) ** 2, axis=1))))


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def acceptance(request):
    """Record and print one ``CRITERION n: PASS|FAIL`` line per acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def record(number, ok, detail):
        line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
