import numpy as np
import pytest

from conftest import flat_config, rms
from symshape.diagnostics import centrality_error, involutivity_error
from symshape.geodesics import ControlSystem, exponential, shoot
from symshape.kernel import KernelParams, hilbert_product
from symshape.registration import RegistrationConfig, control_point_grid, register
from symshape.symmetric import symmetry
from symshape.synthetic import random_momenta
from symshape.transport import fanning_from_shapes, fanning_transport, pole_ladder

CFG = RegistrationConfig(alpha_squared=1.0, sigma=1.0, control_point_spacing=1.5, max_iterations=60)
P = KernelParams(1.0)


def orbit_pair(template, rng, base_norm=0.3, follow_norm=0.1):
    c = control_point_grid(template, 1.0, 1.5)
    s = exponential(template, ControlSystem(c, random_momenta(c, rng, base_norm, P), P))
    c2 = control_point_grid(s, 1.0, 1.5)
    s2 = exponential(s, ControlSystem(c2, random_momenta(c2, rng, follow_norm, P), P))
    return s, s2


def flat_family(shape, rng, frac=0.05):
    scale = frac * shape.bounding_box_diagonal()
    a = scale * rng.normal(size=3)
    b = scale * rng.normal(size=3)
    return shape + a, shape + a + b, b


class Recorder:
    def __init__(self):
        self.results = []

    def __call__(self, template, target, cfg):
        r = register(template, target, cfg)
        self.results.append(r)
        return r


@pytest.mark.parametrize("n_rungs", [1, 2, 4])
def test_trace_counts(small_shape, n_rungs):
    rng = np.random.default_rng(n_rungs)
    s, s2 = orbit_pair(small_shape, rng)
    cfg = CFG.replace(max_iterations=10)
    rec = Recorder()
    out, trace = pole_ladder(small_shape, s, s2, cfg, "with_residual", n_rungs, registrar=rec)
    assert trace.n_midpoints == n_rungs
    assert trace.n_symmetries == 2 * n_rungs
    assert len(trace.rungs) == n_rungs
    assert len(trace.path) == n_rungs + 1
    assert trace.path[0] is s and trace.path[-1] is small_shape
    assert len(trace.subdivision_converged) == n_rungs - 1
    # one registration per midpoint and symmetry, plus the subdivision midpoints
    assert len(rec.results) == 3 * n_rungs + n_rungs - 1
    assert out is trace.rungs[-1].transported


@pytest.mark.parametrize("n_rungs", [0, 3, -2])
def test_bad_rung_count(small_shape, n_rungs):
    with pytest.raises(ValueError):
        pole_ladder(small_shape, small_shape, small_shape, CFG, n_rungs=n_rungs)


@pytest.mark.parametrize("variant,alpha_squared", [("with_residual", 1.0),
                                                   ("with_residual", 100.0),
                                                   ("without_residual", 1e-4)])
def test_flat_translation_is_transported_unchanged(small_shape, variant, alpha_squared):
    rng = np.random.default_rng(11)
    s, s2, b = flat_family(small_shape, rng)
    out, trace = pole_ladder(small_shape, s, s2, flat_config(small_shape, alpha_squared), variant)
    assert rms(out, small_shape + b) <= 1e-2 * np.linalg.norm(b)


def test_flat_translation_two_rungs(small_shape):
    rng = np.random.default_rng(12)
    s, s2, b = flat_family(small_shape, rng)
    out, trace = pole_ladder(small_shape, s, s2, flat_config(small_shape, 1.0), n_rungs=2)
    assert rms(out, small_shape + b) <= 1e-2 * np.linalg.norm(b)
    # the subdivision point is the Euclidean midpoint
    assert rms(trace.path[1], (s.vertices + small_shape.vertices) / 2) <= 1e-3 * np.linalg.norm(b)


def test_residual_never_worse_on_flat_families(small_shape):
    rng = np.random.default_rng(2024)
    violations = 0
    for _ in range(20):
        s, s2, b = flat_family(small_shape, rng)
        cfg = flat_config(small_shape, float(10 ** rng.uniform(-2, 2)), max_iterations=200)
        errs = [rms(pole_ladder(small_shape, s, s2, cfg, v)[0], small_shape + b)
                for v in ("with_residual", "without_residual")]
        violations += int(errs[0] > errs[1])
    assert violations <= 2


def test_degenerate_base_geodesic_is_double_reflection(small_shape):
    rng = np.random.default_rng(5)
    _, s2 = orbit_pair(small_shape, rng)
    out, trace = pole_ladder(small_shape, small_shape, s2, CFG, "with_residual")
    np.testing.assert_array_equal(trace.rungs[0].midpoint.vertices, small_shape.vertices)
    once = symmetry(small_shape, s2, CFG, "with_residual").result
    twice = symmetry(small_shape, once, CFG, "with_residual").result
    np.testing.assert_array_equal(out.vertices, twice.vertices)
    assert rms(out, s2) <= 0.1 * rms(s2, small_shape)


def test_zero_transport_returns_near_template(small_shape):
    # T' = s_T(s_M(S)): the distance to T is governed by how far s_M(S) is
    # from T (centrality) plus the involutivity of the reflections
    rng = np.random.default_rng(6)
    s, _ = orbit_pair(small_shape, rng)
    out, _ = pole_ladder(small_shape, s, s, CFG, "with_residual")
    bound = 2 * (centrality_error(small_shape, s, CFG) + involutivity_error(small_shape, s, s, CFG))
    assert rms(out, small_shape) <= bound
    assert rms(out, small_shape) <= 0.1 * rms(s, small_shape)


def test_without_residual_agrees_on_exact_matching(small_shape):
    rng = np.random.default_rng(8)
    s, s2 = orbit_pair(small_shape, rng)
    cfg = RegistrationConfig(alpha_squared=1e-4, sigma=1.0, control_point_spacing=1.5,
                             max_iterations=100)
    rec = Recorder()
    with_r, _ = pole_ladder(small_shape, s, s2, cfg, "with_residual", registrar=rec)
    without, _ = pole_ladder(small_shape, s, s2, cfg, "without_residual", registrar=rec)
    residual = max(r.registration_error for r in rec.results)
    assert rms(with_r, without) <= 10 * residual


def test_report_log(small_shape):
    rng = np.random.default_rng(9)
    s, s2 = orbit_pair(small_shape, rng)
    out, trace = pole_ladder(small_shape, s, s2, CFG.replace(max_iterations=10), report_log=True)
    assert trace.log is not None
    np.testing.assert_allclose(trace.log.deformed.vertices + trace.log.delta, out.vertices,
                               atol=1e-14)


def test_fanning_zero_vector(small_shape):
    rng = np.random.default_rng(10)
    s, _ = orbit_pair(small_shape, rng)
    base = register(s, small_shape, CFG.replace(max_iterations=10))
    out, moved = fanning_transport(small_shape, base, np.zeros_like(base.system.c), CFG,
                                   return_momenta=True)
    np.testing.assert_array_equal(out.vertices, small_shape.vertices)
    assert np.all(moved.mu == 0.0)


def test_fanning_rejects_misplaced_momenta(small_shape):
    base = register(small_shape, small_shape, CFG)
    with pytest.raises(ValueError):
        fanning_transport(small_shape, base, np.zeros((1, 3)), CFG)


def test_fanning_flat_translation_preserves_momenta(small_shape):
    rng = np.random.default_rng(13)
    s, _, _ = flat_family(small_shape, rng)
    cfg = flat_config(small_shape, 0.01)
    base = register(s, small_shape, cfg)
    assert base.system.c.shape[0] == 1
    w = 0.01 * cfg.sigma * rng.normal(size=(1, 3))
    _, moved = fanning_transport(small_shape, base, w, cfg, return_momenta=True)
    assert np.linalg.norm(moved.mu - w) <= 1e-4 * np.linalg.norm(w)


def test_fanning_conserves_hilbert_norm(small_shape):
    rng = np.random.default_rng(14)
    s, _ = orbit_pair(small_shape, rng)
    base = register(s, small_shape, CFG.replace(max_iterations=20))
    w = random_momenta(base.system.c, rng, 0.1, P)
    _, moved = fanning_transport(small_shape, base, w, CFG, return_momenta=True)
    norm = hilbert_product(moved.c, moved.mu, moved.c, moved.mu, P)
    assert norm == pytest.approx(0.01, rel=1e-10)
    # transported momenta sit at the endpoint of the base geodesic
    np.testing.assert_allclose(moved.c, shoot(base.system, CFG.n_steps).c_path[-1], atol=1e-12)


def test_fanning_from_shapes_flat(small_shape):
    rng = np.random.default_rng(15)
    s, s2, b = flat_family(small_shape, rng)
    out = fanning_from_shapes(small_shape, s, s2, flat_config(small_shape, 1e-4))
    assert rms(out, small_shape + b) <= 1e-2 * np.linalg.norm(b)


def test_fanning_agrees_with_pole_ladder_on_small_deformations(small_shape):
    rng = np.random.default_rng(16)
    cfg = CFG.replace(max_iterations=200)
    s, _ = orbit_pair(small_shape, rng, base_norm=0.1)
    base = register(s, small_shape, cfg)
    w = random_momenta(base.system.c, rng, 0.1, P)
    s2 = exponential(s, ControlSystem(base.system.c, w, P))
    fan = fanning_transport(small_shape, base, w, cfg)
    pl, _ = pole_ladder(small_shape, s, s2, cfg, "with_residual")
    assert rms(fan, pl) <= 0.05 * rms(s2, s)
