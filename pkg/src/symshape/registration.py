"""LDDMM landmark registration by gradient descent on initial control points and momenta.

The criterion is

    C(c, mu) = |S - phi_1(T)|^2 + alpha^2 |v_0|_H^2

with ``phi_1`` the geodesic flow of ``(c, mu)`` and the data term the squared
stacked L2 distance between corresponding vertices. Its gradient is the exact
gradient of the *discrete* criterion: reverse-mode differentiation through the
integrator steps (a JAX mirror of :mod:`symshape.geodesics`).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import jax
import numpy as np

jax.config.update("jax_enable_x64", True)
import jax.numpy as jnp  # noqa: E402

from .exceptions import ShapeMismatch  # noqa: E402
from .geodesics import ControlSystem, exponential  # noqa: E402
from .kernel import KernelParams, hilbert_product  # noqa: E402
from .mesh import Mesh, check_corresponded  # noqa: E402

ARMIJO = 1e-4


@dataclass(frozen=True)
class RegistrationConfig:
    """Settings of one registration.

    ``alpha_squared`` weighs the regularity term; ``control_point_spacing``
    defaults to ``sigma``.
    """

    alpha_squared: float
    sigma: float
    n_steps: int = 10
    scheme: str = "rk2"
    control_point_spacing: Optional[float] = None
    max_iterations: int = 200
    convergence_tol: float = 1e-6
    initial_step: float = 1e-2
    freeze_control_points: bool = False

    def __post_init__(self):
        if not self.alpha_squared > 0:
            raise ValueError("alpha_squared must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be positive")
        if self.scheme not in ("euler", "rk2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.control_point_spacing is not None and not self.control_point_spacing > 0:
            raise ValueError("control_point_spacing must be positive")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.alpha_squared)

    @property
    def spacing(self) -> float:
        return self.sigma if self.control_point_spacing is None else self.control_point_spacing

    @property
    def kernel(self) -> KernelParams:
        return KernelParams(self.sigma)

    def replace(self, **changes) -> "RegistrationConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class RegistrationResult:
    system: ControlSystem
    deformed: Mesh  # phi_1(T)
    delta: np.ndarray  # S - phi_1(T)
    data_term: float
    regularity_term: float  # |v_0|_H^2
    total: float
    iterations: int
    converged: bool
    alpha_squared: float
    history: tuple = field(default=())

    @property
    def velocity_norm(self) -> float:
        return math.sqrt(max(self.regularity_term, 0.0))

    @property
    def registration_error(self) -> float:
        """Per-vertex RMS of the residual."""
        return float(np.sqrt(np.mean(np.sum(self.delta ** 2, axis=1))))


# ---------------------------------------------------------------------------
# JAX mirror of the forward integrator


def _jkernel(x, y, sigma):
    diff = x[:, None, :] - y[None, :, :]
    return jnp.exp(-jnp.sum(diff * diff, axis=-1) / (sigma * sigma))


def _jrhs(c, mu, x, sigma):
    K = _jkernel(c, c, sigma)
    A = K * (mu @ mu.T)
    dmu = (2.0 / (sigma * sigma)) * (A.sum(axis=1)[:, None] * c - A @ c)
    return K @ mu, dmu, _jkernel(x, c, sigma) @ mu


def _jflow(c, mu, x, sigma, n_steps, t_end, scheme):
    h = t_end / n_steps

    def body(state, _):
        c, mu, x = state
        dc, dmu, dx = _jrhs(c, mu, x, sigma)
        if scheme == "euler":
            return (c + h * dc, mu + h * dmu, x + h * dx), None
        hh = 0.5 * h
        dc, dmu, dx = _jrhs(c + hh * dc, mu + hh * dmu, x + hh * dx, sigma)
        return (c + h * dc, mu + h * dmu, x + h * dx), None

    (c, mu, x), _ = jax.lax.scan(body, (c, mu, x), None, length=n_steps)
    return x


def _terms(c, mu, template, target, sigma, alpha_squared, n_steps, scheme):
    x1 = _jflow(c, mu, template, sigma, n_steps, 1.0, scheme)
    r = target - x1
    data = jnp.sum(r * r)
    reg = jnp.sum(_jkernel(c, c, sigma) * (mu @ mu.T))
    return data + alpha_squared * reg, (data, reg)


@functools.lru_cache(maxsize=None)
def _compiled(n_steps: int, scheme: str):
    f = functools.partial(_terms, n_steps=n_steps, scheme=scheme)
    value = jax.jit(f)
    value_and_grad = jax.jit(jax.value_and_grad(f, argnums=(0, 1), has_aux=True))
    return value, value_and_grad


def _check_pair(template: Mesh, target: Mesh):
    if template.vertices.shape != target.vertices.shape:
        raise ShapeMismatch(
            f"template and target are not corresponded: "
            f"{template.vertices.shape} vs {target.vertices.shape}")


def criterion(sys: ControlSystem, template: Mesh, target: Mesh, cfg: RegistrationConfig):
    """Return ``(total, data, reg)`` of the registration criterion at ``sys``."""
    _check_pair(template, target)
    value, _ = _compiled(cfg.n_steps, cfg.scheme)
    total, (data, reg) = value(sys.c, sys.mu, template.vertices, target.vertices,
                               cfg.sigma, cfg.alpha_squared)
    return float(total), float(data), float(reg)


def criterion_gradient(sys: ControlSystem, template: Mesh, target: Mesh, cfg: RegistrationConfig):
    """Return ``(grad_c, grad_mu)`` of the discrete criterion."""
    _check_pair(template, target)
    _, value_and_grad = _compiled(cfg.n_steps, cfg.scheme)
    _, (gc, gmu) = value_and_grad(sys.c, sys.mu, template.vertices, target.vertices,
                                  cfg.sigma, cfg.alpha_squared)
    return np.asarray(gc), np.asarray(gmu)


# ---------------------------------------------------------------------------


def control_point_grid(shape: Mesh, sigma: float, spacing: float) -> np.ndarray:
    """Regular grid covering the bounding box of ``shape`` inflated by ``sigma / 2``."""
    lo = shape.vertices.min(axis=0) - sigma / 2
    hi = shape.vertices.max(axis=0) + sigma / 2
    axes = []
    for a, b in zip(lo, hi):
        n = int(math.floor((b - a) / spacing + 1e-9)) + 1
        centre = 0.5 * (a + b)
        axes.append(centre + spacing * (np.arange(n) - (n - 1) / 2))
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def initial_system(template: Mesh, cfg: RegistrationConfig) -> ControlSystem:
    c = control_point_grid(template, cfg.sigma, cfg.spacing)
    return ControlSystem(c, np.zeros_like(c), cfg.kernel)


def residual(target: Mesh, deformed: Mesh) -> np.ndarray:
    """Vertex-wise displacement ``target - deformed``."""
    if target.vertices.shape != deformed.vertices.shape:
        raise ShapeMismatch(
            f"cannot form residual between {target.vertices.shape} and {deformed.vertices.shape}")
    return target.vertices - deformed.vertices


def finish(sys: ControlSystem, template: Mesh, target: Mesh, cfg: RegistrationConfig,
           iterations=0, converged=True, history=()) -> RegistrationResult:
    """Assemble a result (deformation, residual, criterion terms) for a given system."""
    deformed = exponential(template, sys, cfg.n_steps, 1.0, cfg.scheme)
    delta = residual(target, deformed)
    data = float(np.sum(delta * delta))
    reg = hilbert_product(sys.c, sys.mu, sys.c, sys.mu, sys.params)
    return RegistrationResult(
        system=sys, deformed=deformed, delta=delta, data_term=data, regularity_term=reg,
        total=data + cfg.alpha_squared * reg, iterations=iterations, converged=converged,
        alpha_squared=cfg.alpha_squared, history=tuple(history))


def register(template: Mesh, target: Mesh, cfg: RegistrationConfig,
             init: Optional[ControlSystem] = None) -> RegistrationResult:
    """Register ``template`` onto ``target``.

    Gradient descent with backtracking (Armijo constant 1e-4). Each iteration
    starts its line search at twice the previously accepted step, so the step
    size adapts to the curvature of the criterion, which changes by orders of
    magnitude with ``alpha_squared``. Stops when the relative decrease of the
    criterion falls below ``cfg.convergence_tol``; non-convergence is reported
    through ``converged``, not raised.
    """
    _check_pair(template, target)
    check_corresponded(template, target)
    sys = initial_system(template, cfg) if init is None else init
    if sys.c.shape[1] != template.dim:
        raise ShapeMismatch("control points and shape have different dimensions")
    value, value_and_grad = _compiled(cfg.n_steps, cfg.scheme)
    args = (template.vertices, target.vertices, cfg.sigma, cfg.alpha_squared)

    c, mu = sys.c.copy(), sys.mu.copy()
    (f, _), (gc, gmu) = value_and_grad(c, mu, *args)
    f = float(f)
    history = [f]
    step = cfg.initial_step
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        gc = np.zeros_like(c) if cfg.freeze_control_points else np.asarray(gc)
        gmu = np.asarray(gmu)
        g2 = float(np.sum(gc * gc) + np.sum(gmu * gmu))
        if g2 == 0.0 or f == 0.0:
            iterations -= 1
            converged = True
            break
        t = step
        accepted = False
        while t > 1e-30 * cfg.initial_step:
            c_new, mu_new = c - t * gc, mu - t * gmu
            f_new = float(value(c_new, mu_new, *args)[0])
            if np.isfinite(f_new) and f_new <= f - ARMIJO * t * g2:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # no descent possible along the gradient at floating-point resolution
            iterations -= 1
            converged = math.sqrt(g2) <= 1e-8 * max(1.0, abs(f))
            break
        decrease = (f - f_new) / max(abs(f), np.finfo(float).tiny)
        c, mu = c_new, mu_new
        (f, _), (gc, gmu) = value_and_grad(c, mu, *args)
        f = float(f)
        history.append(f)
        step = 2.0 * t
        if decrease < cfg.convergence_tol:
            converged = True
            break

    return finish(ControlSystem(c, mu, cfg.kernel), template, target, cfg,
                  iterations=iterations, converged=converged, history=history)
