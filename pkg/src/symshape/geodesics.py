"""Geodesic shooting: Hamiltonian flow of control points and momenta.

Control points ``c`` and momenta ``mu`` evolve as

    dc_k/dt  =  sum_j K(c_k, c_j) mu_j
    dmu_k/dt = -sum_j grad_1 K(c_k, c_j) (mu_k . mu_j)

and any other point ``x`` is advected by the velocity field the system
carries, ``dx/dt = sum_j K(x, c_j) mu_j``. The flow at time 1 applied to a
shape is the exponential map at the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import NonFiniteState
from .kernel import KernelParams, hilbert_product, kernel_matrix
from .mesh import Mesh

SCHEMES = ("euler", "rk2")

# abort when coordinates exceed this multiple of the initial bounding-box diagonal
BLOWUP_FACTOR = 1e6


@dataclass(frozen=True, eq=False)
class ControlSystem:
    c: np.ndarray
    mu: np.ndarray
    params: KernelParams

    def __post_init__(self):
        c = np.array(self.c, dtype=np.float64)
        mu = np.array(self.mu, dtype=np.float64)
        if c.ndim != 2 or c.shape != mu.shape:
            raise ValueError(f"control points {c.shape} and momenta {mu.shape} must match")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(mu))):
            raise ValueError("control points and momenta must be finite")
        if not isinstance(self.params, KernelParams):
            object.__setattr__(self, "params", KernelParams(float(self.params)))
        c.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "mu", mu)

    def with_momenta(self, mu) -> "ControlSystem":
        return ControlSystem(self.c, mu, self.params)

    def negated(self) -> "ControlSystem":
        return ControlSystem(self.c, -self.mu, self.params)

    def velocity_norm(self) -> float:
        """``|v_0|_H`` of the field carried by this system."""
        return math.sqrt(max(hilbert_product(self.c, self.mu, self.c, self.mu, self.params), 0.0))


@dataclass(frozen=True, eq=False)
class GeodesicTrajectory:
    times: np.ndarray
    c_path: np.ndarray  # (n_steps + 1, Nc, d)
    mu_path: np.ndarray
    x_path: Optional[np.ndarray]  # (n_steps + 1, N, d) or None
    scheme: str
    n_steps: int
    params: KernelParams

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def system_at(self, k: int) -> ControlSystem:
        return ControlSystem(self.c_path[k], self.mu_path[k], self.params)

    @property
    def final_system(self) -> ControlSystem:
        return self.system_at(-1)


def hamiltonian_energy(sys: ControlSystem) -> float:
    return 0.5 * hilbert_product(sys.c, sys.mu, sys.c, sys.mu, sys.params)


def hamiltonian_rhs(c, mu, sigma, x=None):
    """Time derivatives ``(dc, dmu, dx)`` of the combined state."""
    s2 = sigma * sigma
    K = kernel_matrix(c, c, sigma)
    dc = K @ mu
    A = K * (mu @ mu.T)
    dmu = (2.0 / s2) * (A.sum(axis=1)[:, None] * c - A @ c)
    dx = None if x is None else kernel_matrix(x, c, sigma) @ mu
    return dc, dmu, dx


def _step(c, mu, x, h, sigma, scheme):
    dc, dmu, dx = hamiltonian_rhs(c, mu, sigma, x)
    if scheme == "euler":
        return c + h * dc, mu + h * dmu, None if x is None else x + h * dx
    # RK2 midpoint rule
    hh = 0.5 * h
    cm, mum = c + hh * dc, mu + hh * dmu
    xm = None if x is None else x + hh * dx
    dc, dmu, dx = hamiltonian_rhs(cm, mum, sigma, xm)
    return c + h * dc, mu + h * dmu, None if x is None else x + h * dx


def _check_args(n_steps, t_end, scheme):
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError(f"n_steps must be a positive integer, got {n_steps}")
    if not (0.0 <= t_end <= 1.0):
        raise ValueError(f"t_end must lie in [0, 1], got {t_end}")


def shoot(sys: ControlSystem, n_steps: int = 10, t_end: float = 1.0, scheme: str = "rk2",
          points=None) -> GeodesicTrajectory:
    """Integrate the geodesic equations from ``sys`` over ``[0, t_end]``.

    ``points`` are advected in the same combined state as the control points,
    so both see identical time discretisation. Raises ``NonFiniteState`` on
    blow-up.
    """
    _check_args(n_steps, t_end, scheme)
    sigma = sys.params.sigma
    h = t_end / n_steps
    c, mu = sys.c.copy(), sys.mu.copy()
    x = None if points is None else np.array(points, dtype=np.float64)

    stacked = c if x is None else np.vstack([c, x])
    diag = float(np.linalg.norm(stacked.max(axis=0) - stacked.min(axis=0)))
    bound = BLOWUP_FACTOR * max(diag, sigma) + np.abs(stacked).max()

    c_path = [c]
    mu_path = [mu]
    x_path = None if x is None else [x]
    for k in range(n_steps):
        c, mu, x = _step(c, mu, x, h, sigma, scheme)
        for arr in (c, mu) if x is None else (c, mu, x):
            if not np.all(np.isfinite(arr)) or np.abs(arr).max(initial=0.0) > bound:
                raise NonFiniteState(f"geodesic blew up at step {k + 1}/{n_steps}")
        c_path.append(c)
        mu_path.append(mu)
        if x is not None:
            x_path.append(x)

    return GeodesicTrajectory(
        times=np.linspace(0.0, t_end, n_steps + 1),
        c_path=np.stack(c_path),
        mu_path=np.stack(mu_path),
        x_path=None if x is None else np.stack(x_path),
        scheme=scheme,
        n_steps=n_steps,
        params=sys.params,
    )


def flow_points(x0, traj: GeodesicTrajectory) -> np.ndarray:
    """Path ``(n_steps + 1, N, d)`` of ``x0`` advected along ``traj``.

    The RK2 stages need the control state between stored time points, so the
    combined system is re-integrated from the trajectory's initial state; the
    control path it produces is identical to ``traj.c_path``.
    """
    t = shoot(traj.system_at(0), traj.n_steps, traj.t_end, traj.scheme, points=x0)
    return t.x_path


def exponential(shape: Mesh, sys: ControlSystem, n_steps: int = 10, t_end: float = 1.0,
                scheme: str = "rk2") -> Mesh:
    """Deform ``shape`` by the geodesic flow of ``sys`` up to ``t_end``."""
    if t_end == 0.0 or not np.any(sys.mu):
        _check_args(n_steps, t_end, scheme)
        return shape.with_vertices(shape.vertices)
    traj = shoot(sys, n_steps, t_end, scheme, points=shape.vertices)
    return shape.with_vertices(traj.x_path[-1])


def half_steps(n_steps: int) -> int:
    """Step count used to integrate a half geodesic with the same step size."""
    return max(1, math.ceil(n_steps / 2))
