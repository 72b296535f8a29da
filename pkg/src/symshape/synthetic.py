"""Synthetic corresponded population: ellipsoid template, diastolic/systolic pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geodesics import ControlSystem, exponential
from .kernel import KernelParams, hilbert_product
from .mesh import Mesh
from .registration import control_point_grid


@dataclass(frozen=True)
class PopulationConfig:
    """Knobs of the synthetic population.

    Lengths are in template units (the default ellipsoid is roughly 2 x 2 x 3).
    Setting ``subject_scale``, ``noise_scale``, ``systolic_scale`` and
    ``contraction`` to zero makes every subject identical to the template.
    """

    semi_axes: tuple = (1.0, 1.0, 1.5)
    subdivisions: int = 2  # 2 -> 162 vertices
    deformation_sigma: float = 1.0
    grid_spacing: float = 1.0
    subject_scale: float = 0.15
    noise_scale: float = 0.01
    systolic_scale: float = 0.05
    contraction: float = 0.12


def icosphere(subdivisions: int = 2) -> Mesh:
    """Unit sphere from a subdivided icosahedron (12, 42, 162, 642, ... vertices)."""
    p = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [(-1, p, 0), (1, p, 0), (-1, -p, 0), (1, -p, 0),
             (0, -1, p), (0, 1, p), (0, -1, -p), (0, 1, -p),
             (p, 0, -1), (p, 0, 1), (-p, 0, -1), (-p, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return Mesh(np.array(verts), np.array(faces))


def ellipsoid(semi_axes=(1.0, 1.0, 1.5), subdivisions: int = 2) -> Mesh:
    sphere = icosphere(subdivisions)
    return sphere.with_vertices(sphere.vertices * np.asarray(semi_axes, dtype=np.float64))


def random_deformation(shape: Mesh, rng: np.random.Generator, scale: float,
                       sigma: float, spacing: float) -> Mesh:
    """Shoot ``shape`` along a geodesic with Gaussian random momenta on a coarse grid."""
    if scale == 0.0:
        return shape.with_vertices(shape.vertices)
    c = control_point_grid(shape, sigma, spacing)
    mu = rng.normal(scale=scale, size=c.shape)
    return exponential(shape, ControlSystem(c, mu, KernelParams(sigma)))


def random_momenta(c: np.ndarray, rng: np.random.Generator, norm: float,
                   params: KernelParams) -> np.ndarray:
    """Gaussian random momenta at ``c`` rescaled to ``||v||_H = norm``."""
    mu = rng.normal(size=np.shape(c))
    current = math.sqrt(hilbert_product(c, mu, c, mu, params))
    return mu * (norm / current)


def generate_synthetic_population(seed: int, n_subjects: int, cfg: PopulationConfig = PopulationConfig()):
    """Return ``(template, [(S, S_prime), ...])``; deterministic in ``seed``."""
    if n_subjects < 1:
        raise ValueError("n_subjects must be >= 1")
    rng = np.random.default_rng(seed)
    template = ellipsoid(cfg.semi_axes, cfg.subdivisions)
    pairs = []
    for _ in range(n_subjects):
        s = random_deformation(template, rng, cfg.subject_scale, cfg.deformation_sigma, cfg.grid_spacing)
        s = s + rng.normal(scale=cfg.noise_scale, size=s.vertices.shape) if cfg.noise_scale else s

        s2 = random_deformation(s, rng, cfg.systolic_scale, cfg.deformation_sigma, cfg.grid_spacing)
        kappa = cfg.contraction * rng.uniform(0.5, 1.5)
        centre = s2.vertices.mean(axis=0)
        # short-axis contraction dominates, long axis shortens half as much
        factors = np.array([1 - kappa, 1 - kappa, 1 - kappa / 2])[: template.dim]
        s2 = s2.with_vertices(centre + (s2.vertices - centre) * factors)
        pairs.append((s, s2))
    return template, pairs
