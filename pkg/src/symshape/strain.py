"""Local area strain (LAS) maps and the area strain error (ASE) between them."""
from __future__ import annotations

import numpy as np

from .exceptions import DegenerateNeighborhood, LengthMismatch, ShapeMismatch
from .mesh import Mesh

# faces of the reference mesh below this area (times scale^2) are ignored
DEGENERATE_AREA = 1e-12


def triangle_areas(mesh: Mesh) -> np.ndarray:
    v = mesh.vertices
    if mesh.dim == 2:
        v = np.hstack([v, np.zeros((len(v), 1))])
    a, b, c = (v[mesh.faces[:, k]] for k in range(3))
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def local_area_strain(a: Mesh, b: Mesh) -> np.ndarray:
    """Per-vertex mean of ``(area_a - area_b) / area_a`` over incident faces.

    Positive where ``b`` shrinks relative to ``a``. Faces that are degenerate
    in ``a`` do not count towards a vertex's mean.
    """
    if a.vertices.shape != b.vertices.shape or not np.array_equal(a.faces, b.faces):
        raise ShapeMismatch("local area strain needs meshes with identical connectivity")
    area_a = triangle_areas(a)
    area_b = triangle_areas(b)
    ok = area_a >= DEGENERATE_AREA * a.bounding_box_diagonal() ** 2
    ratio = np.zeros_like(area_a)
    ratio[ok] = (area_a[ok] - area_b[ok]) / area_a[ok]

    n = a.n_vertices
    total = np.zeros(n)
    count = np.zeros(n, dtype=np.int64)
    for k in range(3):
        np.add.at(total, a.faces[ok, k], ratio[ok])
        np.add.at(count, a.faces[ok, k], 1)
    if np.any(count == 0):
        bad = np.flatnonzero(count == 0)
        raise DegenerateNeighborhood(
            f"{len(bad)} vertices have no non-degenerate incident face (first: {bad[0]})")
    return total / count


def area_strain_error(las1, las2) -> float:
    """Root of the summed squared differences between two LAS maps (not normalised)."""
    las1 = np.asarray(las1, dtype=np.float64)
    las2 = np.asarray(las2, dtype=np.float64)
    if las1.shape != las2.shape:
        raise LengthMismatch(f"LAS maps differ in length: {las1.shape} vs {las2.shape}")
    d = las1 - las2
    return float(np.sqrt(np.sum(d * d)))
