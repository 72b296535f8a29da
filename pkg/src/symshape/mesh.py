"""Corresponded triangle meshes and the ASCII OFF format."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ParseError, ShapeMismatch


@dataclass(frozen=True, eq=False)
class Mesh:
    """Vertex coordinates plus (optional) triangle connectivity.

    Shapes are compared by vertex index, so every mesh taking part in one
    experiment must share the same vertex ordering and faces.
    """

    vertices: np.ndarray
    faces: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] not in (2, 3):
            raise ValueError(f"vertices must be N x d with N >= 1, d in (2, 3); got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertex coordinates must be finite")
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if f.size and (f.min() < 0 or f.max() >= v.shape[0]):
            raise ValueError("face index out of range")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def with_vertices(self, vertices) -> "Mesh":
        """Same connectivity, new coordinates."""
        return Mesh(vertices, self.faces)

    def bounding_box_diagonal(self) -> float:
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def __add__(self, displacement):
        return self.with_vertices(self.vertices + np.asarray(displacement, dtype=np.float64))

    def __sub__(self, displacement):
        return self.with_vertices(self.vertices - np.asarray(displacement, dtype=np.float64))


def check_corresponded(a: Mesh, b: Mesh):
    if a.vertices.shape != b.vertices.shape:
        raise ShapeMismatch(
            f"meshes are not corresponded: {a.vertices.shape} vs {b.vertices.shape}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_off(mesh: Mesh) -> str:
    lines = ["OFF", f"{mesh.n_vertices} {len(mesh.faces)} 0"]
    for row in mesh.vertices:
        # OFF is a 3D format; planar shapes get a zero z coordinate.
        coords = list(row) + [0.0] * (3 - mesh.dim)
        lines.append(" ".join(_fmt(x) for x in coords))
    for f in mesh.faces:
        lines.append(f"3 {f[0]} {f[1]} {f[2]}")
    return "\n".join(lines) + "\n"


def save_mesh(mesh: Mesh, path) -> None:
    Path(path).write_text(format_off(mesh))


def parse_off(text: str, path=None, dim: int = 3) -> Mesh:
    """Parse ASCII OFF. ``dim=2`` drops the z column (must then be zero)."""
    # keep physical line numbers for error messages; skip blanks and comments
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            rows.append((lineno, content.split()))
    if not rows:
        raise ParseError("empty file", line=1, path=path)

    lineno, tokens = rows[0]
    if tokens[0] != "OFF":
        raise ParseError(f"expected 'OFF' header, got {tokens[0]!r}", line=lineno, path=path)
    if len(tokens) > 1:
        # header and counts on the same line
        counts_tokens, pos = tokens[1:], 1
        counts_line = lineno
    else:
        if len(rows) < 2:
            raise ParseError("missing counts line", line=lineno + 1, path=path)
        counts_line, counts_tokens = rows[1]
        pos = 2
    try:
        n_vertices, n_faces = int(counts_tokens[0]), int(counts_tokens[1])
    except (ValueError, IndexError):
        raise ParseError("counts line must read 'N M E'", line=counts_line, path=path) from None
    if n_vertices < 1 or n_faces < 0:
        raise ParseError("invalid vertex/face counts", line=counts_line, path=path)
    if len(rows) < pos + n_vertices + n_faces:
        last = rows[-1][0]
        raise ParseError(
            f"expected {n_vertices} vertices and {n_faces} faces, file ends early",
            line=last + 1, path=path)

    vertices = np.empty((n_vertices, 3))
    for k in range(n_vertices):
        lineno, tokens = rows[pos + k]
        if len(tokens) < 3:
            raise ParseError("vertex line needs 3 coordinates", line=lineno, path=path)
        try:
            vertices[k] = [float(t) for t in tokens[:3]]
        except ValueError:
            raise ParseError("non-numeric vertex coordinate", line=lineno, path=path) from None
        if not np.all(np.isfinite(vertices[k])):
            raise ParseError("non-finite vertex coordinate", line=lineno, path=path)
    pos += n_vertices

    faces = np.empty((n_faces, 3), dtype=np.int64)
    for k in range(n_faces):
        lineno, tokens = rows[pos + k]
        try:
            ints = [int(t) for t in tokens]
        except ValueError:
            raise ParseError("non-integer face entry", line=lineno, path=path) from None
        if ints[0] != 3 or len(ints) < 4:
            raise ParseError("only triangular faces ('3 i j k') are supported", line=lineno, path=path)
        idx = ints[1:4]
        if min(idx) < 0 or max(idx) >= n_vertices:
            raise ParseError(f"face index out of range [0, {n_vertices})", line=lineno, path=path)
        faces[k] = idx

    if dim == 2:
        if np.any(vertices[:, 2] != 0.0):
            raise ParseError("2D mesh requested but z coordinates are non-zero", path=path)
        vertices = vertices[:, :2]
    return Mesh(vertices, faces)


def load_mesh(path, dim: int = 3) -> Mesh:
    path = Path(path)
    return parse_off(path.read_text(), path=str(path), dim=dim)
