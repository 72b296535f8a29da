"""File schemas written and read by the CLI.

* meshes: ASCII OFF (:mod:`symshape.mesh`)
* control points + momenta: CSV ``index,x,y,z,mx,my,mz`` (``index,x,y,mx,my`` in 2D)
* residual field: CSV ``index,dx,dy,dz``
* error report: CSV ``subject_id,alpha_squared,variant,error_type,value,converged``
* LAS map: CSV ``index,x,y,z,las`` (the scalar field alongside mesh coordinates)
* summaries: JSON with sorted keys

Floats are written with 17 significant digits, so outputs are byte-identical
across re-runs and parse back losslessly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import ParseError
from .geodesics import ControlSystem
from .kernel import KernelParams
from .mesh import Mesh, load_mesh, save_mesh

REPORT_COLUMNS = ("subject_id", "alpha_squared", "variant", "error_type", "value", "converged")
AXES = ("x", "y", "z")


def fmt(x) -> str:
    return format(float(x), ".17g")


def _write_table(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(rows_item) for rows_item in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def save_momenta(sys: ControlSystem, path):
    d = sys.c.shape[1]
    header = ["index", *AXES[:d], *("m" + a for a in AXES[:d])]
    _write_table(path, header, ([str(i), *map(fmt, c), *map(fmt, m)]
                                for i, (c, m) in enumerate(zip(sys.c, sys.mu))))


def load_momenta(path, sigma: float) -> ControlSystem:
    """Read control points and momenta; the kernel width comes from the caller."""
    path = Path(path)
    rows = [(n, line.strip()) for n, line in enumerate(path.read_text().splitlines(), start=1)
            if line.strip()]
    if not rows:
        raise ParseError("empty momenta file", line=1, path=str(path))
    header = rows[0][1].split(",")
    if header[0] != "index" or len(header) not in (5, 7):
        raise ParseError("expected header 'index,x,y,z,mx,my,mz'", line=rows[0][0], path=str(path))
    d = (len(header) - 1) // 2
    c, mu = [], []
    for lineno, line in rows[1:]:
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} columns", line=lineno, path=str(path))
        try:
            vals = [float(x) for x in cells[1:]]
        except ValueError:
            raise ParseError("non-numeric entry", line=lineno, path=str(path)) from None
        c.append(vals[:d])
        mu.append(vals[d:])
    if not c:
        raise ParseError("no momenta rows", path=str(path))
    return ControlSystem(np.array(c), np.array(mu), KernelParams(float(sigma)))


def save_field(values: np.ndarray, path, prefix="d"):
    d = values.shape[1]
    header = ["index", *(prefix + a for a in AXES[:d])]
    _write_table(path, header, ([str(i), *map(fmt, row)] for i, row in enumerate(values)))


def save_las(mesh: Mesh, las: np.ndarray, path):
    d = mesh.dim
    header = ["index", *AXES[:d], "las"]
    _write_table(path, header, ([str(i), *map(fmt, v), fmt(s)]
                                for i, (v, s) in enumerate(zip(mesh.vertices, las))))


def save_report_csv(report, path):
    rows = ([str(sid), fmt(a2), variant, name, fmt(value), "true" if conv else "false"]
            for sid, a2, variant, name, value, conv in report.rows())
    _write_table(path, REPORT_COLUMNS, rows)


def load_report_csv(path):
    lines = Path(path).read_text().splitlines()
    if not lines or tuple(lines[0].split(",")) != REPORT_COLUMNS:
        raise ParseError("unexpected report header", line=1, path=str(path))
    out = []
    for line in lines[1:]:
        sid, a2, variant, name, value, conv = line.split(",")
        out.append((int(sid), float(a2), variant, name, float(value), conv == "true"))
    return out


def save_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def registration_summary(result) -> dict:
    return {
        "alpha_squared": result.alpha_squared,
        "data_term": result.data_term,
        "regularity_term": result.regularity_term,
        "velocity_norm": result.velocity_norm,
        "total": result.total,
        "registration_error": result.registration_error,
        "iterations": result.iterations,
        "converged": bool(result.converged),
        "n_control_points": int(result.system.c.shape[0]),
        "sigma": result.system.params.sigma,
    }


# population directories: template.off, subject_000_base.off, subject_000_followup.off, ...

def save_population(template: Mesh, pairs, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_mesh(template, directory / "template.off")
    for i, (s, s2) in enumerate(pairs):
        save_mesh(s, directory / f"subject_{i:03d}_base.off")
        save_mesh(s2, directory / f"subject_{i:03d}_followup.off")


def load_population(directory):
    directory = Path(directory)
    template = load_mesh(directory / "template.off")
    pairs = []
    for base in sorted(directory.glob("subject_*_base.off")):
        follow = base.with_name(base.name.replace("_base.off", "_followup.off"))
        pairs.append((load_mesh(base), load_mesh(follow)))
    return template, pairs
