"""Parallel transport of a deformation ``[S, S']`` to a template ``T``.

Two schemes:

* symmetric pole ladder: one midpoint and two symmetries per rung, built on
  the (optionally residual-corrected) operators of :mod:`symshape.symmetric`;
* fanning: Jacobi fields along the base geodesic approximated by finite
  differences of perturbed geodesics. This is a reconstruction of the
  standard fanning construction, used only as a comparison point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .exceptions import NonFiniteState
from .geodesics import ControlSystem, exponential, shoot
from .kernel import hilbert_product, kernel_matrix
from .mesh import Mesh, check_corresponded
from .registration import RegistrationConfig, RegistrationResult, register
from .symmetric import Registrar, Variant, midpoint, symmetry


@dataclass(frozen=True, eq=False)
class Rung:
    source: Mesh  # current base point (S for the first rung)
    target: Mesh  # next base point (T for the last rung)
    midpoint: Mesh  # M
    reflected: Mesh  # T''
    transported: Mesh  # deformed target
    converged: tuple  # (midpoint, first symmetry, second symmetry) registrations


@dataclass(eq=False)
class LadderTrace:
    variant: Variant
    path: List[Mesh]  # base geodesic subdivision, S first, T last
    rungs: List[Rung] = field(default_factory=list)
    n_midpoints: int = 0
    n_symmetries: int = 0
    subdivision_converged: tuple = ()
    log: Optional[RegistrationResult] = None  # Log_T(T'), when requested

    @property
    def converged(self) -> bool:
        return all(all(r.converged) for r in self.rungs) and all(self.subdivision_converged)


def _subdivide(source: Mesh, target: Mesh, n: int, cfg, variant, registrar, flags):
    if n == 1:
        return [source, target]
    mid, reg = midpoint(source, target, cfg, variant, registrar)
    flags.append(reg.converged)
    half = n // 2
    left = _subdivide(source, mid, half, cfg, variant, registrar, flags)
    right = _subdivide(mid, target, half, cfg, variant, registrar, flags)
    return left[:-1] + right


def pole_ladder(template: Mesh, subject: Mesh, subject_followup: Mesh, cfg: RegistrationConfig,
                variant=Variant.WITH_RESIDUAL, n_rungs: int = 1, registrar: Registrar = register,
                report_log: bool = False):
    """Transport ``[subject, subject_followup]`` to ``template`` by pole ladder.

    Returns ``(T', trace)``. Each rung from base point ``A`` (carrying ``A'``)
    to ``B`` computes ``M = midpoint(B, A)``, ``A'' = s_M(A')`` and
    ``B' = s_B(A'')``. With ``n_rungs > 1`` (a power of two) the base geodesic
    is first subdivided by recursive midpoints shot from the subject side.
    """
    variant = Variant(variant)
    check_corresponded(template, subject)
    check_corresponded(template, subject_followup)
    if n_rungs < 1 or n_rungs & (n_rungs - 1):
        raise ValueError(f"n_rungs must be a power of two, got {n_rungs}")

    flags = []
    path = _subdivide(subject, template, n_rungs, cfg, variant, registrar, flags)
    trace = LadderTrace(variant=variant, path=path, subdivision_converged=tuple(flags))
    carried = subject_followup
    for a, b in zip(path[:-1], path[1:]):
        m, m_reg = midpoint(b, a, cfg, variant, registrar)
        first = symmetry(m, carried, cfg, variant, registrar)
        second = symmetry(b, first.result, cfg, variant, registrar)
        trace.n_midpoints += 1
        trace.n_symmetries += 2
        trace.rungs.append(Rung(
            source=a, target=b, midpoint=m, reflected=first.result, transported=second.result,
            converged=(m_reg.converged, first.registration.converged,
                       second.registration.converged)))
        carried = second.result

    if report_log:
        trace.log = registrar(template, carried, cfg)
    return carried, trace


def fanning_transport(template: Mesh, base_registration: RegistrationResult, w,
                      cfg: RegistrationConfig, return_momenta: bool = False):
    """Transport momenta ``w`` along the geodesic of ``base_registration``.

    ``w`` lives at the initial control points of the base geodesic (typically
    the registration ``S -> T``). At each of the ``n_steps`` steps the Jacobi
    field is the central difference of two one-step geodesics shot with
    momenta ``mu +/- eps w``; it is mapped back to momenta at the new control
    points and rescaled to keep ``<w, w>_H`` constant. The template is then
    deformed by shooting the transported momenta from the geodesic endpoint.
    """
    sys0 = base_registration.system
    w = np.asarray(w, dtype=np.float64)
    if w.shape != sys0.c.shape:
        raise ValueError("w must be defined at the base registration's control points")
    n = cfg.n_steps
    h = 1.0 / n
    params = sys0.params
    c, mu = sys0.c, sys0.mu

    w_norm2 = hilbert_product(c, w, c, w, params)
    if w_norm2 == 0.0:
        out = template.with_vertices(template.vertices)
        return (out, ControlSystem(c, w, params)) if return_momenta else out

    for _ in range(n):
        mu_size = float(np.linalg.norm(mu))
        eps = 1e-3 * mu_size / float(np.linalg.norm(w)) if mu_size > 0 else 1e-3
        plus = shoot(ControlSystem(c, mu + eps * w, params), 1, h, cfg.scheme)
        minus = shoot(ControlSystem(c, mu - eps * w, params), 1, h, cfg.scheme)
        jacobi = (plus.c_path[-1] - minus.c_path[-1]) / (2.0 * eps)
        step = shoot(ControlSystem(c, mu, params), 1, h, cfg.scheme)
        c, mu = step.c_path[-1], step.mu_path[-1]
        w = np.linalg.solve(kernel_matrix(c, c, params), jacobi / h)
        norm2 = hilbert_product(c, w, c, w, params)
        if not (np.isfinite(norm2) and norm2 > 0):
            raise NonFiniteState("transported momenta degenerated")
        w = w * math.sqrt(w_norm2 / norm2)

    transported = ControlSystem(c, w, params)
    out = exponential(template, transported, cfg.n_steps, 1.0, cfg.scheme)
    return (out, transported) if return_momenta else out


def fanning_from_shapes(template: Mesh, subject: Mesh, subject_followup: Mesh,
                        cfg: RegistrationConfig, registrar: Registrar = register):
    """Fanning transport of ``[S, S']`` to ``T`` from shapes alone.

    Registers ``S -> T`` for the base geodesic, then ``S -> S'`` with the
    control points frozen at the base geodesic's initial control points so
    the deformation momenta live where the transport needs them.
    """
    base = registrar(subject, template, cfg)
    follow_cfg = cfg.replace(freeze_control_points=True)
    init = ControlSystem(base.system.c, np.zeros_like(base.system.c), base.system.params)
    follow = register(subject, subject_followup, follow_cfg, init=init)
    return fanning_transport(template, base, follow.system.mu, cfg)
