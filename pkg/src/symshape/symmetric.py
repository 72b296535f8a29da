"""Residual-corrected midpoint and geodesic symmetry on shapes.

A registration of ``T`` onto ``S`` splits the target into a deformation part
and a Euclidean residual, ``S = phi_1(T) + delta``. The operators below invert
or halve both parts:

    midpoint(T, S)  = phi_1/2(T) + delta / 2
    symmetry(T, S)  = Exp_T(-Log_T(S)) - delta

``delta`` is applied in ambient coordinates by vertex index; it is not
transported. The ``without_residual`` variant drops it (``delta = 0``).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

from .geodesics import exponential, half_steps
from .mesh import Mesh
from .registration import RegistrationConfig, RegistrationResult, register

Registrar = Callable[[Mesh, Mesh, RegistrationConfig], RegistrationResult]


class Variant(str, enum.Enum):
    WITH_RESIDUAL = "with_residual"
    WITHOUT_RESIDUAL = "without_residual"

    def __str__(self):
        return self.value


VARIANTS = (Variant.WITH_RESIDUAL, Variant.WITHOUT_RESIDUAL)


@dataclass(frozen=True, eq=False)
class SymmetryOutcome:
    result: Mesh
    registration: RegistrationResult
    variant: Variant


def midpoint(base: Mesh, other: Mesh, cfg: RegistrationConfig,
             variant=Variant.WITH_RESIDUAL, registrar: Registrar = register):
    """Midpoint of ``[base, other]`` shot from ``base``.

    Returns ``(M, registration)`` where the registration is ``base -> other``.
    The half geodesic is integrated to ``t = 1/2`` with half the step count,
    keeping the step size of the full geodesic.
    """
    variant = Variant(variant)
    reg = registrar(base, other, cfg)
    half = exponential(base, reg.system, half_steps(cfg.n_steps), 0.5, cfg.scheme)
    if variant is Variant.WITH_RESIDUAL:
        half = half + 0.5 * reg.delta
    return half, reg


def symmetry(center: Mesh, subject: Mesh, cfg: RegistrationConfig,
             variant=Variant.WITH_RESIDUAL, registrar: Registrar = register) -> SymmetryOutcome:
    """Reflect ``subject`` through ``center``.

    Registers ``center -> subject`` and shoots from ``center`` with the negated
    momenta at the same control points; the residual lives at the subject's
    vertices and is subtracted from the endpoint by index.
    """
    variant = Variant(variant)
    reg = registrar(center, subject, cfg)
    reflected = exponential(center, reg.system.negated(), cfg.n_steps, 1.0, cfg.scheme)
    if variant is Variant.WITH_RESIDUAL:
        reflected = reflected - reg.delta
    return SymmetryOutcome(reflected, reg, variant)
