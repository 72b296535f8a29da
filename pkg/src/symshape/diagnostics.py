"""Error suite measuring how far the implemented operators are from an affine symmetric space.

For a template ``T``, a subject ``S`` and its follow-up ``S'``, with ``M`` the
midpoint of ``[T, S]`` shot from ``T``:

    midpoint distance    |midpoint(T, S) - midpoint(S, T)|
    centrality           |s_M(T) - S|
    involutivity         |s_M(s_M(S')) - S'|
    transvectivity       |s_T(s_M(S')) - s_M(s_S(S'))|
    inverse consistency  |psi_1(phi_1(T)) - T|, phi: T -> S, psi: S -> T

All distances are per-vertex RMS.
"""
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SymshapeError
from .geodesics import exponential
from .mesh import Mesh, check_corresponded
from .registration import RegistrationConfig, register
from .symmetric import VARIANTS, Registrar, Variant, midpoint, symmetry

log = logging.getLogger(__name__)

ERROR_TYPES = (
    "midpoint_distance",
    "centrality",
    "involutivity",
    "transvectivity",
    "inverse_consistency",
    "registration_error",
    "registration_norm",
)


def shape_rms(a: Mesh, b: Mesh) -> float:
    """Root mean square vertex distance between corresponded shapes."""
    check_corresponded(a, b)
    d = a.vertices - b.vertices
    return float(np.sqrt(np.mean(np.sum(d * d, axis=1))))


class CachedRegistrar:
    """Memoise registrations by exact input coordinates and config.

    Registration is deterministic, so a cache hit returns exactly what a fresh
    call would.
    """

    def __init__(self, registrar: Registrar = register):
        self._registrar = registrar
        self._cache = {}
        self.calls = 0
        self.hits = 0

    @staticmethod
    def _key(template: Mesh, target: Mesh, cfg: RegistrationConfig):
        h = hashlib.sha256()
        for arr in (template.vertices, target.vertices):
            h.update(repr(arr.shape).encode())
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest(), cfg

    def __call__(self, template, target, cfg):
        self.calls += 1
        key = self._key(template, target, cfg)
        if key in self._cache:
            self.hits += 1
        else:
            self._cache[key] = self._registrar(template, target, cfg)
        return self._cache[key]


class _Recorder:
    def __init__(self, registrar):
        self.registrar = registrar
        self.converged = True

    def __call__(self, template, target, cfg):
        result = self.registrar(template, target, cfg)
        self.converged &= bool(result.converged)
        return result


def midpoint_distance_error(T: Mesh, S: Mesh, cfg, variant=Variant.WITH_RESIDUAL,
                            registrar: Registrar = register) -> float:
    m_t, _ = midpoint(T, S, cfg, variant, registrar)
    m_s, _ = midpoint(S, T, cfg, variant, registrar)
    return shape_rms(m_t, m_s)


def centrality_error(T: Mesh, S: Mesh, cfg, variant=Variant.WITH_RESIDUAL,
                     registrar: Registrar = register) -> float:
    m, _ = midpoint(T, S, cfg, variant, registrar)
    return shape_rms(symmetry(m, T, cfg, variant, registrar).result, S)


def involutivity_error(T: Mesh, S: Mesh, S2: Mesh, cfg, variant=Variant.WITH_RESIDUAL,
                       registrar: Registrar = register) -> float:
    m, _ = midpoint(T, S, cfg, variant, registrar)
    once = symmetry(m, S2, cfg, variant, registrar).result
    twice = symmetry(m, once, cfg, variant, registrar).result
    return shape_rms(twice, S2)


def transvectivity_error(T: Mesh, S: Mesh, S2: Mesh, cfg, variant=Variant.WITH_RESIDUAL,
                         registrar: Registrar = register) -> float:
    m, _ = midpoint(T, S, cfg, variant, registrar)
    left = symmetry(T, symmetry(m, S2, cfg, variant, registrar).result, cfg, variant, registrar)
    right = symmetry(m, symmetry(S, S2, cfg, variant, registrar).result, cfg, variant, registrar)
    return shape_rms(left.result, right.result)


def inverse_consistency_error(T: Mesh, S: Mesh, cfg, registrar: Registrar = register) -> float:
    forward = registrar(T, S, cfg)
    backward = registrar(S, T, cfg)
    back = exponential(forward.deformed, backward.system, cfg.n_steps, 1.0, cfg.scheme)
    return shape_rms(back, T)


def evaluate_cell(T: Mesh, S: Mesh, S2: Mesh, cfg: RegistrationConfig,
                  variant=Variant.WITH_RESIDUAL, registrar: Registrar = register):
    """All error types for one (subject, alpha, variant) cell.

    Returns ``(errors, converged)`` where ``converged`` is whether every
    registration the cell used converged. Pass a :class:`CachedRegistrar` to
    share registrations between error types and variants.
    """
    variant = Variant(variant)
    rec = _Recorder(registrar)
    m_t, forward = midpoint(T, S, cfg, variant, rec)
    m_s, backward = midpoint(S, T, cfg, variant, rec)
    s_m_t = symmetry(m_t, T, cfg, variant, rec).result
    s_m_s2 = symmetry(m_t, S2, cfg, variant, rec).result
    s_m_s_m_s2 = symmetry(m_t, s_m_s2, cfg, variant, rec).result
    left = symmetry(T, s_m_s2, cfg, variant, rec).result
    right = symmetry(m_t, symmetry(S, S2, cfg, variant, rec).result, cfg, variant, rec).result
    back = exponential(forward.deformed, backward.system, cfg.n_steps, 1.0, cfg.scheme)
    errors = {
        "midpoint_distance": shape_rms(m_t, m_s),
        "centrality": shape_rms(s_m_t, S),
        "involutivity": shape_rms(s_m_s_m_s2, S2),
        "transvectivity": shape_rms(left, right),
        "inverse_consistency": shape_rms(back, T),
        "registration_error": forward.registration_error,
        "registration_norm": forward.velocity_norm,
    }
    return errors, rec.converged


@dataclass(frozen=True)
class CellResult:
    subject_id: int
    alpha_squared: float
    variant: Variant
    errors: dict
    converged: bool


@dataclass
class ErrorReport:
    cells: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (subject_id, alpha_squared, variant, message)

    def rows(self):
        """One row per subject x alpha x variant x error type."""
        for cell in self.cells:
            for name in ERROR_TYPES:
                yield (cell.subject_id, cell.alpha_squared, cell.variant.value, name,
                       cell.errors[name], cell.converged)

    def values(self, error_type, alpha_squared, variant):
        variant = Variant(variant)
        return np.array([c.errors[error_type] for c in self.cells
                         if c.alpha_squared == alpha_squared and c.variant is variant])

    def mean(self, error_type, alpha_squared, variant) -> float:
        vals = self.values(error_type, alpha_squared, variant)
        return float(vals.mean()) if vals.size else math.nan

    def summary(self):
        """Mean, median and quartiles per (alpha, variant, error type)."""
        out = []
        keys = sorted({(c.alpha_squared, c.variant.value) for c in self.cells})
        for alpha_squared, variant in keys:
            for name in ERROR_TYPES:
                vals = self.values(name, alpha_squared, variant)
                q1, med, q3 = np.percentile(vals, [25, 50, 75])
                out.append({
                    "alpha_squared": alpha_squared, "variant": variant, "error_type": name,
                    "n": int(vals.size), "mean": float(vals.mean()), "median": float(med),
                    "q1": float(q1), "q3": float(q3),
                })
        return out


def run_suite(population, T: Mesh, alphas, variants=VARIANTS, cfg: RegistrationConfig = None,
              **cfg_overrides) -> ErrorReport:
    """Evaluate every subject x alpha^2 x variant cell.

    ``population`` is a list of ``(S, S')`` pairs corresponded to ``T``.
    ``cfg`` supplies everything but ``alpha_squared``. A failing cell is
    logged in ``report.failures`` and the suite moves on.
    """
    report = ErrorReport()
    variants = [Variant(v) for v in variants]
    for subject_id, (S, S2) in enumerate(population):
        for alpha_squared in alphas:
            cell_cfg = cfg.replace(alpha_squared=float(alpha_squared), **cfg_overrides)
            registrar = CachedRegistrar()
            for variant in variants:
                try:
                    errors, converged = evaluate_cell(T, S, S2, cell_cfg, variant, registrar)
                except (SymshapeError, np.linalg.LinAlgError) as exc:
                    log.warning("cell %d/%g/%s failed: %s", subject_id, alpha_squared, variant, exc)
                    report.failures.append((subject_id, float(alpha_squared), variant.value, str(exc)))
                    continue
                report.cells.append(CellResult(subject_id, float(alpha_squared), variant,
                                               errors, converged))
                log.info("subject %d alpha^2=%g %s: %s", subject_id, alpha_squared, variant,
                         {k: round(v, 5) for k, v in errors.items()})
    return report
