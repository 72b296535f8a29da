"""Command line driver.

Exit codes: 0 success, 1 usage/config error, 2 computation or input-file error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, ExperimentConfig, format_config, load_config
from .diagnostics import run_suite
from .exceptions import SymshapeError
from .geodesics import exponential
from .mesh import load_mesh, save_mesh
from .registration import register
from .strain import area_strain_error, local_area_strain
from .symmetric import Variant, midpoint, symmetry
from .synthetic import generate_synthetic_population
from .transport import fanning_from_shapes, pole_ladder

log = logging.getLogger("symshape")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _config(args) -> ExperimentConfig:
    return load_config(args.config) if args.config else ExperimentConfig()


def _reg_cfg(args, cfg: ExperimentConfig):
    try:
        return cfg.registration(args.alpha_squared)
    except ValueError as exc:
        raise UsageError(f"--alpha-squared: {exc}") from None


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_register(args):
    cfg = _config(args)
    template, target = load_mesh(args.template), load_mesh(args.target)
    result = register(template, target, _reg_cfg(args, cfg))
    out = _out(args)
    io.save_json(io.registration_summary(result), out / "result.json")
    io.save_momenta(result.system, out / "momenta.csv")
    save_mesh(result.deformed, out / "deformed.off")
    io.save_field(result.delta, out / "delta.csv")


def cmd_shoot(args):
    cfg = _config(args)
    shape = load_mesh(args.template)
    sys_ = io.load_momenta(args.momenta, sigma=cfg.sigma)
    deformed = exponential(shape, sys_, cfg.n_steps, args.t_end, cfg.scheme)
    save_mesh(deformed, _out(args) / "deformed.off")


def cmd_midpoint(args):
    cfg = _config(args)
    m, reg = midpoint(load_mesh(args.base), load_mesh(args.other), _reg_cfg(args, cfg), args.variant)
    out = _out(args)
    save_mesh(m, out / "midpoint.off")
    io.save_json(io.registration_summary(reg), out / "result.json")


def cmd_symmetry(args):
    cfg = _config(args)
    outcome = symmetry(load_mesh(args.center), load_mesh(args.subject), _reg_cfg(args, cfg),
                       args.variant)
    out = _out(args)
    save_mesh(outcome.result, out / "symmetric.off")
    io.save_json(io.registration_summary(outcome.registration), out / "result.json")


def cmd_pole_ladder(args):
    cfg = _config(args)
    reg_cfg = _reg_cfg(args, cfg)
    template = load_mesh(args.template)
    subject, followup = load_mesh(args.subject), load_mesh(args.followup)
    n_rungs = args.n_rungs if args.n_rungs is not None else cfg.n_rungs
    transported, trace = pole_ladder(template, subject, followup, reg_cfg, args.variant,
                                     n_rungs=n_rungs, report_log=args.log)
    out = _out(args)
    save_mesh(transported, out / "transported.off")
    for k, rung in enumerate(trace.rungs):
        save_mesh(rung.midpoint, out / f"rung_{k:02d}_midpoint.off")
        save_mesh(rung.reflected, out / f"rung_{k:02d}_reflected.off")
    summary = {
        "variant": trace.variant.value,
        "n_rungs": len(trace.rungs),
        "n_midpoints": trace.n_midpoints,
        "n_symmetries": trace.n_symmetries,
        "converged": [list(r.converged) for r in trace.rungs],
        "subdivision_converged": list(trace.subdivision_converged),
    }
    if trace.log is not None:
        io.save_momenta(trace.log.system, out / "log_momenta.csv")
        summary["log"] = io.registration_summary(trace.log)
    if args.fanning:
        fan = fanning_from_shapes(template, subject, followup, reg_cfg)
        save_mesh(fan, out / "fanning.off")
    io.save_json(summary, out / "trace.json")


def cmd_errors(args):
    cfg = _config(args)
    template, pairs = io.load_population(args.population)
    if args.subjects is not None:
        pairs = pairs[: args.subjects]
    report = run_suite(pairs, template, cfg.alpha_squared, cfg.variants, cfg.registration())
    out = _out(args)
    io.save_report_csv(report, out / "report.csv")
    io.save_json({
        "cells": report.summary(),
        "failures": [list(f) for f in report.failures],
        "n_subjects": len(pairs),
    }, out / "summary.json")
    if report.failures:
        log.warning("%d cells failed", len(report.failures))


def cmd_strain(args):
    a, b = load_mesh(args.reference), load_mesh(args.deformed)
    las = local_area_strain(a, b)
    out = _out(args)
    io.save_las(a, las, out / "las.csv")
    summary = {"mean_las": float(np.mean(las))}
    if args.compare_reference or args.compare_deformed:
        if not (args.compare_reference and args.compare_deformed):
            raise UsageError("--compare-reference and --compare-deformed go together")
        c, d = load_mesh(args.compare_reference), load_mesh(args.compare_deformed)
        las2 = local_area_strain(c, d)
        io.save_las(c, las2, out / "las_compare.csv")
        summary["area_strain_error"] = area_strain_error(las, las2)
    io.save_json(summary, out / "strain.json")


def cmd_synth(args):
    cfg = _config(args)
    seed = cfg.seed if args.seed is None else args.seed
    n = cfg.n_subjects if args.n_subjects is None else args.n_subjects
    template, pairs = generate_synthetic_population(seed, n, cfg.population())
    io.save_population(template, pairs, args.out)
    (Path(args.out) / "config.cfg").write_text(format_config(cfg.replace(seed=seed, n_subjects=n)))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="symshape", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--config", help="experiment config file (key = value)")
        p.add_argument("--out", required=True, help="output directory")
        return p

    def with_alpha(p):
        p.add_argument("--alpha-squared", type=float, default=None,
                       help="overrides the first alpha_squared of the config")
        return p

    def with_variant(p):
        p.add_argument("--variant", choices=[v.value for v in Variant], default="with_residual")
        return p

    p = with_alpha(add("register", cmd_register, "register a template onto a target"))
    p.add_argument("--template", required=True)
    p.add_argument("--target", required=True)

    p = add("shoot", cmd_shoot, "deform a shape along a geodesic")
    p.add_argument("--template", required=True)
    p.add_argument("--momenta", required=True, help="CSV index,x,y,z,mx,my,mz")
    p.add_argument("--t-end", type=float, default=1.0)

    p = with_variant(with_alpha(add("midpoint", cmd_midpoint, "midpoint shot from --base")))
    p.add_argument("--base", required=True)
    p.add_argument("--other", required=True)

    p = with_variant(with_alpha(add("symmetry", cmd_symmetry, "reflect --subject through --center")))
    p.add_argument("--center", required=True)
    p.add_argument("--subject", required=True)

    p = with_variant(with_alpha(add("pole-ladder", cmd_pole_ladder, "transport [S, S'] to T")))
    p.add_argument("--template", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--followup", required=True)
    p.add_argument("--n-rungs", type=int, default=None)
    p.add_argument("--log", action="store_true", help="also register T -> T'")
    p.add_argument("--fanning", action="store_true", help="also run the fanning scheme")

    p = add("errors", cmd_errors, "run the diagnostic error suite on a population")
    p.add_argument("--population", required=True, help="directory written by 'synth'")
    p.add_argument("--subjects", type=int, default=None, help="use only the first N subjects")

    p = add("strain", cmd_strain, "local area strain between two meshes")
    p.add_argument("--reference", required=True)
    p.add_argument("--deformed", required=True)
    p.add_argument("--compare-reference")
    p.add_argument("--compare-deformed")

    p = add("synth", cmd_synth, "generate a synthetic population")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-subjects", type=int, default=None)
    return parser


def _unknown_flags(parser: argparse.ArgumentParser, argv) -> list:
    """Flags not accepted by the chosen subcommand (argparse reports missing ones first)."""
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((tok for tok in argv if tok in sub.choices), None)
    known = set(parser._option_string_actions)
    if command is not None:
        known |= set(sub.choices[command]._option_string_actions)
    return [tok for tok in argv if tok.startswith("-") and not _is_number(tok)
            and tok.split("=", 1)[0] not in known]


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        unknown = _unknown_flags(parser, argv)
        if unknown:
            exc = f"symshape: error: unrecognized arguments: {' '.join(unknown)}"
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"symshape {args.command}: {exc}", file=sys.stderr)
        return 1
    except (SymshapeError, OSError, np.linalg.LinAlgError) as exc:
        print(f"symshape {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
