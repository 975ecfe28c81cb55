"""Command-line front end.

Exit codes: 0 success, 1 a requested property failed, 2 bad input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import curvature as cc
from . import diagnostics as dg
from . import exact
from . import flow as fl
from . import io
from . import profiles as pr
from .errors import (ConeExit, DomainError, GammaFlowError, Instability, NotATranslator,
                     RootBracketFailure, StepTooLarge)
from .geometry import gamma_field, shape_field

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC = (ConeExit, RootBracketFailure, Instability, StepTooLarge)
DIAG_EXTENT = 1.5
DIAG_RES = 61

_NAMES = {
    "mean": cc.Kind.MEAN, "gauss": cc.Kind.GAUSS_ROOT, "gaussroot": cc.Kind.GAUSS_ROOT,
    "power": cc.Kind.POWER_MEAN, "powermean": cc.Kind.POWER_MEAN,
    "sigma": cc.Kind.SIGMA_K_ROOT, "sigmak": cc.Kind.SIGMA_K_ROOT,
    "sigmakroot": cc.Kind.SIGMA_K_ROOT,
}


class InputError(Exception):
    """Bad command-line input (exit code 2)."""


def parse_spec(text: str, n: int) -> cc.CurvatureSpec:
    """A spec from JSON or a short name: ``mean``, ``gauss``, ``power:P``, ``sigma:K``.

    Short names and JSON objects without ``n`` take the dimension ``n``.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed spec JSON: {exc}") from exc
        spec = cc.CurvatureSpec.from_dict(data, n=n)
        if spec.n != n:
            raise InputError(f"spec dimension {spec.n} does not match n = {n}")
        return spec
    name, _, arg = text.lower().partition(":")
    kind = _NAMES.get(name.replace("_", "").replace("-", ""))
    if kind is None:
        raise InputError(f"unknown spec name {text!r}")
    try:
        if kind is cc.Kind.POWER_MEAN:
            return cc.CurvatureSpec.power_mean(float(arg or 2.0), n)
        if kind is cc.Kind.SIGMA_K_ROOT:
            return cc.CurvatureSpec.sigma_k_root(int(arg or 2), n)
    except ValueError as exc:
        raise InputError(f"bad parameter in spec {text!r}") from exc
    if arg:
        raise InputError(f"spec {name!r} takes no parameter")
    return cc.CurvatureSpec(kind, n)


def _fmt(x) -> str:
    return f"{x:.6e}" if isinstance(x, float) and math.isfinite(x) else str(x)


def _outdir(args) -> Path:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_gamma_check(args) -> int:
    try:
        data = json.loads(args.spec)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    spec = cc.CurvatureSpec.from_dict(data)
    bad = [f for f in args.require if f not in cc.Classification.FLAGS]
    if bad:
        raise InputError(f"unknown properties {bad}; choose from {list(cc.Classification.FLAGS)}")
    cls = cc.classify(spec, sample_count=args.samples, seed=args.seed)
    report = {"spec": spec.to_dict(), "label": spec.label(), **cls.to_dict()}
    print(io.to_json(report))
    failed = [f for f in args.require if not getattr(cls, f)]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_grim(args) -> int:
    spec_g = exact.GrimSpec(omega=args.omega, n=args.n, h0=args.h0)
    spec = parse_spec(args.spec, args.n)
    patch = exact.grim_patch(spec_g, args.res)
    shape = shape_field(patch, derivatives="exact")
    gf = gamma_field(shape, spec)
    res = np.abs(gf.gamma - shape.nu[..., -1])
    path = _outdir(args) / args.out
    io.write_patch(path, patch, shape, spec)
    print(f"grim omega={spec_g.omega:.17g} n={args.n} res={args.res} spec={spec.label()} "
          f"max_residual={_fmt(float(np.max(res)))} -> {path}")
    return EXIT_OK


def cmd_bowl(args) -> int:
    spec = parse_spec(args.spec, args.n)
    sol = pr.shoot_bowl(spec, args.n, args.r_max, args.step)
    path = _outdir(args) / args.out
    io.write_profile(path, sol)
    print(f"bowl spec={spec.label()} r_max={sol.abscissa[-1]:g} step={args.step:g} "
          f"u''(0)={sol.ddu[0]:.12g} max_residual={_fmt(float(np.max(np.abs(sol.residual))))} "
          f"min_lambda={_fmt(float(np.min(sol.lam[1:])))} -> {path}")
    return EXIT_OK


def _grim_flow_patch(args):
    spec_g = exact.GrimSpec(omega=args.omega, n=args.n)
    lo, hi = 0.1 * spec_g.omega, 0.9 * spec_g.omega
    res = args.res if args.res else int(round((hi - lo) / args.h)) + 1
    return exact.grim_patch(spec_g, res, x1_range=(lo, hi))


def cmd_flow(args) -> int:
    if args.input:
        patch = io.read_patch(args.input)
        boundary = fl.Boundary.FROZEN
    else:
        patch = _grim_flow_patch(args)
        boundary = fl.Boundary(args.boundary)
    spec = parse_spec(args.spec, patch.n)
    policy = fl.FixedStep(args.dt) if args.dt else fl.CFL(args.cfl)
    config = fl.FlowConfig(spec, policy, args.T, boundary)
    run = fl.run(patch, config)
    path = _outdir(args) / args.out
    io.write_flow(path, run.series())
    line = (f"flow spec={spec.label()} T={args.T:g} steps={run.steps} "
            f"h={float(np.min(patch.spacing)):.6g} dt={float(run.dt[0]):.6g}")
    if boundary is fl.Boundary.PINNED:
        line += f" self_similarity_error={_fmt(fl.self_similarity_error(run))}"
    print(f"{line} -> {path}")
    return EXIT_OK


def _load_input(args):
    """Patch from a patch CSV, or from a profile CSV revolved onto a grid."""
    header, data = io.read_table(args.input)
    if tuple(header) == io.PROFILE_COLUMNS:
        sol = io.profile_from_table(header, data)
        n = args.n or 2
        return pr.profile_to_patch(sol, n, args.res or DIAG_RES, extent=args.extent or DIAG_EXTENT)
    return io.patch_from_table(header, data)


def _prepare(args):
    patch = _load_input(args)
    spec = parse_spec(args.spec, patch.n)
    shape = shape_field(patch)
    return patch, spec, shape, gamma_field(shape, spec)


def cmd_residual(args) -> int:
    patch, spec, shape, gf = _prepare(args)
    res = dg.translator_residual(shape, gf)
    if args.out:
        path = _outdir(args) / args.out
        io.write_patch(path, patch, shape, spec)
    print(f"residual spec={spec.label()} max={_fmt(res.max)} mean={_fmt(res.mean)}")
    return EXIT_OK if args.tol is None or res.max <= args.tol else EXIT_PROPERTY


def cmd_identity(args) -> int:
    patch, spec, shape, gf = _prepare(args)
    chk = dg.identity_check(patch, shape, spec, gf, tol=args.tol)
    if args.out:
        path = _outdir(args) / args.out
        io.write_dump(path, dg.dump_columns(patch.n), dg.dump_fields(patch, shape, gf))
    print(f"identity spec={spec.label()} max={_fmt(chk.max)} translator_residual={_fmt(chk.residual.max)}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    patch, spec, shape, gf = _prepare(args)
    verdict = dg.dichotomy_report(patch, shape, gf, spec, tol=args.tol)
    text = io.to_json(verdict.to_dict())
    if args.out:
        out = _outdir(args)
        io.write_json(out / args.out, verdict.to_dict())
        if args.dump:
            io.write_dump(out / args.dump, dg.dump_columns(patch.n), dg.dump_fields(patch, shape, gf))
    print(text)
    if args.expect and verdict.branch.value != args.expect:
        return EXIT_PROPERTY
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gammaflow", description="Translators of curvature flows.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", help="curvature function utilities")
    gsub = g.add_subparsers(dest="action", required=True)
    chk = gsub.add_parser("check", help="classify a curvature spec given as JSON")
    chk.add_argument("spec")
    chk.add_argument("--require", nargs="+", default=[], metavar="PROPERTY")
    chk.add_argument("--samples", type=int, default=1000)
    chk.add_argument("--seed", type=int, default=0)
    chk.set_defaults(func=cmd_gamma_check)

    def common(q, out_default):
        q.add_argument("--outdir", default=".")
        q.add_argument("--out", default=out_default)

    q = sub.add_parser("grim", help="sample an exact Grim Reaper cylinder")
    q.add_argument("--omega", type=float, default=math.pi)
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--res", type=int, default=101)
    q.add_argument("--h0", type=float, default=0.0)
    q.add_argument("--spec", default="mean")
    common(q, "grim.csv")
    q.set_defaults(func=cmd_grim)

    q = sub.add_parser("bowl", help="shoot a rotationally symmetric translator")
    q.add_argument("--spec", default="mean")
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--r-max", type=float, default=20.0)
    q.add_argument("--step", type=float, default=1e-2)
    common(q, "bowl.csv")
    q.set_defaults(func=cmd_bowl)

    q = sub.add_parser("flow", help="evolve a patch under the flow")
    src = q.add_mutually_exclusive_group()
    src.add_argument("--grim", action="store_true", help="Grim Reaper initial data (default)")
    src.add_argument("--input", help="patch CSV (boundary frozen)")
    q.add_argument("--omega", type=float, default=math.pi)
    q.add_argument("--n", type=int, default=1)
    q.add_argument("--h", type=float, default=math.pi / 400)
    q.add_argument("--res", type=int, default=0, help="points per axis (overrides --h)")
    q.add_argument("--spec", default="mean")
    q.add_argument("--T", type=float, default=0.1)
    step = q.add_mutually_exclusive_group()
    step.add_argument("--cfl", type=float, default=0.5)
    step.add_argument("--dt", type=float, default=0.0)
    q.add_argument("--boundary", default=fl.Boundary.PINNED.value,
                   choices=[b.value for b in fl.Boundary])
    common(q, "flow.csv")
    q.set_defaults(func=cmd_flow)

    for name, func, out_default, help_ in (
        ("residual", cmd_residual, None, "translator residual of a patch"),
        ("identity", cmd_identity, None, "evolution identity residual of a patch"),
        ("diagnose", cmd_diagnose, None, "convex-or-cylinder verdict for a patch"),
    ):
        q = sub.add_parser(name, help=help_)
        q.add_argument("--input", required=True, help="patch CSV or profile CSV")
        q.add_argument("--spec", default="mean")
        q.add_argument("--n", type=int, default=0, help="dimension for profile input")
        q.add_argument("--res", type=int, default=0, help="grid points per axis for profile input")
        q.add_argument("--extent", type=float, default=0.0, help="half-width for profile input")
        if name == "residual":
            q.add_argument("--tol", type=float, default=None)
        else:
            q.add_argument("--tol", type=float, default=dg.DEFAULT_TOL)
        if name == "diagnose":
            q.add_argument("--expect", choices=[b.value for b in dg.Branch])
            q.add_argument("--dump", default=None, help="field dump CSV (with --out)")
        common(q, out_default)
        q.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except NotATranslator as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except NUMERIC as exc:
        where = ""
        if getattr(exc, "index", None) is not None:
            where = f" at index {exc.index}"
        if getattr(exc, "interval", None) is not None:
            where += f" (interval {exc.interval})"
        if getattr(exc, "time", None) is not None:
            where += f" at t = {exc.time:.6g}"
        print(f"numerical failure: {exc}{where}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, DomainError, GammaFlowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
