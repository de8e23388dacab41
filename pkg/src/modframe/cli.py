"""Command line interface: ``modframe <group> <command> BUNDLE [options]``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 on unusable input.  JSON reports are the stable interface; ``--format
text`` prints a human-oriented summary.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Callable

import numpy as np

from .algebra import FiniteSpectrum, alg_leq, alg_norm
from .commutant import (
    EquivalenceError,
    GroupVonNeumann,
    NotInAlgebra,
    check_lemma33,
    random_unitary,
    rep_bicommutant,
    rep_commutant,
    trace_phi,
)
from .frames import (
    NotAFrame,
    canonical_dual,
    canonical_parseval,
    frame_bounds,
    reconstruct_residual,
)
from .groupsys import classify_vector, dilate
from .hilbert_module import ModuleOperator, inner, module_norm, op_norm
from .io import BundleError, InstanceBundle, RunReport, dumps, load_bundle, save_bundle
from .parametrize import (
    ParameterizationError,
    apply_generator,
    best_parseval_approx,
    certify_optimality,
    connect_parseval_vectors,
    solve_generator,
)
from .random_instances import CapExceeded, InstanceSpec, named_group, rand_instance, random_element

DEFAULT_TOL = 1e-8


class InputError(Exception):
    """Bad command line input (exit code 2)."""


def _default_tol() -> float:
    env = os.environ.get("MODFRAME_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        return float(env)
    except ValueError:
        raise InputError(f"MODFRAME_TOL={env!r} is not a number") from None


def _pick(collection: dict, name: str | None, what: str):
    if not collection:
        raise InputError(f"bundle has no {what}")
    if name is None:
        name = sorted(collection)[0]
    if name not in collection:
        raise InputError(f"no {what} named {name!r} (have {sorted(collection)})")
    return collection[name]


def _rep(bundle: InstanceBundle):
    if bundle.representation is None:
        raise InputError("bundle has no representation")
    return bundle.representation


# ---------------------------------------------------------------------------
# command handlers; each fills a RunReport


def cmd_validate(args, bundle: InstanceBundle, report: RunReport) -> None:
    report.results.update({
        "spectrum": bundle.spectrum.to_json(),
        "fiber_dims": list(bundle.module.fiber_dims),
        "group_order": len(bundle.group) if bundle.group else None,
        "has_representation": bundle.representation is not None,
        "frames": sorted(bundle.frames),
        "generators": sorted(bundle.generators),
        "vectors": sorted(bundle.vectors),
        "operators": sorted(bundle.operators),
    })
    report.verdicts["valid"] = True


def cmd_frame_analyze(args, bundle, report) -> None:
    frame = _pick(bundle.frames, args.frame, "frames")
    bounds = frame_bounds(frame, args.tol)
    report.results["bounds"] = bounds.to_json()
    rng = np.random.default_rng(args.seed)
    x = bundle.vectors[args.vector] if args.vector else random_element(frame.shape, rng)
    if args.vector and x.shape != frame.shape:
        raise InputError("vector and frame live in different modules")
    # frame inequality on the probe vector, in the cone order of A
    xx = inner(x, x)
    mid = sum((inner(x, v) * inner(v, x) for v in frame), start=xx * 0.0)
    report.verdicts["lower_inequality"] = alg_leq(xx * bounds.lower, mid, 1e-9 * max(1, bounds.upper))
    report.verdicts["upper_inequality"] = alg_leq(mid, xx * bounds.upper, 1e-9 * max(1, bounds.upper))
    if bounds.is_frame:
        res = reconstruct_residual(frame, x, args.tol)
        report.results["reconstruction_residual"] = res
        report.verdicts["reconstruction"] = res <= 1e-8 * max(module_norm(x), 1e-300)
        dd = canonical_dual(canonical_dual(frame, args.tol), args.tol)
        inv = max(module_norm(a - b) for a, b in zip(dd, frame))
        report.results["dual_involution_residual"] = inv
        report.verdicts["dual_involution"] = inv <= 1e-8


def cmd_frame_parseval(args, bundle, report) -> None:
    frame = _pick(bundle.frames, args.frame, "frames")
    pf = canonical_parseval(frame, args.tol)
    res = op_norm(pf.frame_op - ModuleOperator.identity(pf.shape))
    report.results.update({"frame": pf.to_json(), "identity_residual": res,
                           "bounds": frame_bounds(pf).to_json()})
    report.verdicts["parseval"] = res <= 1e-9 * max(1.0, op_norm(frame.frame_op))


def cmd_group_classify(args, bundle, report) -> None:
    rep = _rep(bundle)
    x = _pick(bundle.vectors, args.vector, "vectors")
    report.results["classification"] = classify_vector(rep, x, args.tol).to_json()


def cmd_group_dilate(args, bundle, report) -> None:
    rep = _rep(bundle)
    eta = _pick(bundle.vectors, args.vector or "eta", "vectors")
    dil = dilate(rep, eta, args.tol)
    res = dil.residuals(rep)
    report.results.update({"T": dil.T.to_json(), "P": dil.P.to_json(), "residuals": res})
    for k, v in res.items():
        report.verdicts[k] = v <= 1e-9


def cmd_commutant_compute(args, bundle, report) -> None:
    rep = _rep(bundle)
    which = args.of
    alg = {"G'": rep_commutant, "G''": rep_bicommutant}[which](rep)
    worst = 0.0
    if which == "G'":
        for b in alg.basis:
            for u in rep.images:
                worst = max(worst, op_norm(b @ u - u @ b))
    report.results.update({"of": which, "dims": list(alg.dims), "unital": alg.unital,
                           "star_closed": alg.star_closed, "commutation_residual": worst})
    if args.emit_basis:
        report.results["basis"] = [b.to_json() for b in alg.basis]
    report.verdicts["commutes"] = worst <= 1e-10


def _group_and_spectrum(args, bundle):
    if args.group:
        return named_group(args.group), FiniteSpectrum.of_size(args.points)
    if bundle is None or bundle.group is None:
        raise InputError("give a bundle with a group, or --group NAME")
    return bundle.group, bundle.spectrum


def cmd_commutant_lemma33(args, bundle, report) -> None:
    group, spectrum = _group_and_spectrum(args, bundle)
    rep = check_lemma33(group, spectrum, np.random.default_rng(args.seed))
    report.results.update(rep.to_json())
    report.verdicts["lemma33"] = rep.passed


def cmd_commutant_trace(args, bundle, report) -> None:
    group, spectrum = _group_and_spectrum(args, bundle)
    ctx = GroupVonNeumann(group, spectrum)
    rng = np.random.default_rng(args.seed)
    worst_tr, worst_faith = 0.0, np.inf
    for _ in range(args.pairs):
        a = ctx.M.random_element(rng)
        b = ctx.M.random_element(rng)
        worst_tr = max(worst_tr, alg_norm(trace_phi(ctx, a @ b) - trace_phi(ctx, b @ a)))
        pos = a.H @ a
        # phi(A) >= ||A|| / |G| fiberwise for positive A in M
        ratio = min(trace_phi(ctx, pos).values.real[t] * len(group) / np.linalg.norm(m, 2)
                    for t, m in enumerate(pos.fibers))
        worst_faith = min(worst_faith, ratio)
    report.results.update({"pairs": args.pairs, "trace_residual": worst_tr,
                           "faithfulness_ratio_min": worst_faith})
    report.verdicts["tracial"] = worst_tr <= 1e-10
    report.verdicts["faithful"] = worst_faith >= 1 - 1e-8


def cmd_param_solve(args, bundle, report) -> None:
    rep = _rep(bundle)
    eta = _pick(bundle.vectors, args.eta, "vectors")
    xi = _pick(bundle.vectors, args.xi, "vectors")
    w = solve_generator(rep, eta, xi, np.random.default_rng(args.seed), args.kind, args.tol)
    report.results["witness"] = w.to_json()
    report.verdicts["generation"] = w.residuals["generation"] <= 1e-8
    report.verdicts["membership"] = w.residuals["membership"] <= 1e-8
    if args.kind == "unitary":
        report.verdicts["unitarity"] = w.residuals["unitarity"] <= 1e-8


def _random_of_kind(rep, kind, rng) -> ModuleOperator:
    gdd = rep_bicommutant(rep)
    u = random_unitary(gdd, rng)
    if kind == "unitary":
        return u
    y = gdd.random_element(rng)
    pos = y.H @ y + ModuleOperator.identity(rep.shape)
    return u @ pos if kind == "invertible" else gdd.random_element(rng)


def cmd_param_apply(args, bundle, report) -> None:
    rep = _rep(bundle)
    eta = _pick(bundle.vectors, args.eta, "vectors")
    if args.operator:
        a = _pick(bundle.operators, args.operator, "operators")
    else:
        a = _random_of_kind(rep, args.kind, np.random.default_rng(args.seed))
    xi, cls = apply_generator(rep, eta, a, args.kind, args.tol)
    report.results.update({"xi": xi.to_json(), "classification": cls.to_json(),
                           "kind": args.kind})
    report.verdicts["postcondition"] = True


def cmd_param_path(args, bundle, report) -> None:
    rep = _rep(bundle)
    eta = _pick(bundle.vectors, args.eta, "vectors")
    xi = _pick(bundle.vectors, args.xi, "vectors")
    path = connect_parseval_vectors(rep, eta, xi, args.steps, np.random.default_rng(args.seed))
    report.results["path"] = path.to_json()
    report.verdicts["all_complete_parseval"] = path.all_parseval
    report.verdicts["membership"] = path.max_membership <= 1e-7
    report.verdicts["endpoint"] = path.max_endpoint_error <= 1e-7


def cmd_approx_best(args, bundle, report) -> None:
    rep = _rep(bundle)
    phi = _pick(bundle.generators, args.generators, "generators")
    ar = best_parseval_approx(rep, phi, args.tol)
    report.results.update(ar.to_json())
    report.verdicts["S_in_G_prime"] = ar.residuals["S_commutes_with_G"] <= 1e-9
    report.verdicts["best_parseval"] = ar.residuals["best_parseval"] <= 1e-9


def cmd_approx_certify(args, bundle, report) -> None:
    rep = _rep(bundle)
    phi = _pick(bundle.generators, args.generators, "generators")
    ar = certify_optimality(rep, phi, args.samples, np.random.default_rng(args.seed))
    report.results.update(ar.to_json())
    report.verdicts["gaps_nonnegative"] = bool(ar.all_gaps_nonnegative)
    report.verdicts["uniqueness"] = bool(ar.uniqueness_ok)
    report.verdicts["cross_term_identity"] = ar.residuals["cross_term_identity"] <= 1e-9
    report.verdicts["energy_equality"] = ar.residuals["energy_equality"] <= 1e-9


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None,
                   help="classification tolerance (default: $MODFRAME_TOL or 1e-8)")
    p.add_argument("--seed", type=int, default=0, help="seed for every random draw (default 0)")
    p.add_argument("--out", help="write the report to this path instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json",
                   help="report format (default json)")
    p.add_argument("--timing", action="store_true",
                   help="include wall time in the report (breaks byte-identical output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modframe",
        description="Frames, Parseval frame vectors and best Parseval approximations "
                    "on Hilbert C(X)-modules with finite spectrum.")
    sub = parser.add_subparsers(dest="group", required=True)

    def leaf(parent, name, handler: Callable, help_: str, bundle: str = "required"):
        prefix = groups[id(parent)]
        p = parent.add_parser(name, help=help_, description=help_)
        if bundle == "required":
            p.add_argument("bundle", help="instance bundle (JSON)")
        elif bundle == "optional":
            p.add_argument("bundle", nargs="?", help="instance bundle (JSON)")
        _common(p)
        p.set_defaults(handler=handler, command=f"{prefix} {name}")
        return p

    p = sub.add_parser("validate", help="load and validate a bundle",
                       description="Load and validate a bundle.")
    p.add_argument("bundle")
    _common(p)
    p.set_defaults(handler=cmd_validate, command="validate")

    groups: dict[int, str] = {}

    def group(name: str, help_: str):
        action = sub.add_parser(name, help=help_, description=help_).add_subparsers(
            dest="cmd", required=True)
        groups[id(action)] = name
        return action

    frame = group("frame", "frame analysis")
    p = leaf(frame, "analyze", cmd_frame_analyze, "frame bounds, classification, reconstruction")
    p.add_argument("--frame", help="frame name (default: first)")
    p.add_argument("--vector", help="probe vector name (default: seeded random)")
    p = leaf(frame, "parseval", cmd_frame_parseval, "canonical Parseval frame S^-1/2 x_j")
    p.add_argument("--frame", help="frame name (default: first)")

    grp = group("group", "representations and vectors")
    p = leaf(grp, "classify-vector", cmd_group_classify, "classify a vector for the representation")
    p.add_argument("--vector", help="vector name (default: first)")
    p = leaf(grp, "dilate", cmd_group_dilate, "dilate a complete Parseval frame vector")
    p.add_argument("--vector", help="vector name (default: eta)")

    com = group("commutant", "commutants and the group algebras")
    p = leaf(com, "compute", cmd_commutant_compute, "commutant or bicommutant of the representation")
    p.add_argument("--of", choices=("G'", "G''"), default="G'", help="which algebra (default G')")
    p.add_argument("--emit-basis", action="store_true", help="include the basis operators")
    for name, handler, help_ in (("lemma33", cmd_commutant_lemma33,
                                  "check {L}'' = {R}' and {R}'' = {L}' on l^2_G(A)"),
                                 ("trace-check", cmd_commutant_trace,
                                  "trace property and faithfulness of phi on {L}''")):
        p = leaf(com, name, handler, help_, bundle="optional")
        p.add_argument("--group", help="named group (Zn, Z2xZ2, S3, Dn, ...) instead of a bundle")
        p.add_argument("--points", type=int, default=1, help="spectrum size with --group")
        if name == "trace-check":
            p.add_argument("--pairs", type=int, default=100, help="random pairs (default 100)")

    par = group("param", "frame vector parameterization")
    for name, handler, help_ in (("solve", cmd_param_solve, "find A in G'' with A eta = xi"),
                                 ("apply", cmd_param_apply, "xi = A eta for A in G''"),
                                 ("path", cmd_param_path, "path of Parseval frame vectors")):
        p = leaf(par, name, handler, help_)
        p.add_argument("--eta", default="eta", help="base Parseval vector (default eta)")
        if name != "apply":
            p.add_argument("--xi", default="xi", help="target vector (default xi)")
        if name != "path":
            p.add_argument("--kind", choices=("unitary", "invertible", "adjointable"),
                           default="unitary")
        if name == "apply":
            p.add_argument("--operator", help="operator name (default: seeded random of --kind)")
        if name == "path":
            p.add_argument("--steps", type=int, default=16)

    apx = group("approx", "best Parseval approximation")
    p = leaf(apx, "best", cmd_approx_best, "S^-1/2 Phi")
    p.add_argument("--generators", help="generator tuple name (default: first)")
    p = leaf(apx, "certify", cmd_approx_certify, "sample Parseval generators and compare")
    p.add_argument("--generators", help="generator tuple name (default: first)")
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("rand", help="write a seeded random bundle",
                       description="Write a seeded random bundle.")
    p.add_argument("--points", type=int, default=2)
    p.add_argument("--max-dim", type=int, default=4)
    p.add_argument("--group", default="Z3")
    p.add_argument("--generators", type=int, default=2)
    p.add_argument("--frame-size", type=int, default=6)
    _common(p)
    p.set_defaults(handler=None, command="rand")
    return parser


def _text(report: RunReport) -> str:
    lines = [f"command: {report.command}", f"passed: {report.passed}"]
    for k, v in report.verdicts.items():
        lines.append(f"  [{'ok' if v else 'FAIL'}] {k}")
    for k, v in report.results.items():
        if isinstance(v, (int, float, str, bool)) or v is None:
            lines.append(f"  {k}: {v}")
        elif isinstance(v, dict):
            small = {kk: vv for kk, vv in v.items() if isinstance(vv, (int, float, str, bool))}
            if small:
                lines.append(f"  {k}: {small}")
    return "\n".join(lines)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is None:
            args.tol = _default_tol()
        if args.command == "rand":
            spec = InstanceSpec(args.points, args.max_dim, args.group, args.generators,
                                args.frame_size, args.seed)
            bundle = rand_instance(spec)
            if args.out:
                save_bundle(bundle, args.out)
            else:
                _emit(dumps(bundle.to_json()), None)
            return 0
        bundle = load_bundle(args.bundle) if getattr(args, "bundle", None) else None
    except (BundleError, InputError, CapExceeded, ValueError) as exc:
        sys.stderr.write(f"modframe: input error: {exc}\n")
        return 2

    report = RunReport(args.command, bundle.digest() if bundle else "")
    start = time.perf_counter()
    try:
        args.handler(args, bundle, report)
    except InputError as exc:
        sys.stderr.write(f"modframe: input error: {exc}\n")
        return 2
    except (ParameterizationError, NotAFrame, NotInAlgebra, EquivalenceError) as exc:
        report.results["error"] = f"{type(exc).__name__}: {exc}"
        report.verdicts["completed"] = False
    except ValueError as exc:
        sys.stderr.write(f"modframe: input error: {exc}\n")
        return 2
    if args.timing:
        report.wall_time = time.perf_counter() - start
    _emit(dumps(report.to_json()) if args.format == "json" else _text(report), args.out)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
