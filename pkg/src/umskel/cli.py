"""Command-line entry points.

Exit codes: 0 success, 1 validation/contract/computation failure (with a
machine-readable JSON object on stderr), 2 usage errors (argparse).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import config, kernels
from .errors import ArgumentError, StructuralError, UmskelError
from .experiment import ExperimentConfig, gaussian_argmax_experiment
from .gamma_delta import (PHI2, equalizing_measure, gamma_delta_bounds,
                          gamma_delta_grid, majorizing_chain_check,
                          star_space, star_witness_values)
from .measures import MeasureVec, WeightedSpace
from .metric import FiniteMetricSpace, validate_metric
from .report import emit_report
from .skeleton import (SkeletonResult, build_skeleton, dvoretzky_check)
from .subdominant import min_ultrametric_distortion, tree_on_subset
from .submeasures import CoveringSubmeasure
from .tree import UltrametricTree, distortion_certificate
from .union import union_ultrametric


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UmskelError(f"cannot read {path}: {exc}", path=path)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path} is not valid JSON: {exc}", path=path)


def _load_space(path: str) -> FiniteMetricSpace:
    return FiniteMetricSpace.from_jsonable(_load_json(path))


def _load_measure(path: str, n: int) -> MeasureVec:
    obj = _load_json(path)
    if isinstance(obj, dict) and "mu" in obj:
        obj = obj["mu"]
    if not isinstance(obj, list):
        raise StructuralError(f"{path} must hold a JSON array of weights")
    vec = MeasureVec(obj)
    if vec.n != n:
        raise ArgumentError(f"measure length {vec.n} does not match space size {n}")
    return vec


def _parse_indices(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise ArgumentError(f"expected comma-separated indices, got {text!r}")


def _parse_sweep(text: str) -> list[float]:
    try:
        lo, hi, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise ArgumentError(f"sweep must look like lo:hi:step, got {text!r}")
    if step <= 0 or hi < lo:
        raise ArgumentError(f"bad sweep bounds {text!r}")
    out = []
    v = lo
    while v <= hi + 1e-12:
        out.append(round(v, 12))
        v += step
    return out


def _emit(args, payload) -> None:
    text = emit_report(payload, format=args.format, path=args.out)
    if args.out is None:
        sys.stdout.write(text)


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="RNG seed where used")
    sub.add_argument("--tol", type=float, default=None,
                     help="comparison tolerance (default 1e-12); also the "
                          "residual target for gamma-delta --equalize")
    sub.add_argument("--threads", type=int, default=None,
                     help="numba thread count (kernels are deterministic "
                          "regardless)")
    sub.add_argument("--out", default=None, help="write the report here")
    sub.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="umskel",
        description="Ultrametric subsets, covering submeasures and chaining "
                    "functionals on finite metric spaces.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("validate", help="check the metric axioms of a space")
    p.add_argument("space", help="metric-space JSON file")
    _common(p)

    p = subs.add_parser("umdist", help="exact minimum ultrametric distortion")
    p.add_argument("--space", required=True)
    _common(p)

    p = subs.add_parser("merge", help="merge two dominated subsets into one tree")
    p.add_argument("--space", required=True)
    p.add_argument("--u1", required=True, help="comma-separated indices")
    p.add_argument("--u2", required=True, help="comma-separated indices")
    p.add_argument("--rho1", default=None, help="dendrogram JSON for U1")
    p.add_argument("--rho2", default=None, help="dendrogram JSON for U2")
    p.add_argument("--eps", type=float, default=1e-6)
    _common(p)

    p = subs.add_parser("line-example", help="sharpness instance on the integer line")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    _common(p)

    p = subs.add_parser("xi", help="covering-submeasure value of a point set")
    p.add_argument("--space", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--ceps", type=float, default=1.0)
    p.add_argument("--set", dest="points", required=True,
                   help="comma-separated indices")
    _common(p)

    p = subs.add_parser("skeleton", help="build a skeleton subset with certificates")
    p.add_argument("--space", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--ceps", type=float, default=1.0)
    p.add_argument("--dmax-sweep", default=None, help="lo:hi:step budget grid")
    _common(p)

    p = subs.add_parser("dvoretzky", help="uniform-measure cardinality check")
    p.add_argument("--space", required=True)
    p.add_argument("--eps", type=float, required=True)
    _common(p)

    p = subs.add_parser("gamma-delta", help="profile-integral functionals")
    p.add_argument("--space", required=True)
    p.add_argument("--mu", default=None)
    p.add_argument("--equalize", action="store_true")
    p.add_argument("--grid", type=int, default=None, help="simplex grid resolution")
    p.add_argument("--max-iter", type=int, default=50000)
    _common(p)

    p = subs.add_parser("star", help="hub-and-spokes witnesses")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--report", action="store_true",
                   help="include per-point profiles")
    _common(p)

    p = subs.add_parser("majorizing", help="pointwise chain check on a skeleton")
    p.add_argument("--space", required=True)
    p.add_argument("--skeleton", required=True, help="skeleton result JSON")
    p.add_argument("--mu", default=None,
                   help="measure JSON (default: uniform)")
    _common(p)

    p = subs.add_parser("experiment", help="statistical experiments")
    esubs = p.add_subparsers(dest="experiment", required=True)
    g = esubs.add_parser("gaussian-argmax", help="argmax-law skeleton probes")
    g.add_argument("--points", default=None, help="JSON array of coordinate rows")
    g.add_argument("--n-points", type=int, default=None,
                   help="generate this many random points instead")
    g.add_argument("--dim", type=int, default=3)
    g.add_argument("--trials", type=int, default=100000)
    _common(g)

    return parser


def _cmd_validate(args) -> int:
    space = _load_space(args.space)
    report = validate_metric(space)
    _emit(args, report.to_jsonable())
    if not report.is_valid:
        first = report.violations[0]
        _error_json(ArgumentError(
            f"metric axioms violated: {first.describe(space.labels)}",
            axiom=first.axiom, witness=list(first.witness)))
        return 1
    return 0


def _cmd_umdist(args) -> int:
    space = _load_space(args.space)
    dstar, tree = min_ultrametric_distortion(space)
    cert = distortion_certificate(space, tree)
    _emit(args, {"D_star": dstar, "tree": tree.to_jsonable(),
                 "certificate": cert.to_jsonable()})
    return 0


def _cmd_merge(args) -> int:
    space = _load_space(args.space)
    u1 = _parse_indices(args.u1)
    u2 = _parse_indices(args.u2)
    if args.rho1:
        rho1 = UltrametricTree.from_jsonable(_load_json(args.rho1))
    else:
        _, rho1 = tree_on_subset(space, u1) if u1 else (1.0, None)
    if args.rho2:
        rho2 = UltrametricTree.from_jsonable(_load_json(args.rho2))
    else:
        _, rho2 = tree_on_subset(space, u2) if u2 else (1.0, None)
    tree, cert = union_ultrametric(space, u1, u2, rho1, rho2, eps=args.eps)
    _emit(args, {"tree": tree.to_jsonable(), "certificate": cert.to_jsonable()})
    return 0


def _cmd_line_example(args) -> int:
    from .union import make_line_example

    inst = make_line_example(args.M, args.N)
    _emit(args, inst.to_jsonable())
    return 0


def _cmd_xi(args) -> int:
    space = _load_space(args.space)
    mu = _load_measure(args.mu, space.n)
    oracle = CoveringSubmeasure(WeightedSpace(space, mu), args.eps, args.ceps)
    pts = _parse_indices(args.points)
    value = oracle.value(pts)
    cover = oracle.optimal_cover(pts)
    _emit(args, {
        "set": list(pts), "eps": args.eps, "c_eps": args.ceps, "value": value,
        "optimal_cover": [{"center": b.center, "radius": b.radius,
                           "points": list(b.points()), "cost": b.cost}
                          for b in cover]})
    return 0


def _cmd_skeleton(args) -> int:
    space = _load_space(args.space)
    mu = _load_measure(args.mu, space.n)
    sweep = _parse_sweep(args.dmax_sweep) if args.dmax_sweep else None
    sk = build_skeleton(WeightedSpace(space, mu), args.eps, args.ceps,
                        dmax_values=sweep)
    _emit(args, sk.to_jsonable())
    return 0


def _cmd_dvoretzky(args) -> int:
    space = _load_space(args.space)
    res = dvoretzky_check(space, args.eps)
    _emit(args, res.to_jsonable())
    return 0


def _cmd_gamma_delta(args) -> int:
    space = _load_space(args.space)
    payload: dict = {"n": space.n}
    if args.grid is not None:
        res = gamma_delta_grid(space, PHI2, args.grid)
        payload.update(res.to_jsonable())
    elif args.equalize:
        res = equalizing_measure(space, PHI2,
                                 tol=args.tol if args.tol is not None else 1e-9,
                                 max_iter=args.max_iter)
        gup, dlo, prof = gamma_delta_bounds(space, res.mu, PHI2)
        payload.update({"gamma_upper": gup, "delta_lower": dlo,
                        "V": res.V, "residual": res.residual,
                        "converged": res.converged,
                        "iterations": res.iterations,
                        "mu": res.mu.to_jsonable(),
                        "per_point_profiles": list(prof.integrals)})
    else:
        if args.mu is None:
            raise ArgumentError("gamma-delta needs one of --mu, --equalize, --grid")
        mu = _load_measure(args.mu, space.n)
        gup, dlo, prof = gamma_delta_bounds(space, mu, PHI2)
        payload.update({"gamma_upper": gup, "delta_lower": dlo,
                        "V": None, "residual": None,
                        "per_point_profiles": list(prof.integrals)})
    _emit(args, payload)
    return 0


def _cmd_star(args) -> int:
    space, mu_w, nu_w = star_space(args.n)
    gup, _, prof_mu = gamma_delta_bounds(space, mu_w, PHI2)
    _, dlo, prof_nu = gamma_delta_bounds(space, nu_w, PHI2)
    delta_form, gamma_form = star_witness_values(args.n)
    payload = {
        "n": args.n,
        "delta_lower_nu_witness": dlo,
        "gamma_upper_mu_witness": gup,
        "closed_form_delta": delta_form,
        "closed_form_gamma": gamma_form,
        "mu_witness": mu_w.to_jsonable(),
        "nu_witness": nu_w.to_jsonable(),
    }
    if args.report:
        payload["profiles_mu_witness"] = list(prof_mu.integrals)
        payload["profiles_nu_witness"] = list(prof_nu.integrals)
        payload["space"] = space.to_jsonable()
    _emit(args, payload)
    return 0


def _cmd_majorizing(args) -> int:
    space = _load_space(args.space)
    sk = SkeletonResult.from_jsonable(_load_json(args.skeleton))
    mu = _load_measure(args.mu, space.n) if args.mu else MeasureVec.uniform(space.n)
    report = majorizing_chain_check(WeightedSpace(space, mu), sk)
    _emit(args, report.to_jsonable())
    return 0


def _cmd_experiment(args) -> int:
    if args.experiment != "gaussian-argmax":
        raise ArgumentError(f"unknown experiment {args.experiment!r}")
    if args.points:
        pts = np.asarray(_load_json(args.points), dtype=np.float64)
        dim = pts.shape[1] if pts.ndim == 2 else 0
    elif args.n_points:
        rng = np.random.Generator(np.random.Philox(int(args.seed) ^ 0x9E3779B9))
        pts = rng.standard_normal((args.n_points, args.dim))
        dim = args.dim
    else:
        raise ArgumentError("provide --points or --n-points")
    cfg = ExperimentConfig(seed=args.seed, trials=args.trials, dim=dim)
    _emit(args, gaussian_argmax_experiment(pts, cfg))
    return 0


_DISPATCH = {
    "validate": _cmd_validate,
    "umdist": _cmd_umdist,
    "merge": _cmd_merge,
    "line-example": _cmd_line_example,
    "xi": _cmd_xi,
    "skeleton": _cmd_skeleton,
    "dvoretzky": _cmd_dvoretzky,
    "gamma-delta": _cmd_gamma_delta,
    "star": _cmd_star,
    "majorizing": _cmd_majorizing,
    "experiment": _cmd_experiment,
}


def _error_json(exc: UmskelError) -> None:
    sys.stderr.write(json.dumps({"error": exc.to_jsonable()}, sort_keys=True) + "\n")


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if getattr(args, "tol", None) is not None:
        config.set_tolerance(args.tol)
    if getattr(args, "threads", None) and kernels.BACKEND == "numba":
        import numba

        numba.set_num_threads(args.threads)
    try:
        return _DISPATCH[args.command](args)
    except UmskelError as exc:
        _error_json(exc)
        return 1
    finally:
        config.set_tolerance(config.DEFAULT_TOLERANCE)


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
