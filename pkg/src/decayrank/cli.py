"""Command-line front end.

Exit codes: 0 success, 1 I/O error, 2 usage error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import analytics, bounds, reports, verify
from .errors import ParameterError
from .ranker import DecayParams, DecayRankTable, half_life_to_alpha
from .walk import INFINITE, VertexSet, WalkConfig, enumerate_exact, run_walk

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")


class InputError(Exception):
    pass


# -- argument parsing helpers ---------------------------------------------


def _floats(flag: str, text: str) -> List[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(flag, f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError(flag, "empty list")
    return vals


def _prob(flag: str, text: str) -> np.ndarray:
    q = np.array(_floats(flag, text))
    if np.any(q < 0) or abs(math.fsum(q) - 1.0) > 1e-12:
        raise UsageError(flag, "must be non-negative and sum to 1")
    return q


def _alpha(args, required=True) -> Optional[float]:
    a, hl = getattr(args, "alpha", None), getattr(args, "half_life", None)
    if a is not None and hl is not None:
        raise UsageError("--alpha/--half-life", "give exactly one, not both")
    if a is None and hl is None:
        if required:
            raise UsageError("--alpha/--half-life", "one of them is required")
        return None
    if hl is not None:
        try:
            return half_life_to_alpha(hl)
        except ParameterError as exc:
            raise UsageError("--half-life", str(exc)) from None
    if not 0.0 < a < 1.0:
        raise UsageError("--alpha", f"must lie in (0, 1), got {a}")
    return a


def _steps(flag: str, text: Optional[str], default=None):
    if text is None:
        return default
    if text.lower() in ("inf", "infinite"):
        return INFINITE
    try:
        t = int(text)
    except ValueError:
        raise UsageError(flag, f"expected a non-negative integer or 'infinite', got {text!r}") from None
    if t < 0:
        raise UsageError(flag, "must be >= 0")
    return t


def _emit(args, text: str) -> None:
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {args.output}: {exc}") from None
    else:
        sys.stdout.write(text)


def _manifest(args, params: Dict[str, Any], seed=None) -> reports.RunManifest:
    return reports.RunManifest(subcommand=args.command, parameters=reports.jsonable(params), seed=seed)


# -- subcommands ----------------------------------------------------------


def _read_events(path: str):
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        for line in fh:
            token = line.rstrip("\r\n")
            if token.strip():
                yield token
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    finally:
        if fh is not sys.stdin:
            fh.close()


def cmd_rank(args) -> int:
    if args.k < 1:
        raise UsageError("--k", "must be >= 1")
    if args.snapshot_every < 0:
        raise UsageError("--snapshot-every", "must be >= 0")
    items = [s for s in (args.items or "").split(",") if s]
    if args.resume:
        try:
            with open(args.resume, "rb") as fh:
                table = DecayRankTable.restore(fh.read())
        except OSError as exc:
            raise InputError(f"cannot read {args.resume}: {exc}") from None
        alpha = _alpha(args, required=False)
        if alpha is not None:
            table.set_alpha(alpha)
    else:
        table = DecayRankTable(DecayParams.from_alpha(_alpha(args)), items=items)

    out: List[Dict[str, Any]] = []

    def report():
        out.append({
            "step": table.global_step,
            "top": [{"item": k, "probability": reports.sig12(p)} for k, p in table.top_k(args.k)],
        })

    seen = 0
    for token in _read_events(args.input):
        table.observe(token)
        seen += 1
        if args.snapshot_every and seen % args.snapshot_every == 0:
            report()
    if not out or out[-1]["step"] != table.global_step:
        report()
    if args.save_snapshot:
        try:
            with open(args.save_snapshot, "wb") as fh:
                fh.write(table.snapshot())
        except OSError as exc:
            raise InputError(f"cannot write {args.save_snapshot}: {exc}") from None

    params = {"alpha": table.alpha, "half_life": table.params.half_life, "k": args.k,
              "items": items, "snapshot_every": args.snapshot_every, "input": args.input,
              "resume": args.resume}
    if args.format == "csv":
        rows = [(r["step"], i + 1, e["item"], e["probability"]) for r in out for i, e in enumerate(r["top"])]
        _emit(args, reports.to_csv(["step", "rank", "item", "probability"], rows))
    else:
        _emit(args, reports.to_json(_manifest(args, params), {"reports": out}))
    return EXIT_OK


def _walk_config(args) -> WalkConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError("--config", f"invalid JSON: {exc}") from None
        try:
            return WalkConfig.from_dict(doc)
        except (ParameterError, KeyError, TypeError, ValueError) as exc:
            raise UsageError("--config", str(exc)) from None
    if args.q is None:
        raise UsageError("--q", "required unless --config is given")
    q = _prob("--q", args.q)
    alpha = _alpha(args)
    mode = args.mode
    if mode == "simplex":
        verts = VertexSet.simplex(q.size)
    elif mode == "real":
        if not args.vertices:
            raise UsageError("--vertices", "required in real mode")
        try:
            pts = np.array([_floats("--vertices", part) for part in args.vertices.split(";")])
            verts = VertexSet.real(pts.T)
        except ValueError:
            raise UsageError("--vertices", "vertices must all have the same dimension") from None
    else:
        if args.angles:
            verts = VertexSet.unit_circle(_floats("--angles", args.angles))
        elif args.vertices:
            pts = [_floats("--vertices", part) for part in args.vertices.split(";")]
            if any(len(p) != 2 for p in pts):
                raise UsageError("--vertices", "complex vertices are 're,im' pairs")
            verts = VertexSet.complex([complex(*p) for p in pts])
        else:
            verts = VertexSet.roots_of_unity(q.size)
    y0 = None
    if args.y0:
        y0 = _floats("--y0", args.y0)
        if mode == "complex":
            if len(y0) not in (1, 2):
                raise UsageError("--y0", "complex start point is 're,im'")
            y0 = complex(y0[0], y0[1] if len(y0) == 2 else 0.0)
    steps = _steps("--steps", args.steps, default=0)
    if args.paths < 1:
        raise UsageError("--paths", "must be >= 1")
    try:
        return WalkConfig(alpha=alpha, q=q, vertices=verts, y0=y0, steps=steps, paths=args.paths, seed=args.seed)
    except ParameterError as exc:
        raise UsageError("--q/--vertices/--y0", str(exc)) from None


def cmd_simulate(args) -> int:
    cfg = _walk_config(args)
    stats = run_walk(cfg)
    result: Dict[str, Any] = {"config": cfg.to_dict(), "stats": stats.to_dict()}
    if args.enumerate:
        try:
            result["exact"] = enumerate_exact(cfg, max_order=args.order).to_dict()
        except Exception as exc:  # budget refusal is reported, not fatal
            result["exact"] = {"error": str(exc)}
    if args.format == "csv":
        rows = [(i, float(stats.mean[i]), float(stats.sem[i]), float(stats.cov[i, i])) for i in range(stats.mean.size)]
        _emit(args, reports.to_csv(["coordinate", "mean", "standard_error", "variance"], rows))
    else:
        _emit(args, reports.to_json(_manifest(args, cfg.to_dict(), seed=cfg.seed), result))
    return EXIT_OK


def cmd_moments(args) -> int:
    alpha = _alpha(args)
    q = _floats("--q", args.q)
    if len(q) != 1 or not 0.0 < q[0] < 1.0:
        raise UsageError("--q", "moments need a single probability in (0, 1)")
    q = q[0]
    if not 0 <= args.order <= analytics.MAX_MOMENT_ORDER:
        raise UsageError("--order", f"must lie in [0, {analytics.MAX_MOMENT_ORDER}]")
    table = analytics.central_moments(alpha, q, args.order)
    result: Dict[str, Any] = {
        "central_moments": table.to_dict(),
        "scalar": analytics.scalar_mean_var(alpha, q, INFINITE).to_dict(),
    }
    steps = _steps("--steps", args.steps)
    if steps is not None and steps != INFINITE:
        y0 = _floats("--y0", args.y0)[0] if args.y0 else q
        result["finite"] = analytics.central_moments_finite(alpha, q, args.order, steps, y0).tolist()
        result["scalar"] = analytics.scalar_mean_var(alpha, q, steps, y0=y0).to_dict()
    params = {"alpha": alpha, "q": q, "order": args.order, "steps": args.steps, "y0": args.y0}
    if args.format == "csv":
        rows = [(n, float(m)) for n, m in enumerate(table.values)]
        _emit(args, reports.to_csv(["n", "central_moment"], rows))
    else:
        _emit(args, reports.to_json(_manifest(args, params), result))
    return EXIT_OK


def cmd_eigen(args) -> int:
    Q = _prob("--q", args.q)
    alpha = _alpha(args, required=False)
    steps = _steps("--steps", args.steps, default=INFINITE)
    rep = analytics.simplex_covariance(alpha if alpha is not None else 0.5, Q, steps)
    cov = rep.to_dict()
    if alpha is None:
        # without alpha only the kernel spectrum is meaningful
        cov.update(alpha=None, scale=1.0, covariance=analytics.kernel_matrix(Q).tolist(),
                   eigenvalues=[v for v in rep.kernel_eigenvalues.tolist() if abs(v) > 1e-12])
    try:
        roots = analytics.secular_eigenvalues(Q).tolist()
        note = None
    except ParameterError as exc:
        roots, note = None, str(exc)
    result = {"covariance": cov, "secular_roots": roots}
    if note:
        result["secular_note"] = note
    params = {"q": Q.tolist(), "alpha": alpha, "steps": args.steps}
    if args.format == "csv":
        kev = rep.kernel_eigenvalues.tolist()
        rows = [(i, float(v), float(roots[i - 1]) if roots and i >= 1 else "") for i, v in enumerate(kev)]
        _emit(args, reports.to_csv(["index", "kernel_eigenvalue", "secular_root"], rows))
    else:
        _emit(args, reports.to_json(_manifest(args, params), result))
    return EXIT_OK


def cmd_bounds(args) -> int:
    alpha = _alpha(args)
    q = _floats("--q", args.q)
    if any(not 0.0 <= x <= 1.0 for x in q):
        raise UsageError("--q", "entries must lie in [0, 1]")
    if args.eps is None or not args.eps > 0:
        raise UsageError("--eps", "must be > 0")
    steps = _steps("--steps", args.steps, default=INFINITE)
    y0 = _floats("--y0", args.y0) if args.y0 else None
    rep = bounds.tail_bound(bounds.BoundQuery(alpha, q if len(q) > 1 else q[0], args.eps, steps, y0=y0))
    params = {"alpha": alpha, "q": q, "eps": args.eps, "steps": args.steps, "y0": y0}
    if args.format == "text":
        _emit(args, rep.render() + "\n")
    elif args.format == "csv":
        rows = [(i, qi, c, b, r) for i, (qi, c, b, r) in
                enumerate(zip(rep.q, rep.centers, rep.item_bounds, rep.item_bounds_raw))]
        _emit(args, reports.to_csv(["item", "q", "center", "bound", "bound_raw"], rows))
    else:
        _emit(args, reports.to_json(_manifest(args, params), rep))
    return EXIT_OK


def cmd_boost(args) -> int:
    alpha = _alpha(args)
    for flag, v in (("--t1", args.t1), ("--t2", args.t2)):
        if v is None or v < 1:
            raise UsageError(flag, "must be a positive integer")
    r = bounds.boost_ratio(alpha, args.t1, args.t2)
    params = {"alpha": alpha, "t1": args.t1, "t2": args.t2}
    if args.format == "csv":
        _emit(args, reports.to_csv(["alpha", "t1", "t2", "exact", "approximate", "counting", "relative_gap"],
                                   [(alpha, args.t1, args.t2, r.exact, r.approximate, r.counting, r.relative_gap)]))
    else:
        _emit(args, reports.to_json(_manifest(args, params), r))
    return EXIT_OK


def cmd_verify(args) -> int:
    budget = "full" if args.full else "quick" if args.quick else args.budget
    unknown = [c for c in args.only if c not in verify.CHECKS]
    if unknown:
        raise UsageError("--only", f"unknown checks {unknown}; choose from {list(verify.CHECKS)}")
    results = []
    for cid in args.only or list(verify.CHECKS):
        res = verify.run_check(cid, budget)
        results.append(res)
        print(res.line(), file=sys.stderr if args.format != "text" else sys.stdout, flush=True)
    passed = all(r.passed for r in results)
    summary = f"{sum(r.passed for r in results)}/{len(results)} checks passed ({budget})"
    params = {"budget": budget, "only": list(args.only)}
    if args.format == "text":
        _emit(args, summary + "\n")
    elif args.format == "csv":
        rows = [(r.id, r.title, "pass" if r.passed else "fail", r.residual, r.tolerance, r.seconds) for r in results]
        _emit(args, reports.to_csv(["id", "title", "status", "residual", "tolerance", "seconds"], rows))
    else:
        _emit(args, reports.to_json(_manifest(args, params),
                                    {"budget": budget, "passed": passed, "checks": results}))
    return EXIT_OK if passed else EXIT_VERIFY


# -- parser ---------------------------------------------------------------


def _add_alpha(p):
    p.add_argument("--alpha", type=float, help="decay factor in (0, 1)")
    p.add_argument("--half-life", type=float, help="events for an idle item to lose half its mass")


def _add_output(p, formats=("json", "csv")):
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--output", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decayrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="rank a stream of events (one token per line)")
    p.add_argument("input", nargs="?", default="-", help="event file, '-' for stdin")
    _add_alpha(p)
    p.add_argument("--items", help="comma-separated items that start with uniform mass")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--snapshot-every", type=int, default=0, help="report every N events (0: end only)")
    p.add_argument("--save-snapshot", help="write the final table state here")
    p.add_argument("--resume", help="continue from a saved table state")
    _add_output(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("simulate", help="Monte Carlo walk statistics")
    p.add_argument("--config", help="WalkConfig JSON document")
    p.add_argument("--mode", choices=["simplex", "real", "complex"], default="simplex")
    _add_alpha(p)
    p.add_argument("--q")
    p.add_argument("--vertices", help="';'-separated vertices, each comma-separated (complex: re,im)")
    p.add_argument("--angles", help="complex mode: unit-circle vertex angles in radians")
    p.add_argument("--y0")
    p.add_argument("--steps", help="integer or 'infinite'")
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--enumerate", action="store_true", help="add exact moments by path enumeration")
    p.add_argument("--order", type=int, default=4)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", help="central moments of the limiting convolution")
    _add_alpha(p)
    p.add_argument("--q", required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--steps", help="also report finite-t moments after this many steps")
    p.add_argument("--y0")
    _add_output(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("eigen", help="covariance spectrum and secular roots")
    p.add_argument("--q", required=True)
    _add_alpha(p)
    p.add_argument("--steps", help="integer or 'infinite' (default)")
    _add_output(p)
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("bounds", help="Chebyshev tail bounds")
    _add_alpha(p)
    p.add_argument("--q", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--steps", help="integer or 'infinite' (default)")
    p.add_argument("--y0")
    _add_output(p, formats=("json", "csv", "text"))
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("boost", help="recent-vs-old phase weight ratio")
    _add_alpha(p)
    p.add_argument("--t1", type=int, required=True)
    p.add_argument("--t2", type=int, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_boost)

    p = sub.add_parser("verify", help="run the cross-validation checks")
    p.add_argument("--budget", choices=verify.BUDGETS, default="quick")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true")
    g.add_argument("--full", action="store_true")
    p.add_argument("--only", nargs="*", default=[], help="check ids to run")
    _add_output(p, formats=("text", "json", "csv"))
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"decayrank {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"decayrank {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"decayrank {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
