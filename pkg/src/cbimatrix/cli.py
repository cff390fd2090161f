"""Command-line front end: ``cbimatrix <command> ...``.

Scalar results are printed as one JSON document.  Sample streams are JSONL
(one matrix object per line) with run metadata in ``<out>.meta.json``.
Grid sweeps (``maxeig grid``) can also be written as CSV, with the version
and config in ``#`` header lines.
Exit status: 0 on success, 1 on a domain or divergence error (reported as
JSON on stderr), 2 on usage errors.  ``verify`` exits 1 when a check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DivergenceError, DomainError
from .hermitian import matrix_from_json, matrix_to_json
from .matfun import BimatrixParams, TruncationPolicy, identity_policy
from .rng import default_seed, make_rng, shard_sizes


# -- helpers ------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _config_of(args) -> dict:
    skip = {"func", "config"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def _emit(payload: dict, args, out: str | None = None):
    payload = {"version": __version__, "config": _config_of(args), **payload}
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    target = out if out is not None else getattr(args, "out", None)
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


def _policy(args) -> TruncationPolicy:
    return TruncationPolicy(40 if args.max_degree is None else args.max_degree, args.tol)


def _params(args) -> BimatrixParams:
    return BimatrixParams(args.a, args.b, args.c, args.m)


def _write_stream(args, records, meta: dict):
    """JSONL records plus run metadata in ``<out>.meta.json``.

    Without ``--out`` records go to stdout and the metadata to stderr.
    """
    meta = {"version": __version__, "config": _config_of(args), **meta}
    meta_text = json.dumps(meta, sort_keys=True, indent=2) + "\n"
    if not args.out:
        for rec in records:
            sys.stdout.write(json.dumps(rec, sort_keys=True) + "\n")
        sys.stderr.write(meta_text)
        return
    out = Path(args.out)
    with out.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    Path(str(out) + ".meta.json").write_text(meta_text)


def _sharded(draw, n: int, seed: int, shards: int):
    """Concatenate per-shard stacks drawn from sub-streams ``(seed, k)``."""
    chunks = [draw(make_rng(seed, k), size) for k, size in enumerate(shard_sizes(n, shards)) if size]
    return chunks


def _load(path: str) -> np.ndarray:
    return matrix_from_json(Path(path))


# -- commands -----------------------------------------------------------------------

def cmd_zonal(args):
    from .partitions import Partition, zonal_C

    tau = Partition(args.partition)
    _emit({"partition": list(tau), "value": zonal_C(tau, np.asarray(args.eigs))}, args)


def cmd_hyp(args):
    from .matfun import hyp_pfq

    X = _load(args.matrix) if args.matrix else np.asarray(args.eigs, dtype=float)
    if args.identity_extrapolate:
        policy = identity_policy(int(X.shape[0]), args.tol)
        if args.max_degree is not None:
            policy = TruncationPolicy(args.max_degree, args.tol, extrapolate=True)
    else:
        policy = _policy(args)
    sv = hyp_pfq(args.num, args.den, X, policy)
    _emit(sv.to_dict(), args)


def cmd_const(args):
    from .matfun import mv_beta, mv_beta_star, mv_gamma, vol_stiefel

    if args.which == "gamma":
        log = mv_gamma(args.a, args.m)
    elif args.which == "beta":
        log = mv_beta(args.a, args.b, args.m)
    elif args.which == "beta-star":
        log = mv_beta_star(BimatrixParams(args.a, args.b, args.c, args.m))
    else:
        log = vol_stiefel(args.m, args.n)
    _emit({"which": args.which, "log": log, "value": float(np.exp(log)) if log < 700 else None}, args)


def cmd_sample(args):
    from .distributions import CGammaParams, sample_cbeta1, sample_cbeta2, sample_cgamma

    if args.dist in ("bgb1", "bgb2"):
        args.kind, args.action = args.dist, "sample"
        return cmd_bgb(args)
    if args.n < 0:
        raise DomainError("n must be non-negative")
    if args.dist == "cgamma":
        p = CGammaParams(args.a, args.m)
        draw = lambda rng, k: sample_cgamma(p, rng, size=k, return_rejected=True)
    elif args.dist == "cbeta1":
        draw = lambda rng, k: sample_cbeta1(args.a, args.b, args.m, rng, size=k, return_rejected=True)
    else:
        draw = lambda rng, k: sample_cbeta2(args.a, args.b, args.m, rng, size=k, return_rejected=True)
    chunks = _sharded(draw, args.n, args.seed, args.shards)
    records = (matrix_to_json(M) for stack, _ in chunks for M in stack)
    _write_stream(args, records, {"seed": args.seed, "n": args.n, "shards": args.shards,
                                  "rejected": int(sum(r for _, r in chunks))})


def cmd_density(args):
    from .distributions import CGammaParams, cbeta1_logpdf, cbeta2_logpdf, cgamma_logpdf

    M = _load(args.matrix)
    if args.dist == "cgamma":
        value = cgamma_logpdf(M, CGammaParams(args.a, M.shape[0]))
    elif args.dist == "cbeta1":
        value = cbeta1_logpdf(M, args.a, args.b)
    else:
        value = cbeta2_logpdf(M, args.a, args.b)
    _emit({"logpdf": value}, args)


def cmd_bgb(args):
    from . import bimatrix as bm

    p = _params(args)
    kind = args.kind
    if args.action == "sample":
        if args.n < 0:
            raise DomainError("n must be non-negative")
        sampler = bm.sample_bgb1 if kind == "bgb1" else bm.sample_bgb2
        chunks = _sharded(lambda rng, k: sampler(p, rng, size=k), args.n, args.seed, args.shards)
        keys = ("U1", "U2") if kind == "bgb1" else ("F1", "F2")
        records = ({keys[0]: matrix_to_json(X), keys[1]: matrix_to_json(Y)}
                   for s in chunks for X, Y in zip(s.first, s.second))
        _write_stream(args, records, {"seed": args.seed, "n": args.n, "shards": args.shards,
                                      "rejected": int(sum(s.rejected for s in chunks))})
    elif args.action == "density":
        X, Y = _load(args.first), _load(args.second)
        if kind == "bgb2":
            _emit({"logpdf": bm.bgb2_logpdf(X, Y, p)}, args)
        elif args.series:
            _emit(bm.bgb1_logpdf_series(X, Y, p, _policy(args)).to_dict(), args)
        else:
            _emit({"logpdf": bm.bgb1_logpdf(X, Y, p)}, args)
    elif args.action == "moment":
        if args.n:
            est = bm.det_moment_mc(p, args.r, args.s, args.n, args.seed, args.shards)
            _emit({"mc": est.to_dict()}, args)
        else:
            _emit(bm.det_moment(p, args.r, args.s, identity_policy(p.m, args.tol)).to_dict(), args)
    elif args.action == "eigdensity":
        sv = bm.joint_eig_logpdf(args.lam, args.delta, p, _policy(args), method=args.method)
        _emit(sv.to_dict(), args)


def _emit_grid(rows: list[dict], args):
    if args.format == "json":
        _emit({"grid": rows}, args)
        return
    buf = io.StringIO()
    buf.write(f"# version: {__version__}\n")
    buf.write(f"# config: {json.dumps(_config_of(args), sort_keys=True)}\n")
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["x", "y"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def cmd_maxeig(args):
    from .maxeig import maxeig_cdf_grid, maxeig_cdf_mc, rect_prob_quad_m1

    p = _params(args)
    if args.action == "grid":
        est = maxeig_cdf_grid(p, args.xs, args.ys, args.n, args.seed, args.shards)
        rows = [{"x": x, "y": y, "mean": e.mean, "std_error": e.std_error, "n": e.n, "seed": e.seed,
                 "shards": e.shards, "boundary_ties": e.diagnostics["boundary_ties"]}
                for x, line in zip(args.xs, est) for y, e in zip(args.ys, line)]
        _emit_grid(rows, args)
    elif args.action == "cdf":
        _emit(maxeig_cdf_mc(p, args.x, args.y, args.n, args.seed, args.shards).to_dict(), args)
    else:
        if p.m != 1:
            raise DomainError("maxeig oracle is available at m = 1 only")
        _emit({"value": rect_prob_quad_m1(p, args.x, args.y)}, args)


def cmd_verify(args):
    from .verify import report_json, run_suites

    # unset shapes default to the smallest integer valid at this m (2 at m = 1)
    for k in ("a", "b", "c"):
        if getattr(args, k) is None:
            setattr(args, k, float(max(2, args.m + 1)))
    report = run_suites(args.target, args.suite, _params(args), args.seed, args.n)
    text = report_json(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report["passed"] else 1


# -- parser -------------------------------------------------------------------------

def _add_policy(p):
    p.add_argument("--max-degree", type=int, default=None,
                   help="degree cap (default 40; identity extrapolation picks its own by m)")
    p.add_argument("--tol", type=float, default=1e-10)


def _add_shapes(p, b=True, c=True, m_default=1):
    p.add_argument("--a", type=float, required=False, default=None)
    if b:
        p.add_argument("--b", type=float, default=None)
    if c:
        p.add_argument("--c", type=float, default=None)
    p.add_argument("--m", type=int, default=m_default)


def _add_mc(p, n_default=0):
    p.add_argument("--n", type=int, default=n_default)
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--shards", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbimatrix", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="key=value file supplying flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    zp = sub.add_parser("zonal", help="complex zonal polynomials").add_subparsers(dest="action", required=True)
    z = zp.add_parser("eval", help="C_tau at a spectrum")
    z.add_argument("--partition", type=_ints, required=True)
    z.add_argument("--eigs", type=_floats, required=True)
    z.set_defaults(func=cmd_zonal)

    hp = sub.add_parser("hyp", help="hypergeometric series of a matrix argument").add_subparsers(
        dest="action", required=True)
    h = hp.add_parser("eval", help="pFq(num; den; X)")
    h.add_argument("--num", type=_floats, default=[])
    h.add_argument("--den", type=_floats, default=[])
    src = h.add_mutually_exclusive_group(required=True)
    src.add_argument("--eigs", type=_floats)
    src.add_argument("--matrix", help="JSON matrix file")
    h.add_argument("--identity-extrapolate", action="store_true",
                   help="extrapolate partial sums when X is the identity")
    _add_policy(h)
    h.set_defaults(func=cmd_hyp)

    c = sub.add_parser("const", help="log multivariate gamma, beta and Stiefel volume")
    c.add_argument("which", choices=["gamma", "beta", "beta-star", "stiefel"])
    _add_shapes(c)
    c.add_argument("--n", type=int, default=None, help="Stiefel column count")
    c.set_defaults(func=cmd_const)

    s = sub.add_parser("sample", help="draw matrix gamma/beta variates to JSONL")
    s.add_argument("dist", choices=["cgamma", "cbeta1", "cbeta2", "bgb1", "bgb2"])
    _add_shapes(s)
    _add_mc(s, n_default=1)
    s.add_argument("--out", default=None, help="JSONL path (default: stdout)")
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("density", help="log-density of a matrix gamma/beta variate")
    d.add_argument("dist", choices=["cgamma", "cbeta1", "cbeta2"])
    d.add_argument("--a", type=float, required=True)
    d.add_argument("--b", type=float, default=None)
    d.add_argument("--matrix", required=True)
    d.set_defaults(func=cmd_density)

    for kind in ("bgb1", "bgb2"):
        bp = sub.add_parser(kind, help=f"bimatrix beta type {'I' if kind == 'bgb1' else 'II'}")
        actions = bp.add_subparsers(dest="action", required=True)
        sm = actions.add_parser("sample")
        _add_shapes(sm)
        _add_mc(sm, n_default=1)
        sm.add_argument("--out", default=None, help="JSONL path (default: stdout)")
        de = actions.add_parser("density")
        _add_shapes(de)
        de.add_argument("--first", "--u1", "--f1", dest="first", required=True, help="JSON matrix file")
        de.add_argument("--second", "--u2", "--f2", dest="second", required=True, help="JSON matrix file")
        group = [sm, de]
        if kind == "bgb1":
            de.add_argument("--series", action="store_true", help="use the mixture series")
            _add_policy(de)
            mo = actions.add_parser("moment", help="E(|U1|^r |U2|^s); --n > 0 switches to Monte Carlo")
            _add_shapes(mo)
            mo.add_argument("--r", type=float, default=1.0)
            mo.add_argument("--s", type=float, default=1.0)
            mo.add_argument("--tol", type=float, default=1e-10)
            _add_mc(mo)
            ed = actions.add_parser("eigdensity", help="joint eigenvalue log-density")
            _add_shapes(ed)
            ed.add_argument("--lambda", dest="lam", type=_floats, required=True)
            ed.add_argument("--delta", type=_floats, required=True)
            ed.add_argument("--method", choices=["series", "determinant"], default="series")
            _add_policy(ed)
            group += [mo, ed]
        for g in group:
            g.set_defaults(func=cmd_bgb, kind=kind)

    mp = sub.add_parser("maxeig", help="joint CDF of the largest eigenvalues").add_subparsers(
        dest="action", required=True)
    cdf = mp.add_parser("cdf", help="Monte Carlo estimate")
    _add_shapes(cdf)
    cdf.add_argument("--x", type=float, required=True)
    cdf.add_argument("--y", type=float, required=True)
    _add_mc(cdf, n_default=100_000)
    orc = mp.add_parser("oracle", help="m = 1 quadrature")
    _add_shapes(orc)
    orc.add_argument("--x", type=float, required=True)
    orc.add_argument("--y", type=float, required=True)
    grid = mp.add_parser("grid", help="Monte Carlo sweep over an x-y grid, one set of draws")
    _add_shapes(grid)
    grid.add_argument("--xs", type=_floats, required=True)
    grid.add_argument("--ys", type=_floats, required=True)
    _add_mc(grid, n_default=100_000)
    grid.add_argument("--format", choices=["json", "csv"], default="json")
    grid.add_argument("--out", default=None)
    for g in (cdf, orc, grid):
        g.set_defaults(func=cmd_maxeig)

    v = sub.add_parser("verify", help="run self-check suites and print a report")
    v.add_argument("target", choices=["bgb1", "bgb2", "hyp", "zonal", "z", "inverse", "eig", "maxeig"])
    v.add_argument("--suite", type=_names, default=None, help="comma separated suite names")
    _add_shapes(v)
    _add_mc(v, n_default=20_000)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify, a=None, b=None, c=None)
    return parser


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for child in action.choices.values():
                yield child
                yield from _subparsers(child)


def read_config(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser, config: dict):
    for p in [parser, *_subparsers(parser)]:
        known = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in config.items() if k in known})


def _fail(exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            _apply_config(parser, read_config(known.config))
    except (OSError, DomainError) as exc:
        return _fail(exc)
    args = parser.parse_args(argv)
    needs = {"a": "--a", "b": "--b", "c": "--c"}
    try:
        if args.command in ("bgb1", "bgb2", "maxeig") or (
                args.command == "const" and args.which == "beta-star"):
            missing = [flag for k, flag in needs.items() if getattr(args, k, 0) is None]
            if missing:
                parser.error(f"missing required option(s): {', '.join(missing)}")
        elif args.command == "sample" and args.dist in ("bgb1", "bgb2"):
            missing = [flag for k, flag in needs.items() if getattr(args, k) is None]
            if missing:
                parser.error(f"missing required option(s): {', '.join(missing)}")
        elif args.command in ("sample", "const") and getattr(args, "a", 0) is None and \
                not (args.command == "const" and args.which == "stiefel"):
            parser.error("missing required option: --a")
        if (args.command == "sample" and args.dist in ("cbeta1", "cbeta2")) or (
                args.command == "density" and args.dist != "cgamma") or (
                args.command == "const" and args.which == "beta"):
            if args.b is None:
                parser.error("missing required option: --b")
        if args.command == "const" and args.which == "stiefel" and args.n is None:
            parser.error("missing required option: --n")
        status = args.func(args)
    except (DomainError, DivergenceError) as exc:
        return _fail(exc)
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
