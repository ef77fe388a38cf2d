"""Command-line interface: generate clouds, evaluate sums, check accuracy,
and produce scaling benchmarks.

Exit codes: 2 invalid parameters, 3 geometry outside the Lipschitz
thresholds, 4 tolerance needs more expansion terms than supported.
"""

import argparse
import csv
import os
import sys
import time

import numpy as np

from . import pointio
from .driver import FmmConfig, evaluate, worker_count
from .errors import LipschitzTooLarge, TermLimitExceeded
from .oracle import KernelSpec, direct_eval, gen_wobble2d, gen_wobble3d, rel_error

BENCH_DIRECT_CAP = 100_000
BENCH_SUBSET = 1000


def _add_kernel_args(p, with_eps=True):
    p.add_argument("--kernel", required=True,
                   choices=["lap2d", "helm2d", "lap3d", "helm3d"])
    if with_eps:
        p.add_argument("--eps", type=float, required=True)
    p.add_argument("--wavenumber", type=float, default=0.0)
    p.add_argument("--k", type=int, choices=[1, 2], default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--deterministic", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="zfmm")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a benchmark point cloud")
    g.add_argument("--family", required=True, choices=["wobble2d", "wobble3d"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--a", type=float, default=None)
    g.add_argument("--b", type=float, default=None)
    g.add_argument("--t0", type=float, default=None)
    g.add_argument("--charges", action="store_true")
    g.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("eval", help="fast evaluation of the kernel sum")
    _add_kernel_args(e)
    e.add_argument("--src", required=True)
    e.add_argument("--targ", required=True)
    e.add_argument("--out", required=True)

    d = sub.add_parser("direct", help="brute-force evaluation")
    _add_kernel_args(d, with_eps=False)
    d.add_argument("--src", required=True)
    d.add_argument("--targ", required=True)
    d.add_argument("--out", required=True)

    c = sub.add_parser("check", help="relative error between two result files")
    c.add_argument("--fmm-out", required=True)
    c.add_argument("--direct-out", required=True)
    c.add_argument("--charges", required=True)

    b = sub.add_parser("bench", help="timing sweep over problem sizes")
    _add_kernel_args(b)
    b.add_argument("--n-list", required=True,
                   help="comma-separated point counts, e.g. 1e4,2e4,4e4")
    b.add_argument("--out", required=True)
    b.add_argument("--family", default=None, choices=["wobble2d", "wobble3d"])
    return ap


def _gen(args):
    if args.n < 1:
        print("error: --n must be positive", file=sys.stderr)
        return 2
    kw = {}
    for name in ("a", "b", "t0"):
        v = getattr(args, name)
        if v is not None:
            if name != "t0" and v <= 0 or name == "t0" and v <= 0:
                print(f"error: --{name} must be positive", file=sys.stderr)
                return 2
            kw[name] = v
    fam = gen_wobble2d if args.family == "wobble2d" else gen_wobble3d
    pts = fam(args.n, **kw)
    charges = None
    if args.charges:
        rng = np.random.default_rng(args.seed)
        charges = (rng.standard_normal(len(pts)) + 1j * rng.standard_normal(len(pts))) / np.sqrt(2.0)
    pointio.write_points(args.out, pts, charges)
    print(f"wrote {len(pts)} {args.family} points to {args.out}")
    return 0


def _load_pair(args):
    src, q = pointio.read_points(args.src)
    if q is None:
        raise SystemExit("error: source file carries no charges")
    if os.path.abspath(args.src) == os.path.abspath(args.targ):
        tgt = src  # same object: self-interactions excluded
    else:
        tgt, _ = pointio.read_points(args.targ)
    return src, q, tgt


def _eval(args):
    src, q, tgt = _load_pair(args)
    if args.threads is not None:
        os.environ["ZFMM_NUM_THREADS"] = str(args.threads)
    cfg = FmmConfig(
        kernel=args.kernel, eps=args.eps, kappa=args.wavenumber,
        k_override=args.k, deterministic=bool(args.deterministic),
    )
    try:
        u, report = evaluate(src, q, tgt, cfg)
    except LipschitzTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TermLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    pointio.write_result(args.out, u, cfg.dimension)
    print(f"workers={worker_count()}")
    for line in report.as_lines():
        print(line)
    return 0


def _direct(args):
    src, q, tgt = _load_pair(args)
    spec = KernelSpec(args.kernel, args.wavenumber)
    u = direct_eval(spec, src, q, tgt if tgt is not src else None)
    pointio.write_result(args.out, u, spec.dimension)
    print(f"n_targets={u.size}")
    return 0


def _check(args):
    u = pointio.read_result(getattr(args, "fmm_out"))
    u0 = pointio.read_result(getattr(args, "direct_out"))
    _, q = pointio.read_points(args.charges)
    if q is None:
        print("error: charges file carries no charges", file=sys.stderr)
        return 2
    err = rel_error(u, u0, q)
    print(f"relerr={err:.6e}")
    return 0


def _bench(args):
    try:
        ns = [int(float(s)) for s in args.n_list.split(",") if s.strip()]
    except ValueError:
        print("error: --n-list must be comma-separated numbers", file=sys.stderr)
        return 2
    family = args.family or ("wobble2d" if args.kernel.endswith("2d") else "wobble3d")
    gen = gen_wobble2d if family == "wobble2d" else gen_wobble3d
    spec = KernelSpec(args.kernel, args.wavenumber)
    rows = []
    rng = np.random.default_rng(0)
    for n in ns:
        pts = gen(n)
        n_eff = len(pts)
        q = (rng.standard_normal(n_eff) + 1j * rng.standard_normal(n_eff)) / np.sqrt(2.0)
        cfg = FmmConfig(
            kernel=args.kernel, eps=args.eps, kappa=args.wavenumber,
            k_override=args.k, deterministic=bool(args.deterministic),
        )
        t0 = time.perf_counter()
        u, report = evaluate(pts, q, pts, cfg)
        t_fmm = time.perf_counter() - t0
        if n_eff <= BENCH_DIRECT_CAP:
            t0 = time.perf_counter()
            u0 = direct_eval(spec, pts, q)
            t_direct = time.perf_counter() - t0
            err = rel_error(u, u0, q)
        else:
            sub = rng.choice(n_eff, BENCH_SUBSET, replace=False)
            t_direct = float("nan")
            u0 = _direct_subset(spec, pts, q, sub)
            err = float(
                np.linalg.norm(u[sub] - u0) / (np.linalg.norm(u0) + np.linalg.norm(q))
            )
        rows.append(
            dict(n=n_eff, t_fmm_seconds=t_fmm, t_direct_seconds=t_direct,
                 relerr=err, P_max=max(report.orders), k=report.k)
        )
        print(f"n={n_eff} t_fmm={t_fmm:.3f}s t_direct={t_direct:.3f}s relerr={err:.3e}")
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)
    return 0


def _direct_subset(spec, pts, q, sub):
    d = pts[sub][:, None, :] - pts[None, :, :]
    r = np.sqrt((d * d).sum(-1))
    mask = np.zeros(r.shape, bool)
    mask[np.arange(sub.size), sub] = True
    r[mask] = 1.0
    from .oracle import kernel_values

    vals = kernel_values(spec, r)
    vals[mask] = 0.0
    return vals @ q


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {
        "gen": _gen, "eval": _eval, "direct": _direct,
        "check": _check, "bench": _bench,
    }
    return handlers[args.cmd](args)


if __name__ == "__main__":
    sys.exit(main())
