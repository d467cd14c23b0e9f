"""Command-line front end.

Exit codes: 0 success or isometric-consistent, 1 a check failed, 2 bad input
or numeric failure, 3 distinct, 4 inconclusive.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from contextlib import nullcontext

import numpy as np

from . import discrete, heat, io, models, specdist, vdm
from .errors import InputError, VectorHeatError

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT, EXIT_DISTINCT, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4

DEFAULT_T = [0.1, 1.0, 10.0]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--model", choices=models.KINDS, default="circle")
    p.add_argument("--radius", type=float, help="circle / sphere2 radius")
    p.add_argument("--periods", type=float, nargs="+", help="flat_torus periods")
    p.add_argument("--source", choices=("analytic", "discrete"), default="analytic")
    p.add_argument("--spectrum", help="spectral-data JSON to use instead of --model")
    p.add_argument("--n", type=int, help="number of sample points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sampling", choices=("grid", "uniform_random"), default="grid")
    p.add_argument("--bandwidth", type=float, help="kernel bandwidth for --source discrete")
    p.add_argument("--count", type=int, help="number of eigenpairs")
    p.add_argument("--t", type=float, nargs="+", help="diffusion time(s)")
    p.add_argument("--K", type=int, help="truncation (eigenspace boundary)")
    p.add_argument("--N-exponent", dest="N_exponent", type=float, help="Sobolev exponent N > d/2")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--budget", type=int, default=20, help="alignment sweeps")
    p.add_argument("--serial", action="store_true", help="single-threaded BLAS for bitwise reproducibility")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="vectorheat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="build and save spectral data")
    sp.add_argument("--against-analytic", action="store_true", help="compare eigenvalues with the closed forms")
    sp.add_argument("--rtol", type=float, default=0.05)

    vp = sub.add_parser("verify", parents=[common], help="run the inequality suite")
    vp.add_argument("--strict", action="store_true", help="also run the stated (uncorrected) pointwise bounds")
    vp.add_argument("--configs", type=int, default=20, help="random continuity configurations per t")

    sub.add_parser("embed", parents=[common], help="vector diffusion map coordinates")
    sub.add_parser("dist", parents=[common], help="pairwise vector diffusion distances")

    cp = sub.add_parser("compare", parents=[common], help="vector spectral distance certificate")
    cp.add_argument("--model-b", choices=models.KINDS)
    cp.add_argument("--radius-b", type=float)
    cp.add_argument("--periods-b", type=float, nargs="+")
    cp.add_argument("--spectrum-b")
    cp.add_argument("--relabel", action="store_true", help="compare against an isometric relabelled copy")
    cp.add_argument("--match-volume", action="store_true", help="rescale model B to the volume of A")
    cp.add_argument("--threshold", type=float, default=0.01)

    sub.add_parser("report", parents=[common], help="CSV of t, Z_TM, Z_M, ratio")
    return parser


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------


def _model(kind, radius, periods) -> models.ManifoldModel:
    kw = {}
    if radius is not None:
        kw["radius"] = radius
    if periods is not None:
        kw["periods"] = periods
    return models.make_model(kind, **kw)


def _cloud(model, args) -> models.PointCloud:
    if args.n is None:
        return models.default_cloud(model)
    return models.sample(model, args.n, args.sampling, args.seed if args.sampling == "uniform_random" else None)


def _cache_key(model, args, count) -> str:
    key = json.dumps(
        [model.to_dict(), args.source, args.n, args.sampling, args.seed, args.bandwidth, count], sort_keys=True
    )
    return hashlib.sha256(key.encode()).hexdigest()[:20]


def _build(model, cloud, args):
    if args.source == "analytic":
        return models.analytic_spectra(model, args.count or 40, cloud)
    eps = args.bandwidth or discrete.default_bandwidth(cloud)
    return discrete.discrete_spectra(cloud, eps, args.count or 10, seed=args.seed)


def get_spectra(args, model=None, cloud=None):
    """Spectra from ``--spectrum`` or built from the model flags (cached when enabled)."""
    if args.spectrum and model is None:
        return io.load_spectra(args.spectrum)
    model = model or _model(args.model, args.radius, args.periods)
    root = io.cache_dir()
    if root is not None and cloud is None:
        path = root / f"{_cache_key(model, args, args.count)}.json"
        if path.exists():
            return io.load_spectra(path)
        spectra = _build(model, _cloud(model, args), args)
        io.save_spectra(path, *spectra)
        return spectra
    return _build(model, cloud if cloud is not None else _cloud(model, args), args)


def _boundary_truncate(spec, K=None):
    bounds = spec.boundaries()
    if K is None:
        K = bounds[-1] if bounds[-1] == spec.size else bounds[-2]
    elif K not in bounds:
        raise InputError(f"--K {K} splits an eigenspace; choose one of {bounds[:10]}")
    return spec.truncate(K)


def _open_out(path):
    return open(path, "w", newline="") if path else nullcontext(sys.stdout)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    tangent, scalar = get_spectra(args)
    print(f"# {tangent.model.name} source={tangent.source} n={tangent.n}")
    print(f"{'j':>4} {'lambda_j (tangent)':>20} {'mu_j (scalar)':>20}")
    for j in range(max(tangent.size, scalar.size if scalar else 0)):
        a = f"{tangent.eigenvalues[j]:20.10g}" if j < tangent.size else " " * 20
        b = f"{scalar.eigenvalues[j]:20.10g}" if scalar is not None and j < scalar.size else ""
        print(f"{j:>4} {a} {b}")
    if args.out:
        io.save_spectra(args.out, tangent, scalar)
    if args.against_analytic:
        ref_t, ref_s = models.analytic_spectra(tangent.model, tangent.size, models.sample(tangent.model, 64))
        ok = True
        for name, got, ref in (("tangent", tangent, ref_t), ("scalar", scalar, ref_s)):
            if got is None:
                continue
            k = min(got.size, ref.size)
            err = np.abs(got.eigenvalues[:k] - ref.eigenvalues[:k]) / np.maximum(ref.eigenvalues[:k], 1.0)
            print(f"[{'PASS' if err.max() <= args.rtol else 'FAIL'}] {name} max relative error {err.max():.3g}")
            ok &= bool(err.max() <= args.rtol)
        return EXIT_OK if ok else EXIT_FAIL
    return EXIT_OK


def run_suite(tangent, scalar, ts, N_exponent=None, configs=20, strict=False, seed=0):
    """All inequality checks over the time grid; returns a list of reports."""
    if scalar is None:
        raise InputError("verification needs both the tangent and the scalar spectrum")
    model = tangent.model
    d = model.dim
    eps, alpha = models.default_comparison(model)
    N = N_exponent or d / 2 + 0.5
    trunc = _boundary_truncate(tangent)
    rng = np.random.default_rng(seed)
    positive = [lv for lv in tangent.levels if lv > 0][:3]
    reports = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for t in ts:
            reports.append(heat.check_kato(tangent, scalar, t))
            reports.append(heat.check_trace_comparison(model, scalar, t, eps, alpha))
            reports.append(heat.check_op_diagonal(tangent, scalar, t))
            reports.append(heat.check_diagonal_trace(tangent, scalar, t, factor=d))
            if strict:
                reports.append(heat.check_hs_diagonal(tangent, scalar, t))
                reports.append(heat.check_diagonal_trace(tangent, scalar, t, factor=1.0))
            for _ in range(configs):
                s = float(rng.uniform(0.5, 2.0) * t)
                x, y = (int(v) for v in rng.integers(0, tangent.n, 2))
                a = vdm.BasisRotation.random(trunc, rng, fix_zero=True)
                b = vdm.BasisRotation.random(trunc, rng, fix_zero=True)
                reports.append(specdist.continuity_gap(trunc, t, s, a, b, x, y, N))
                if strict:
                    reports.append(specdist.continuity_gap(trunc, t, s, a, b, x, y, N, form="literal"))
        for lam in positive:
            if lam < tangent.eigenvalues[-1]:
                reports.append(heat.check_mu_bound(tangent, scalar, 0, lam, factor=d))
                if strict:
                    reports.append(heat.check_mu_bound(tangent, scalar, 0, lam, factor=1.0))
    return reports


def cmd_verify(args) -> int:
    tangent, scalar = get_spectra(args)
    reports = run_suite(tangent, scalar, args.t or DEFAULT_T, args.N_exponent, args.configs, args.strict, args.seed)
    for r in reports:
        if r.check != "continuity" or not r.passed:
            extra = f" ratio={r.extra['ratio']:.12g}" if "ratio" in r.extra else ""
            print(r.line() + extra)
    n_cont = sum(r.check == "continuity" for r in reports)
    print(f"continuity: {sum(r.passed for r in reports if r.check == 'continuity')}/{n_cont} configurations pass")
    if args.out:
        if (args.format or "json") == "csv":
            rows = [(r.check, json.dumps(r.inputs), r.lhs, r.rhs, r.margin, r.tolerance, r.passed) for r in reports]
            io.write_csv(args.out, rows, ["check", "inputs", "lhs", "rhs", "margin", "tolerance", "pass"])
        else:
            with open(args.out, "w") as fh:
                json.dump([r.to_dict() for r in reports], fh)
                fh.write("\n")
    failed = [r for r in reports if not r.passed]
    if failed:
        print("failed checks: " + ", ".join(sorted({r.check for r in failed})), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_embed(args) -> int:
    tangent, _ = get_spectra(args)
    spec = _boundary_truncate(tangent, args.K)
    emb = vdm.embed(spec, (args.t or [0.1])[0])
    if (args.format or "json") == "csv":
        header = [f"v{n}_{m}" for n, m in emb.pairs]
        if args.out:
            io.write_csv(args.out, emb.coords.tolist(), header)
        else:
            print(",".join(header))
            for row in emb.coords:
                print(",".join(f"{v:.12g}" for v in row))
    else:
        text = json.dumps(io.embedding_to_dict(emb))
        with _open_out(args.out) as fh:
            fh.write(text + "\n")
    print(f"# embedded {emb.n} points, K={emb.K}, margin={vdm.injectivity_margin(emb):.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_dist(args) -> int:
    tangent, _ = get_spectra(args)
    D = vdm.vdm_distances(tangent, (args.t or [0.1])[0])
    D = (D + D.T) / 2
    np.fill_diagonal(D, 0.0)
    if (args.format or "csv") == "json":
        with _open_out(args.out) as fh:
            fh.write(json.dumps({"t": (args.t or [0.1])[0], "distances": D.tolist()}) + "\n")
    elif args.out:
        io.write_csv(args.out, D.tolist())
    else:
        for row in D:
            print(",".join(f"{v:.12g}" for v in row))
    return EXIT_OK


def _relabelled(model, cloud):
    """An isometric copy of ``model`` with the cloud's points carried along."""
    if model.kind == "flat_torus":
        twin = models.make_model("flat_torus", periods=model.periods[::-1])
        pts = cloud.points[:, ::-1]
    elif model.kind == "circle":
        twin = model
        pts = np.mod(-cloud.points, 2 * math.pi * model.radius)
    else:
        twin = model
        pts = cloud.points + np.array([0.0, 1.0])
    return twin, models.cloud_from_points(twin, pts, cloud.weights)


def cmd_compare(args) -> int:
    if args.n is None:
        args.n = {"circle": 128, "flat_torus": 256, "sphere2": 288}[args.model]
    if args.count is None:
        args.count = 30
    tA, _ = get_spectra(args)
    if args.relabel:
        twin, cloud = _relabelled(tA.model, tA.cloud)
        tB, _ = get_spectra(args, twin, cloud)
    elif args.spectrum_b:
        tB, _ = io.load_spectra(args.spectrum_b)
    else:
        if args.model_b is None:
            raise InputError("compare needs --model-b, --spectrum-b or --relabel")
        mB = _model(args.model_b, args.radius_b, args.periods_b)
        if args.match_volume:
            scale = (tA.model.volume / mB.volume) ** (1 / mB.dim)
            if mB.kind == "flat_torus":
                mB = models.make_model("flat_torus", periods=[p * scale for p in mB.periods])
            else:
                mB = models.make_model(mB.kind, radius=mB.radius * scale)
        nB = {"circle": 128, "flat_torus": 256, "sphere2": 288}[mB.kind]
        saved = args.n
        args.n = nB
        tB, _ = get_spectra(args, mB, _cloud(mB, args))
        args.n = saved
    tA, tB = _boundary_truncate(tA, args.K), _boundary_truncate(tB)
    t = (args.t or [0.5])[0]
    verdict, cert = specdist.isometry_test(tA, tB, t, args.threshold, args.budget, args.seed)
    doc = {"verdict": verdict, "threshold": args.threshold, "models": [tA.model.name, tB.model.name]}
    doc.update(cert.to_dict())
    with _open_out(args.out) as fh:
        fh.write(json.dumps(doc) + "\n")
    print(f"# {verdict}: lower={cert.lower:.6g} upper={cert.upper:.6g}", file=sys.stderr)
    return {"isometric-consistent": EXIT_OK, "distinct": EXIT_DISTINCT}.get(verdict, EXIT_INCONCLUSIVE)


def cmd_report(args) -> int:
    tangent, scalar = get_spectra(args)
    if scalar is None:
        raise InputError("report needs the scalar spectrum")
    ts = args.t or list(np.round(np.logspace(-1, 1, 9), 12))
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for t in ts:
            zt = heat.partition(tangent, t).value
            zm = heat.partition(scalar, t).value
            rows.append((float(t), zt, zm, zt / zm))
    header = ["t", "Z_TM", "Z_M", "ratio"]
    if (args.format or "csv") == "json":
        with _open_out(args.out) as fh:
            fh.write(json.dumps([dict(zip(header, r)) for r in rows]) + "\n")
    elif args.out:
        io.write_csv(args.out, rows, header)
    else:
        print(",".join(header))
        for r in rows:
            print(",".join(f"{v:.12g}" for v in r))
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "embed": cmd_embed,
    "dist": cmd_dist,
    "compare": cmd_compare,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.t is not None and any(not t > 0 for t in args.t):
        print("error: every --t must be positive", file=sys.stderr)
        return EXIT_BAD_INPUT
    if args.serial:
        from threadpoolctl import threadpool_limits

        limiter = threadpool_limits(limits=1)
    else:
        limiter = nullcontext()
    try:
        with limiter:
            return COMMANDS[args.command](args)
    except (VectorHeatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
