"""Command-line front end for the tubal algebra toolkit.

Subcommands
-----------
``generate``
    Build a blur operator (and optionally truth, exact data, and noisy
    data realizations) and write them as T3B files plus a JSON manifest.
``decompose``
    Run one of the tensor decompositions on T3B input and write the
    factors plus a JSON manifest with residual diagnostics.
``solve``
    Regularized deblurring solves — single weight or a weight sweep —
    with a JSON report and an aligned text summary.
``image``
    Image/tensor conversion, side-by-side panels, and sweep plots.

Reports and manifests are JSON with sorted keys, so identical runs
produce identical bytes (the solve report's wall time is the one
intentionally volatile field).  Exit status: 0 when every requested
residual check passed, 1 when a check failed, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import decomp, images, problems, t3b, tikhonov
from .errors import TubalError
from .tensor import (
    IMAG_RESIDUE_TOL,
    Tensor3,
    block_compose,
    fnorm,
    identity_tensor,
    tprod,
    ttranspose,
)

# Default bound of the manifest residual checks run by `decompose`.
DEFAULT_CHECK_TOL = 1e-8


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
    Path(path).write_text(text + "\n")


def _load(path) -> Tensor3:
    return t3b.read_t3b(path)


def _parse_seeds(text: str) -> list[int]:
    """Seed list: comma-separated ints, or a half-open range ``lo:hi``."""
    text = text.strip()
    if ":" in text:
        lo, hi = (int(part) for part in text.split(":"))
        if hi <= lo:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo, hi))
    return [int(part) for part in text.split(",")]


def _parse_grid(text: str) -> np.ndarray:
    """Geometric weight grid ``lo:hi:count``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0 < lo < hi) or count < 3:
        raise ValueError(f"grid needs 0 < lo < hi and count >= 3, got {text!r}")
    return np.geomspace(lo, hi, count)


def _check(name: str, value: float, bound: float) -> dict:
    return {
        "name": name,
        "value": float(value),
        "bound": float(bound),
        "pass": bool(value <= bound),
    }


# ---------------------------------------------------------------------------
# generate


def _cmd_generate(args) -> int:
    kind = "gravity_prolate" if args.kind == "gravity" else "gaussian"
    spec = problems.BlurSpec(
        kind=kind, n=args.n, d=args.d, alpha=args.alpha, sigma=args.sigma,
        band=args.band,
    )
    seeds = _parse_seeds(args.seeds) if args.seeds else []
    if args.noise < 0:
        raise ValueError(f"noise level must be >= 0, got {args.noise}")
    if args.noise > 0 and not args.xtrue:
        raise ValueError("--noise needs --xtrue (there is no data to perturb)")
    if args.noise > 0 and not seeds:
        raise ValueError("--noise needs a nonempty --seeds list")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    a = problems.build_blur_tensor(spec)
    t3b.write_t3b(out / "A.t3b", a)
    files = {"a": "A.t3b"}
    shapes = {"a": list(a.shape)}

    if args.xtrue:
        if args.xtrue.startswith("ones:"):
            k = int(args.xtrue.split(":", 1)[1])
            if k < 1:
                raise ValueError(f"ones:<k> needs k >= 1, got {k}")
            x_true = problems.ones_solution(spec.n, k, spec.n)
        elif args.xtrue == "synthetic":
            x_true = images.synthetic_image(spec.n)
        else:
            raise ValueError(f"--xtrue must be ones:<k> or synthetic, got {args.xtrue!r}")
        b_true = tprod(a, x_true)
        t3b.write_t3b(out / "Xtrue.t3b", x_true)
        t3b.write_t3b(out / "Btrue.t3b", b_true)
        files["xtrue"] = "Xtrue.t3b"
        files["btrue"] = "Btrue.t3b"
        shapes["xtrue"] = list(x_true.shape)
        shapes["btrue"] = list(b_true.shape)
        if args.noise > 0:
            for seed in seeds:
                b, _ = problems.add_noise(b_true, args.noise, seed)
                name = f"B_seed{seed}.t3b"
                t3b.write_t3b(out / name, b)
                files[f"b_seed{seed}"] = name

    manifest = {
        "command": "generate",
        "kind": args.kind,
        "n": spec.n,
        "d": spec.d if kind == "gravity_prolate" else None,
        "alpha": spec.alpha if kind == "gravity_prolate" else None,
        "sigma": spec.sigma if kind == "gaussian" else None,
        "band": spec.band if kind == "gaussian" else None,
        "xtrue": args.xtrue,
        "noise_level": args.noise,
        "seeds": seeds if args.noise > 0 else [],
        "files": files,
        "shapes": shapes,
    }
    _write_json(manifest, out / "manifest.json")
    for role in sorted(files):
        print(f"wrote {out / files[role]}")
    print(f"wrote {out / 'manifest.json'}")
    return 0


# ---------------------------------------------------------------------------
# decompose


def _block_diag(a: Tensor3, b: Tensor3) -> Tensor3:
    za = Tensor3.zeros(a.n1, b.n2, a.n3)
    zb = Tensor3.zeros(b.n1, a.n2, a.n3)
    return block_compose(((a, za), (zb, b)))


def _orth_check(name: str, q: Tensor3, tol: float) -> dict:
    resid = fnorm(tprod(ttranspose(q), q) - identity_tensor(q.n2, q.n3))
    return _check(name, resid, tol * np.sqrt(q.n2))


def _decompose_tsvd(args, tol):
    if args.a is None:
        raise ValueError("tsvd needs --a")
    a = _load(args.a)
    f = decomp.tsvd(a)
    recon = fnorm(tprod(tprod(f.u, f.s), ttranspose(f.v)) - a)
    denom = fnorm(a)
    checks = [
        _check("reconstruction", recon / denom if denom > 0 else recon, tol),
        _orth_check("orthogonality_u", f.u, tol),
        _orth_check("orthogonality_v", f.v, tol),
        _check("imag_residue", f.imag_residue, IMAG_RESIDUE_TOL * (1 + denom)),
    ]
    factors = {"u": f.u, "s": f.s, "v": f.v}
    extra = {"inputs": {"a": str(args.a)}}
    return factors, checks, extra


def _decompose_tcsd(args, tol):
    if args.q is None or args.m1 is None:
        raise ValueError("tcsd needs --q and --m1 (row split of Q)")
    q = _load(args.q)
    f = decomp.tcsd_thin(q, args.m1, orth_tol=args.orth_tol)
    q1 = Tensor3(q.data[:, : args.m1, :])
    q2 = Tensor3(q.data[:, args.m1 :, :])
    zt = ttranspose(f.z)
    denom = fnorm(q)
    recon1 = fnorm(tprod(tprod(f.u, f.c), zt) - q1) / denom
    recon2 = fnorm(tprod(tprod(f.v, f.s), zt) - q2) / denom
    ident = fnorm(
        tprod(ttranspose(f.c), f.c)
        + tprod(ttranspose(f.s), f.s)
        - identity_tensor(q.n2, q.n3)
    )
    checks = [
        _check("reconstruction_q1", recon1, tol),
        _check("reconstruction_q2", recon2, tol),
        _check("cs_identity", ident, tol * np.sqrt(q.n2)),
        _orth_check("orthogonality_u", f.u, tol),
        _orth_check("orthogonality_v", f.v, tol),
        _orth_check("orthogonality_z", f.z, tol),
        _check("imag_residue", f.imag_residue, IMAG_RESIDUE_TOL * (1 + denom)),
    ]
    factors = {"u": f.u, "v": f.v, "z": f.z, "c": f.c, "s": f.s}
    extra = {"inputs": {"q": str(args.q)}, "m1": args.m1}
    return factors, checks, extra


def _decompose_tcsd_general(args, tol):
    if args.q is None or args.m1 is None or args.n1 is None:
        raise ValueError("tcsd-general needs --q, --m1, and --n1 (splits of Q)")
    q = _load(args.q)
    f = decomp.tcsd_general(q, args.m1, args.n1, orth_tol=args.orth_tol)
    left = ttranspose(_block_diag(f.u, f.v))
    right = _block_diag(f.w, f.z)
    denom = fnorm(q)
    pattern = fnorm(tprod(tprod(left, q), right) - f.d) / denom
    checks = [
        _check("pattern", pattern, tol),
        _orth_check("orthogonality_u", f.u, tol),
        _orth_check("orthogonality_v", f.v, tol),
        _orth_check("orthogonality_w", f.w, tol),
        _orth_check("orthogonality_z", f.z, tol),
        _check("imag_residue", f.imag_residue, IMAG_RESIDUE_TOL * (1 + denom)),
    ]
    factors = {"u": f.u, "v": f.v, "w": f.w, "z": f.z, "d": f.d}
    extra = {
        "inputs": {"q": str(args.q)},
        "m1": args.m1,
        "n1": args.n1,
        "p": f.p,
        "q": f.q,
    }
    return factors, checks, extra


def _decompose_tgsvd(args, tol):
    if args.a is None or args.b is None:
        raise ValueError("tgsvd needs --a and --b (the tensor pair)")
    a = _load(args.a)
    b = _load(args.b)
    f = decomp.tgsvd(a, b, rank_tol=args.rank_tol)
    scale_a = fnorm(a) * fnorm(f.x)
    scale_b = fnorm(b) * fnorm(f.x)
    resid_a = fnorm(tprod(tprod(ttranspose(f.u), a), f.x) - f.d_a)
    resid_b = fnorm(tprod(tprod(ttranspose(f.v), b), f.x) - f.d_b)
    checks = [
        _check("reconstruction_a", resid_a / scale_a if scale_a > 0 else resid_a, tol),
        _check("reconstruction_b", resid_b / scale_b if scale_b > 0 else resid_b, tol),
        _orth_check("orthogonality_u", f.u, tol),
        _orth_check("orthogonality_v", f.v, tol),
        _check(
            "imag_residue", f.imag_residue, IMAG_RESIDUE_TOL * (1 + fnorm(a) + fnorm(b))
        ),
    ]
    factors = {"u": f.u, "v": f.v, "x": f.x, "da": f.d_a, "db": f.d_b}
    extra = {
        "inputs": {"a": str(args.a), "b": str(args.b)},
        "ranks": list(f.ranks),
        "splits": list(f.splits),
        "uniform_structure": f.uniform_structure,
    }
    return factors, checks, extra


_DECOMPOSERS = {
    "tsvd": _decompose_tsvd,
    "tcsd": _decompose_tcsd,
    "tcsd-general": _decompose_tcsd_general,
    "tgsvd": _decompose_tgsvd,
}


def _cmd_decompose(args) -> int:
    factors, checks, extra = _DECOMPOSERS[args.method](args, args.check_tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    shapes = {}
    for role, tensor in factors.items():
        name = f"{role.upper()}.t3b"
        t3b.write_t3b(out / name, tensor)
        files[role] = name
        shapes[role] = list(tensor.shape)
    ok = all(c["pass"] for c in checks)
    manifest = {
        "command": "decompose",
        "method": args.method,
        "files": files,
        "shapes": shapes,
        "checks": checks,
        "tolerances": {
            "check_tol": args.check_tol,
            "imag_residue_tol": IMAG_RESIDUE_TOL,
        },
        "pass": ok,
        **extra,
    }
    _write_json(manifest, out / "manifest.json")
    for c in checks:
        flag = "ok " if c["pass"] else "FAIL"
        print(f"{flag} {c['name']:<18} {c['value']:.3e}  (bound {c['bound']:.3e})")
    print(f"wrote {len(files)} factor files and manifest.json to {out}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# solve


def _solve_datasets(args):
    """The list of (seed-label, data tensor) pairs a solve runs over."""
    if args.b:
        if args.noise is not None or args.seeds:
            raise ValueError("--noise/--seeds only apply to --btrue data")
        return [(None, _load(args.b))]
    b_true = _load(args.btrue)
    if args.noise is None or args.noise < 0:
        raise ValueError("--btrue needs a --noise level >= 0")
    seeds = _parse_seeds(args.seeds) if args.seeds else []
    if args.noise > 0 and not seeds:
        raise ValueError("noisy runs need a nonempty --seeds list")
    if not seeds:
        return [(None, b_true)]
    return [
        (seed, problems.add_noise(b_true, args.noise, seed)[0]) for seed in seeds
    ]


def _run_entry(args, a, l, run, label, at):
    bound = tikhonov.RESIDUAL_TOL * fnorm(tprod(at, run.b))
    entry = {
        "seed": label,
        "mu": run.mu,
        "relative_error": run.relative_error,
        "normal_residual": run.normal_residual,
        "residual_bound": bound,
        "residual_pass": bool(run.normal_residual <= bound),
        "refine_passes": run.refine_passes,
    }
    if args.oracle == "normal":
        x_ref = tikhonov.solve_tikhonov_normal(a, l, run.b, run.mu)
        entry["oracle_deviation"] = fnorm(run.x_mu - x_ref) / fnorm(x_ref)
        entry["oracle_pass"] = bool(entry["oracle_deviation"] <= 1e-8)
    return entry


def _seed_name(label) -> str:
    return "X.t3b" if label is None else f"X_seed{label}.t3b"


def _cmd_solve(args) -> int:
    t0 = time.perf_counter()
    a = _load(args.a)
    if args.l in ("l1", "l2"):
        l = tikhonov.make_regularizer(tikhonov.RegularizerKind(args.l), a.n2, a.n3)
        reg_desc = args.l
    else:
        l = _load(args.l)
        reg_desc = "file"
    x_true = _load(args.xtrue) if args.xtrue else None
    datasets = _solve_datasets(args)

    g = decomp.tgsvd(a, l)
    at = ttranspose(a)
    report = {
        "command": "solve",
        "operator": {"path": str(args.a), "shape": list(a.shape)},
        "regularizer": {"kind": reg_desc, "shape": list(l.shape)},
        "noise_level": args.noise,
        "seeds": [label for label, _ in datasets if label is not None],
        "ranks": list(g.ranks),
        "splits": list(g.splits),
        "uniform_structure": g.uniform_structure,
    }
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    if args.mu is not None:
        runs = []
        for label, b in datasets:
            run = tikhonov.run_tikhonov(a, l, b, args.mu, g=g, x_true=x_true)
            runs.append(_run_entry(args, a, l, run, label, at))
            if out:
                t3b.write_t3b(out / _seed_name(label), run.x_mu)
        report["mu"] = args.mu
        report["runs"] = runs
        errs = [r["relative_error"] for r in runs if r["relative_error"] is not None]
        report["mean_relative_error"] = float(np.mean(errs)) if errs else None
    else:
        if x_true is None:
            raise ValueError("--mu-grid needs --xtrue to rank the grid points")
        mus = _parse_grid(args.mu_grid)
        per_seed = []
        runs = []
        for label, b in datasets:
            sweep = tikhonov.sweep_mu(a, l, b, mus, g=g, x_true=x_true)
            per_seed.append((label, b, sweep))
        err_grid = np.array(
            [[run.relative_error for run in sweep] for _, _, sweep in per_seed]
        )
        mean_err = err_grid.mean(axis=0)
        best = int(np.argmin(mean_err))
        report["mu_grid"] = {"lo": float(mus[0]), "hi": float(mus[-1]), "count": len(mus)}
        report["sweep"] = [
            {
                "mu": float(mus[j]),
                "mean_relative_error": float(mean_err[j]),
                "max_normal_residual": float(
                    max(sweep[j].normal_residual for _, _, sweep in per_seed)
                ),
            }
            for j in range(len(mus))
        ]
        report["best_mu"] = float(mus[best])
        report["best_mean_relative_error"] = float(mean_err[best])
        report["interior_minimum"] = bool(0 < best < len(mus) - 1)
        for label, b, sweep in per_seed:
            runs.append(_run_entry(args, a, l, sweep[best], label, at))
            if out:
                t3b.write_t3b(out / _seed_name(label), sweep[best].x_mu)
        report["runs"] = runs
        report["mean_relative_error"] = float(mean_err[best])

    ok = all(r["residual_pass"] for r in report["runs"]) and all(
        r.get("oracle_pass", True) for r in report["runs"]
    )
    report["pass"] = ok
    report["wall_time_seconds"] = time.perf_counter() - t0
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        _write_json(report, args.report)

    _print_solve_summary(report)
    return 0 if ok else 1


def _print_solve_summary(report) -> None:
    op = report["operator"]["shape"]
    print(
        f"operator {op[0]}x{op[1]}x{op[2]}, regularizer {report['regularizer']['kind']}"
        f" {tuple(report['regularizer']['shape'])}, noise {report['noise_level']}"
    )
    if "sweep" in report:
        print(f"{'':2}{'mu':>12}  {'mean rel.err':>12}  {'max resid':>10}")
        for row in report["sweep"]:
            mark = "*" if row["mu"] == report["best_mu"] else " "
            print(
                f"{mark:2}{row['mu']:>12.4e}  {row['mean_relative_error']:>12.4e}"
                f"  {row['max_normal_residual']:>10.2e}"
            )
        print(
            f"best mu {report['best_mu']:.4e}  mean error "
            f"{report['best_mean_relative_error']:.4e}  interior minimum: "
            f"{report['interior_minimum']}"
        )
        return
    print(f"{'seed':>6}  {'mu':>12}  {'rel.error':>11}  {'nrm.resid':>10}  passes")
    for row in report["runs"]:
        seed = "-" if row["seed"] is None else row["seed"]
        err = "-" if row["relative_error"] is None else f"{row['relative_error']:.4e}"
        print(
            f"{seed:>6}  {row['mu']:>12.4e}  {err:>11}  "
            f"{row['normal_residual']:>10.2e}  {row['refine_passes']:>6}"
        )
    if report["mean_relative_error"] is not None:
        print(f"{'mean':>6}  {'':>12}  {report['mean_relative_error']:>11.4e}")


# ---------------------------------------------------------------------------
# image


def _cmd_image(args) -> int:
    if args.action == "import":
        if not args.image:
            raise ValueError("import needs --image")
        t3b.write_t3b(args.out, images.load_image(args.image))
    elif args.action == "export":
        if not args.tensor:
            raise ValueError("export needs --tensor")
        images.save_image(_load(args.tensor), args.out)
    elif args.action == "synth":
        t3b.write_t3b(args.out, images.synthetic_image(args.n))
    elif args.action == "panel":
        panels = []
        for item in args.panel:
            title, _, path = item.partition("=")
            if not path:
                raise ValueError(f"--panel wants title=path, got {item!r}")
            panels.append((title, _load(path)))
        images.save_panel(panels, args.out)
    else:  # plot-sweep
        if not args.report:
            raise ValueError("plot-sweep needs --report")
        report = json.loads(Path(args.report).read_text())
        if "sweep" not in report:
            raise ValueError(f"{args.report} contains no sweep table")
        mus = [row["mu"] for row in report["sweep"]]
        errs = [row["mean_relative_error"] for row in report["sweep"]]
        images.plot_mu_sweep(mus, errs, args.out, chosen_mu=report.get("best_mu"))
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tubal",
        description="Tubal tensor algebra: decompositions and regularized deblurring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate blur operators and data")
    gen.add_argument("--kind", choices=("gravity", "gaussian"), required=True)
    gen.add_argument("--n", type=int, required=True, help="problem size")
    gen.add_argument("--d", type=float, default=0.8, help="gravity depth")
    gen.add_argument("--alpha", type=float, default=0.46, help="prolate bandwidth")
    gen.add_argument("--sigma", type=float, default=3.0, help="Gaussian spread")
    gen.add_argument("--band", type=int, default=9, help="Gaussian kernel cutoff")
    gen.add_argument("--xtrue", help="truth: ones:<k> or synthetic")
    gen.add_argument("--noise", type=float, default=0.0, help="relative noise level")
    gen.add_argument("--seeds", help="comma list or lo:hi range of noise seeds")
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=_cmd_generate)

    dec = sub.add_parser("decompose", help="factor tensors, write factors + manifest")
    dec.add_argument("method", choices=sorted(_DECOMPOSERS))
    dec.add_argument("--a", help="input tensor (tsvd, tgsvd)")
    dec.add_argument("--b", help="second tensor of the pair (tgsvd)")
    dec.add_argument("--q", help="(partially) orthogonal input (tcsd, tcsd-general)")
    dec.add_argument("--m1", type=int, help="row split")
    dec.add_argument("--n1", type=int, help="column split (tcsd-general)")
    dec.add_argument("--orth-tol", type=float, default=decomp.DEFAULT_ORTH_TOL)
    dec.add_argument("--rank-tol", type=float, default=None)
    dec.add_argument("--check-tol", type=float, default=DEFAULT_CHECK_TOL)
    dec.add_argument("--out", required=True, help="output directory")
    dec.set_defaults(func=_cmd_decompose)

    sol = sub.add_parser("solve", help="regularized deblurring solve")
    sol.add_argument("--a", required=True, help="operator tensor")
    sol.add_argument("--l", default="l2", help="regularizer: l1, l2, or a T3B path")
    data = sol.add_mutually_exclusive_group(required=True)
    data.add_argument("--b", help="data tensor (solved as-is)")
    data.add_argument("--btrue", help="exact data; perturbed per seed")
    sol.add_argument("--noise", type=float, default=None, help="relative noise level")
    sol.add_argument("--seeds", help="comma list or lo:hi range of noise seeds")
    weight = sol.add_mutually_exclusive_group(required=True)
    weight.add_argument("--mu", type=float, help="regularization weight")
    weight.add_argument("--mu-grid", help="weight sweep lo:hi:count (geometric)")
    sol.add_argument("--xtrue", help="truth tensor for relative errors")
    sol.add_argument(
        "--oracle", choices=("normal",), help="cross-check against the direct solver"
    )
    sol.add_argument("--out", help="directory for solution tensors")
    sol.add_argument("--report", help="JSON report path")
    sol.set_defaults(func=_cmd_solve)

    img = sub.add_parser("image", help="image/tensor conversion and plots")
    img.add_argument(
        "action", choices=("import", "export", "synth", "panel", "plot-sweep")
    )
    img.add_argument("--image", help="image path (import)")
    img.add_argument("--tensor", help="tensor path (export)")
    img.add_argument("--n", type=int, default=300, help="scene size (synth)")
    img.add_argument(
        "--panel", action="append", default=[], help="title=path (repeatable)"
    )
    img.add_argument("--report", help="solve report with a sweep table (plot-sweep)")
    img.add_argument("--out", required=True, help="output path")
    img.set_defaults(func=_cmd_image)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TubalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
