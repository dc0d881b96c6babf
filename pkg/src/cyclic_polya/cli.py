"""Command-line front end: ``cpe {kernel,density,sample,transform,verify}``.

Ensemble references for ``--product`` are comma-joined ``family:key=value:...``
items; list values use ``/`` (e.g. ``rank1-product:gammas=0.1/0.2/0.3/0.4``).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import ensembles as ens

DEFAULT_SEED = 20240611
COMMANDS = ("kernel", "density", "sample", "transform", "verify")
FAMILIES = ("haar", "jacobi", "gauss", "rank1-product", "ginibre")


class ConfigError(ValueError):
    pass


@dataclass
class JobConfig:
    command: str
    spec: object = None
    options: dict = field(default_factory=dict)
    out: str = None
    seed: int = DEFAULT_SEED
    threads: int = 1
    tol: float = None


# ---------------------------------------------------------------- parsing

def _shared(p):
    p.add_argument("--config", help="JSON file with flag values (flags win)")
    p.add_argument("--ensemble", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--gammas")
    p.add_argument("--variant", choices=("geometric", "binomial"))
    p.add_argument("--phase", type=float)
    p.add_argument("--inverse", action="store_true", default=None)
    p.add_argument("--product", help="comma-joined ensemble refs multiplied with the main ensemble")
    p.add_argument("--fixed-angles", dest="fixed_angles",
                   help="comma-joined eigenangles of a fixed matrix X")


def build_parser():
    ap = argparse.ArgumentParser(prog="cpe", description="Cyclic Polya ensemble toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    k = sub.add_parser("kernel", help="correlation kernel on a grid")
    _shared(k)
    k.add_argument("--grid", type=int)
    k.add_argument("--method", choices=("series", "cd", "contour"))
    d = sub.add_parser("density", help="joint density on a grid (N <= 3)")
    _shared(d)
    d.add_argument("--grid", type=int)
    s = sub.add_parser("sample", help="Monte Carlo spectra")
    _shared(s)
    s.add_argument("--count", type=int)
    s.add_argument("--burn-in", dest="burn_in", type=int)
    s.add_argument("--step-sigma", dest="step_sigma", type=float)
    t = sub.add_parser("transform", help="Laurent coefficients u_s over a range")
    _shared(t)
    t.add_argument("--s-range", dest="s_range", nargs=2, type=int, metavar=("LO", "HI"))
    v = sub.add_parser("verify", help="run numerical self-checks")
    _shared(v)
    v.add_argument("--suite", default=None)
    v.add_argument("--n-max", dest="n_max", type=int)
    return ap


def _floats(text, flag):
    try:
        return tuple(float(v) for v in str(text).replace("/", ",").split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated numbers, got {text!r}")


def _family_spec(fam, vals, flag="--ensemble"):
    N = vals.get("n")
    if N is None:
        raise ConfigError(f"{flag} {fam}: --n is required")
    if N < 1:
        raise ConfigError(f"--n must be >= 1 (got {N})")
    try:
        if fam == "haar":
            return ens.Haar(N, vals.get("variant") or "geometric")
        if fam == "jacobi":
            a = vals.get("alpha")
            a = 0.0 if a is None else float(a)
            if not a > -1:
                raise ConfigError(f"--alpha must be > -1 (got {a})")
            return ens.Jacobi(N, a, float(vals.get("gamma") or 0.0))
        if fam == "gauss":
            t = vals.get("t")
            if t is None:
                raise ConfigError("--t is required for the gauss ensemble")
            if not float(t) > 0:
                raise ConfigError(f"--t must be > 0 (got {t})")
            return ens.Gauss(N, float(t))
        if fam == "ginibre":
            nu = float(vals.get("nu") or 0.0)
            if not nu > -1:
                raise ConfigError(f"--nu must be > -1 (got {nu})")
            return ens.Ginibre(N, nu)
        if fam == "rank1-product":
            g = vals.get("gammas")
            if g is None:
                raise ConfigError("--gammas is required for rank1-product")
            g = _floats(g, "--gammas") if isinstance(g, str) else tuple(float(x) for x in g)
            return ens.Rank1Product(N, g)
    except ens.SpecError as e:
        raise ConfigError(f"{flag} {fam}: {e}")
    raise ConfigError(f"unknown ensemble {fam!r}; choose from {', '.join(FAMILIES)}")


def _parse_ref(ref, N):
    parts = ref.strip().split(":")
    vals = {"n": N}
    for kv in parts[1:]:
        if "=" not in kv:
            raise ConfigError(f"--product: malformed item {kv!r} in {ref!r}")
        k, v = kv.split("=", 1)
        vals[k.strip().replace("-", "_")] = v if k.strip() in ("gammas", "variant") else float(v)
    return _family_spec(parts[0].strip(), vals, "--product")


def _build_spec(vals):
    fam = vals.get("ensemble")
    if fam is None:
        raise ConfigError("--ensemble is required")
    spec = _family_spec(fam, vals)
    if vals.get("product"):
        refs = [r for r in vals["product"].split(",") if r.strip()]
        spec = ens.Product((spec,) + tuple(_parse_ref(r, spec.N) for r in refs))
    if vals.get("inverse"):
        spec = ens.Inverse(spec)
    if vals.get("phase") is not None:
        spec = ens.PhaseShift(float(vals["phase"]), spec)
    if vals.get("fixed_angles"):
        x = _floats(vals["fixed_angles"], "--fixed-angles")
        try:
            spec = ens.FixedTimes(x, spec)
        except ens.SpecError as e:
            raise ConfigError(f"--fixed-angles: {e}")
    return spec


DEFAULTS = {"grid": 128, "method": "series", "count": 10000, "burn_in": 10000,
            "suite": "all", "n_max": 6}


def parse_config(argv=None):
    args = build_parser().parse_args(argv)
    vals = {k: v for k, v in vars(args).items() if v is not None}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"--config: cannot read {args.config}: {e}")
        known = set(vars(args))
        for k, v in cfg.items():
            key = k.replace("-", "_")
            if key not in known:
                raise ConfigError(f"--config: unknown key {k!r}")
            vals.setdefault(key, v)
    for k, v in DEFAULTS.items():
        vals.setdefault(k, v)
    cmd = vals["command"]
    threads = vals.get("threads")
    if threads is None:
        threads = int(os.environ.get("CPE_THREADS", "1"))
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    spec = None
    if cmd != "verify":
        spec = _build_spec(vals)
    if cmd in ("kernel", "density") and vals["grid"] < 2:
        raise ConfigError("--grid must be >= 2")
    if cmd == "transform" and "s_range" not in vals:
        raise ConfigError("--s-range LO HI is required for transform")
    if cmd == "sample" and vals["count"] < 1:
        raise ConfigError("--count must be >= 1")
    opts = {k: vals[k] for k in ("grid", "method", "count", "burn_in", "step_sigma", "s_range",
                                 "suite", "n_max") if k in vals}
    return JobConfig(cmd, spec, opts, vals.get("out"), int(vals.get("seed", DEFAULT_SEED)),
                     threads, vals.get("tol"))


# ---------------------------------------------------------------- jobs

def _grid(M):
    return -np.pi + 2 * np.pi * np.arange(M) / M


def _spec_json(spec):
    return ens.spec_to_dict(spec)


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def run_kernel(job):
    from . import kernel as kern
    spec, M, method = job.spec, job.options["grid"], job.options["method"]
    th = _grid(M)
    meta = {"spec": _spec_json(spec)}
    if isinstance(spec, ens.FixedTimes):
        w = ens.resolve_weight(spec.inner)
        K = kern.FixedKernel(w, np.array(spec.x))
    else:
        if method == "contour":
            raise ConfigError("--method contour needs --fixed-angles")
        K = kern.PolyaKernel(ens.resolve_weight(spec))
    grid = kern.kernel_grid(K, th, th, method, meta)
    if job.out:
        grid.to_csv(job.out)
    else:
        print(f"kernel grid {M}x{M}, method {method}; trace/N = "
              f"{np.real(np.trace(grid.K)) / M / spec.N:.12f}")
    return 0


def run_density(job):
    from .density import jpdf_fixed_product, jpdf_polya
    spec, M = job.spec, job.options["grid"]
    N = spec.N
    if N > 3:
        raise ConfigError("density grids are limited to --n <= 3")
    # the window is cut so its frequencies do not alias on an M-point grid
    half = max(M // 2 - N - 1, 8)
    inner = spec.inner if isinstance(spec, ens.FixedTimes) else spec
    w = ens.resolve_weight(inner, max_half=half)
    g = _grid(M)
    T = np.stack(np.meshgrid(*([g] * N), indexing="ij"), axis=-1).reshape(-1, N)
    if isinstance(spec, ens.FixedTimes):
        vals = jpdf_fixed_product(w, np.array(spec.x), T)
    else:
        vals = jpdf_polya(w, T)
    fh = _open_out(job.out)
    try:
        fh.write(f"# spec: {json.dumps(_spec_json(spec), sort_keys=True)}\n")
        fh.write(f"# window: [{w.s_lo}, {w.s_hi}] tail_bound: {w.tail_bound:.3e} "
                 f"grid_mean: {np.mean(vals):.17g}\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow([f"theta_{j + 1}" for j in range(N)] + ["density"])
        if job.out:
            for row, v in zip(T, vals):
                wr.writerow([f"{x:.17g}" for x in row] + [f"{v:.17g}"])
    finally:
        if job.out:
            fh.close()
    return 0


def run_sample(job):
    from . import sampling as smp
    spec = job.spec
    count, seed = job.options["count"], job.seed
    if isinstance(spec, ens.Rank1Product):
        batch = smp.sample_polya_product(spec.N, spec.gammas, count, seed, job.threads)
    elif isinstance(spec, ens.Haar) and spec.variant == "geometric":
        batch = smp.sample_haar_batch(spec.N, count, seed, job.threads)
    elif isinstance(spec, ens.FixedTimes):
        raise ConfigError("sampling of fixed products is not supported")
    else:
        from .density import jpdf_polya
        if isinstance(spec, ens.Jacobi):
            f = lambda th: ens.jacobi_jpdf_closed(spec.N, spec.alpha, spec.gamma, th)
        else:
            w = ens.resolve_weight(spec)
            f = lambda th: jpdf_polya(w, th)
        batch = smp.metropolis_sample(f, spec.N, count, job.options["burn_in"],
                                      job.options.get("step_sigma"), seed,
                                      spec=_spec_json(spec))
    batch.spec = _spec_json(spec) if not batch.spec else batch.spec
    if job.out:
        batch.to_csv(job.out)
    else:
        h = smp.empirical_density(batch, 16)
        print(f"{count} samples, N={spec.N}; 16-bin masses: "
              + " ".join(f"{m:.4f}" for m in h.mass))
    return 0


def run_transform(job):
    spec = job.spec
    lo, hi = job.options["s_range"]
    if hi < lo:
        raise ConfigError("--s-range: HI must be >= LO")
    if isinstance(spec, ens.FixedTimes):
        raise ConfigError("transform of a fixed product has no single weight")
    s = np.arange(lo, hi + 1)
    u = ens.closed_form_transform(spec, s)
    fh = _open_out(job.out)
    try:
        fh.write(f"# spec: {json.dumps(_spec_json(spec), sort_keys=True)}\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["s", "re_u", "im_u"])
        for a, v in zip(s, np.atleast_1d(u)):
            wr.writerow([int(a), f"{v.real:.17g}", f"{v.imag:.17g}"])
    finally:
        if job.out:
            fh.close()
    return 0


def run_verify(job):
    from .verify import run_suite
    res = run_suite(job.options["suite"], n_max=job.options["n_max"])
    for r in res:
        print(r.row())
    ok = all(r.passed for r in res)
    print(f"{sum(r.passed for r in res)}/{len(res)} checks passed")
    if job.out:
        with open(job.out, "w") as fh:
            json.dump([vars(r) for r in res], fh, indent=2)
    return 0 if ok else 1


RUNNERS = {"kernel": run_kernel, "density": run_density, "sample": run_sample,
           "transform": run_transform, "verify": run_verify}


def run(job):
    return RUNNERS[job.command](job)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        job = parse_config(argv)
        return run(job)
    except ConfigError as e:
        print(f"cpe: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as e:
        print(f"cpe {argv[0] if argv else ''}: {type(e).__module__}.{type(e).__name__}: {e}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
