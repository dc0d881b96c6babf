"""Self-contained numerical checks used by ``cpe verify``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ensembles as ens
from . import kernel as kern
from . import pfreq


@dataclass
class CheckResult:
    name: str
    measured: float
    tol: float
    passed: bool

    def row(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark:4}  {self.name:<48} {self.measured:11.3e}  (tol {self.tol:.1e})"


def _result(name, err, tol):
    err = float(err)
    return CheckResult(name, err, tol, bool(np.isfinite(err) and err <= tol))


def catalog(N):
    """Representative specs of every family at dimension N."""
    out = [ens.Haar(N), ens.Haar(N, "binomial"), ens.Jacobi(N, 1.5, 0.3),
           ens.Jacobi(N, 2.0, 0.0), ens.Gauss(N, 0.3), ens.Ginibre(N, 0.5),
           ens.Rank1Product(N, tuple(0.2 + 0.1 * k for k in range(N + 2))),
           ens.PhaseShift(0.7, ens.Jacobi(N, 2.5, -0.4)),
           ens.Inverse(ens.Jacobi(N, 1.5, 0.3)),
           ens.Product((ens.Jacobi(N, 1.5, 0.3), ens.Gauss(N, 0.5)))]
    return out


def _trapezoid_matrix(system, M):
    th = -np.pi + 2 * np.pi * np.arange(M) / M
    return th, system.eval_P(th), system.eval_Q(th)


def check_kernels(n_max=6, seed=0):
    rng = np.random.default_rng(seed)
    res = []
    err = 0.0
    for N in range(2, max(n_max, 2) + 1):
        w = ens.resolve_weight(ens.Jacobi(N, 0.0, 0.0))
        t1, t2 = rng.uniform(-np.pi, np.pi, (2, 100))
        err = max(err, np.abs(kern.kernel_eval(w, t1, t2) - kern.cue_kernel(N, t1, t2)).max())
    res.append(_result(f"Haar reduction N=2..{n_max}", err, 1e-10))
    for N in range(2, n_max + 1):
        g_err, tr_err, rep_err, cd_err = 0.0, 0.0, 0.0, 0.0
        for spec in catalog(N):
            w = ens.resolve_weight(spec)
            pk = kern.PolyaKernel(w)
            sysm = pk.system
            M = 1 << int(np.ceil(np.log2(w.coeffs.size + N + 1)))
            M = max(M, 2048)
            g_err = max(g_err, np.abs(sysm.gram_quadrature(M) - np.eye(N)).max())
            th, P, Q = _trapezoid_matrix(sysm, M)
            tr_err = max(tr_err, abs(np.mean(np.sum(P * Q, axis=1)) - N))
            a, b = rng.uniform(-np.pi, np.pi, (2, 4))
            K1 = kern.BiorthSystem.kernel_matrix(sysm, a, th)       # K(z1, z)
            K2 = kern.BiorthSystem.kernel_matrix(sysm, th, b)       # K(z, z2)
            rep = K1 @ K2 / M
            ref = sysm.kernel_matrix(a, b)
            rep_err = max(rep_err, np.abs(rep - ref).max())
            try:
                kern._check_cd_decay(w)
            except kern.InsufficientDecay:
                continue
            cd_err = max(cd_err, np.abs(pk.cd(a, b) - pk.series(a, b)).max())
        res.append(_result(f"biorthonormality (catalog, N={N})", g_err, 1e-9))
        res.append(_result(f"trace = N (catalog, N={N})", tr_err, 1e-10))
        res.append(_result(f"reproducing property (catalog, N={N})", rep_err, 1e-8))
        res.append(_result(f"Christoffel-Darboux vs series (N={N})", cd_err, 1e-8))
    return res


def check_transforms(n_max=4):
    res = []
    for N in range(2, n_max + 1):
        for a, g in ((0.5, 0.0), (2.5, 0.7)):
            M = 1 << 16
            th = -np.pi + 2 * np.pi * np.arange(M) / M
            vals = ens.jacobi_weight_function(N, a, g, th)
            s = np.arange(-20, N + 21)
            fft = (np.exp(1j * np.outer(s, th)) @ vals) / M
            err = np.abs(fft - ens.jacobi_coeff(N, a, g, s)).max()
            res.append(_result(f"Jacobi coefficients vs FFT (N={N}, a={a}, g={g})", err,
                               1e-6 if a < 1 else 1e-10))
    return res


def check_density(seed=0):
    from .density import jpdf_polya
    res = []
    for a, g in ((0.0, 0.0), (1.0, 0.3)):
        M = 4096
        th = -np.pi + 2 * np.pi * (np.arange(M) + 0.5) / M
        f = np.abs(2 * np.cos(th / 2)) ** a * np.exp(g * th)
        A = np.mean(f)
        B = np.mean(f * np.exp(1j * th))
        # |Delta|^2 = 2 - 2 cos(t1 - t2) integrates to 2 A^2 - 2 |B|^2
        quad = 2 * A * A - 2 * abs(B) ** 2
        err = abs(quad / ens.morris_constant(2, a, g) - 1)
        res.append(_result(f"Morris normalisation N=2 (a={a}, g={g})", err, 1e-6))
    w = ens.resolve_weight(ens.Jacobi(2, 1.0, 0.3), max_half=100)
    g = -np.pi + 2 * np.pi * np.arange(256) / 256
    T = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1)
    res.append(_result("jpdf sums to 1 on 256^2 grid (windowed Jacobi)",
                       abs(jpdf_polya(w, T).mean() - 1), 1e-8))
    return res


def check_pfreq(trials=200, seed=0):
    rng = np.random.default_rng(seed)
    res = []
    for c in pfreq.standard_candidates(7):
        rep = pfreq.check_order(c, trials, rng)
        worst = min(o.min_relative for o in rep.orders)
        res.append(CheckResult(f"frequency form {c.name} ({c.parity})", worst, pfreq.FORM_TOL,
                               rep.passed))
    rep = pfreq.check_order(pfreq.corrupted_haar_candidate(7), trials, rng)
    worst = min(o.min_relative for o in rep.orders)
    res.append(CheckResult("corrupted candidate rejected", worst, pfreq.FORM_TOL, not rep.passed))
    return res


def check_sampling(count=20000, seed=1):
    from .sampling import empirical_density, l1_distance, sample_polya_product
    gam = (0.1, 0.2, 0.3, 0.4, 0.5)
    b = sample_polya_product(3, gam, count, seed)
    sysm = kern.biorth_polya(ens.resolve_weight(ens.Rank1Product(3, gam)))
    h = empirical_density(b, 64)
    d = l1_distance(h, lambda e: kern.one_point_cdf(sysm, e))
    tol = 0.02 * np.sqrt(1e5 / count)
    return [_result(f"rank-1 product MC L1 (N=3, L=5, {count} samples)", d, tol)]


SUITES = {
    "kernels": lambda o: check_kernels(o.get("n_max", 6)),
    "transforms": lambda o: check_transforms(min(o.get("n_max", 4), 6)),
    "density": lambda o: check_density(),
    "pfreq": lambda o: check_pfreq(),
    "sampling": lambda o: check_sampling(),
}


def run_suite(name, **opts):
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}; choose from {sorted(SUITES)} or 'all'")
        out.extend(SUITES[n](opts))
    return out
