"""Monte Carlo spectra: Haar matrices, rank-1 Jacobi factors and their products,
a Metropolis sampler for arbitrary joint densities, and histograms."""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .ensembles import rank1_angle_density

MODULUS_TOL = 1e-8
REORTHO_EVERY = 32
TABLE_NODES = 4096


def sample_stream(seed, index):
    """Independent generator for sample ``index``: Philox keyed by (seed, index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _qr_haar(Z):
    # unique QR: force diag(R) > 0 so Q is Haar distributed
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return Q * ph[..., None, :]


def sample_haar_unitary(N, rng):
    if N < 1:
        raise ValueError("N must be >= 1")
    Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
    return _qr_haar(Z)


# ---------------------------------------------------------------- rank-1 angle table

class AngleTable:
    """Inverse CDF of the rank-1 angle density on (-pi, pi).

    Cell integrals use 8-point Gauss-Legendre so the tabulated CDF is accurate
    far below 1e-8; the inverse is a monotone cubic (PCHIP) through the nodes.
    """

    def __init__(self, N, gamma, nodes=TABLE_NODES):
        self.N, self.gamma = N, gamma
        th = np.linspace(-np.pi, np.pi, nodes + 1)
        x, wq = np.polynomial.legendre.leggauss(8)
        h = np.diff(th)
        mid = 0.5 * (th[1:] + th[:-1])
        pts = mid[:, None] + 0.5 * h[:, None] * x[None, :]
        cell = 0.5 * h * (rank1_angle_density(N, gamma, pts) @ wq) / (2 * np.pi)
        cdf = np.concatenate([[0.0], np.cumsum(cell)])
        self.total = cdf[-1]
        cdf = cdf / cdf[-1]
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        self.theta_nodes = th[keep]
        self.cdf_nodes = cdf[keep]
        self.cdf = PchipInterpolator(th, cdf)
        self.inverse = PchipInterpolator(self.cdf_nodes, self.theta_nodes)

    def sample(self, u):
        return self.inverse(np.asarray(u))


@lru_cache(maxsize=64)
def angle_table(N, gamma):
    return AngleTable(N, float(gamma))


def rank1_from_draws(N, gamma, g, u):
    """Factor I - (1 + x) v v^dagger from 2N Gaussians g and one uniform u."""
    v = g[..., :N] + 1j * g[..., N:]
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    x = np.exp(1j * angle_table(N, gamma).sample(u))
    I = np.eye(N, dtype=complex)
    return I - (1 + x)[..., None, None] * v[..., :, None] * np.conj(v[..., None, :])


def sample_rank1(N, gamma, rng):
    """V diag(1, ..., 1, -x) V^dagger with V Haar and x from the rank-1 angle law."""
    V = sample_haar_unitary(N, rng)
    theta = angle_table(N, gamma).sample(rng.random())
    d = np.ones(N, dtype=complex)
    d[-1] = -np.exp(1j * theta)
    return (V * d) @ V.conj().T


# ---------------------------------------------------------------- batches

@dataclass
class SampleBatch:
    N: int
    count: int
    angles: np.ndarray
    seed: int
    spec: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# spec: {json.dumps(self.spec, sort_keys=True)}\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow([f"theta_{j + 1}" for j in range(self.N)])
            for row in self.angles:
                wr.writerow([f"{v:.17g}" for v in row])
        with open(str(path) + ".json", "w") as fh:
            json.dump({"seed": self.seed, "spec": self.spec, "count": self.count,
                       "N": self.N, **self.info}, fh, indent=2, sort_keys=True)


def default_threads():
    env = os.environ.get("CPE_THREADS")
    return int(env) if env else 1


def _spectrum(U):
    lam = np.linalg.eigvals(U)
    dev = np.abs(np.abs(lam) - 1).max()
    if dev > MODULUS_TOL:
        raise ArithmeticError(f"eigenvalue modulus deviates from 1 by {dev:.3e}")
    return np.sort(np.angle(lam), axis=-1)


def _reortho(U):
    Q, R = np.linalg.qr(U)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[..., None, :]


def _product_block(N, gammas, seed, start, stop):
    L = len(gammas)
    n = stop - start
    g = np.empty((n, L, 2 * N))
    u = np.empty((n, L))
    for i in range(n):
        rng = sample_stream(seed, start + i)
        for k in range(L):
            u[i, k] = rng.random()
            g[i, k] = rng.standard_normal(2 * N)
    U = np.broadcast_to(np.eye(N, dtype=complex), (n, N, N)).copy()
    for k in range(L):
        U = U @ rank1_from_draws(N, gammas[k], g[:, k], u[:, k])
        if (k + 1) % REORTHO_EVERY == 0:
            U = _reortho(U)
    return _spectrum(U)


def _run_blocks(fn, count, threads, block=2048):
    bounds = [(a, min(a + block, count)) for a in range(0, count, block)]
    if threads <= 1 or len(bounds) == 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda ab: fn(*ab), bounds))
    return np.concatenate(parts, axis=0)


def sample_polya_product(N, gammas, count, seed, threads=None):
    """Spectra of U_{g1} ... U_{gL}; sample i uses its own stream keyed by (seed, i)."""
    gammas = tuple(float(g) for g in gammas)
    if len(gammas) < N:
        raise ValueError(f"need L >= N rank-1 factors (got {len(gammas)})")
    threads = default_threads() if threads is None else threads
    angles = _run_blocks(lambda a, b: _product_block(N, gammas, seed, a, b), count, threads)
    spec = {"type": "Rank1Product", "N": N, "gammas": list(gammas)}
    return SampleBatch(N, count, angles, seed, spec)


def _haar_block(N, seed, start, stop):
    Z = np.empty((stop - start, N, N), dtype=complex)
    for i in range(stop - start):
        rng = sample_stream(seed, start + i)
        Z[i] = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
    return _qr_haar(Z)


def haar_matrices(N, count, seed, threads=None):
    threads = default_threads() if threads is None else threads
    return _run_blocks(lambda a, b: _haar_block(N, seed, a, b), count, threads)


def sample_haar_batch(N, count, seed, threads=None):
    U = haar_matrices(N, count, seed, threads)
    return SampleBatch(N, count, _spectrum(U), seed, {"type": "Haar", "N": N})


# ---------------------------------------------------------------- Metropolis

def _wrap(t):
    return np.mod(t + np.pi, 2 * np.pi) - np.pi


def metropolis_sample(jpdf, N, count, burn_in=10_000, step_sigma=None, seed=0,
                      thinning=None, chains=64, spec=None):
    """Single-angle Gaussian-step Metropolis on the N-torus.

    ``chains`` independent chains advance in lockstep (vectorised density calls);
    each step updates one angle per chain, cycling through the coordinates.
    """
    step_sigma = 0.5 / np.sqrt(N) if step_sigma is None else step_sigma
    thinning = 10 * N if thinning is None else thinning
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    x = rng.uniform(-np.pi, np.pi, (chains, N))
    p = np.asarray(jpdf(x), dtype=float)
    for _ in range(100):
        bad = ~(p > 0)
        if not bad.any():
            break
        x[bad] = rng.uniform(-np.pi, np.pi, (bad.sum(), N))
        p[bad] = jpdf(x[bad])
    else:
        raise RuntimeError("could not find a start with positive density")
    per_chain = -(-count // chains)
    total = burn_in + per_chain * thinning
    out = np.empty((per_chain, chains, N))
    acc = 0
    rows = np.arange(chains)
    for it in range(total):
        k = it % N
        prop = x.copy()
        prop[rows, k] = _wrap(x[rows, k] + step_sigma * rng.standard_normal(chains))
        q = np.asarray(jpdf(prop), dtype=float)
        u = rng.random(chains)
        ok = u * p < q
        x[ok] = prop[ok]
        p[ok] = q[ok]
        if it >= burn_in:
            acc += ok.sum()
            j = it - burn_in
            if (j + 1) % thinning == 0:
                out[j // thinning] = x
    angles = np.sort(out.reshape(-1, N)[:count], axis=1)
    rate = acc / max(1, (total - burn_in) * chains)
    return SampleBatch(N, count, angles, seed, spec or {}, {"acceptance": float(rate)})


# ---------------------------------------------------------------- histograms

@dataclass
class Histogram:
    edges: np.ndarray
    mass: np.ndarray

    @property
    def density(self):
        """Density w.r.t. d theta / 2 pi."""
        return self.mass / (np.diff(self.edges) / (2 * np.pi))


def empirical_density(batch, bins=64):
    if bins < 16:
        raise ValueError("bins must be >= 16")
    a = batch.angles if isinstance(batch, SampleBatch) else np.asarray(batch)
    edges = np.linspace(-np.pi, np.pi, bins + 1)
    counts, _ = np.histogram(a.ravel(), bins=edges)
    return Histogram(edges, counts / counts.sum())


def l1_distance(hist, cdf):
    """Sum over bins of |empirical mass - exact mass| given an exact CDF on (-pi, pi]."""
    exact = np.diff(cdf(hist.edges))
    return float(np.abs(hist.mass - exact).sum())
