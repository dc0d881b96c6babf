"""Joint eigenvalue densities, normalisation constants and a brute-force correlation oracle."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .laurent import GAP_TOL, LaurentWeight, eval_weight, min_gap, vandermonde_angles
from .spherical import DegenerateSpectrum

NEG_CLAMP = 1e-10


class NotPolyaError(AssertionError):
    """Density evaluation produced a clearly complex or negative value."""


def normalization_CN(w):
    """prod_j j! u_j; real positive for a valid weight."""
    core = w.core()
    if np.any(core == 0):
        raise ValueError("vanishing core coefficient")
    c = complex(np.prod(core) * math.prod(math.factorial(j) for j in range(w.N)))
    if c.real <= 0 or abs(c.imag) > 1e-10 * abs(c):
        raise NotPolyaError(f"normalisation constant not real positive: {c}")
    return c.real


def _deriv_table(w, angles):
    """Values of (-z d/dz)^b w at e^{i angle}, b = 0..N-1; shape (len(angles), N)."""
    s = w.indices.astype(float)
    E = np.exp(-1j * np.outer(angles, s)) * w.coeffs
    powers = s[:, None] ** np.arange(w.N)[None, :]
    return E @ powers


def _entry_error(w, orders=None):
    """Absolute error of one table entry: discarded tail plus summation roundoff."""
    orders = w.N if orders is None else orders
    s = np.abs(w.indices.astype(float))
    a = np.abs(w.coeffs)
    smax = max(abs(w.s_lo), abs(w.s_hi), 1)
    return max(w.tail_bound * smax ** b + 8 * np.finfo(float).eps * np.sum(s ** b * a)
               for b in range(orders))


def _gather(table, inv, shape):
    return table[inv].reshape(shape + (table.shape[1],))


def _finish(val, scale, tail_scale):
    im_tol = NEG_CLAMP * scale + tail_scale
    if np.any(np.abs(val.imag) > im_tol):
        k = np.argmax(np.abs(val.imag) - im_tol)
        raise NotPolyaError(f"density has imaginary part {val.imag.flat[k]:.3e}")
    re = val.real
    if np.any(re < -im_tol):
        k = np.argmax(-re - im_tol)
        raise NotPolyaError(f"density negative: {re.flat[k]:.3e}")
    return np.where(re < 0, 0.0, re)


def jpdf_polya(w, theta, chunk=8192):
    """Joint density of eigenangles (w.r.t. prod d theta/2pi on the full torus).

    ``theta`` has shape (..., N); returns an array of shape (...).
    """
    theta = np.asarray(getattr(theta, "angles", theta), dtype=float)
    N = w.N
    if theta.shape[-1] != N:
        raise ValueError(f"expected {N} angles, got {theta.shape[-1]}")
    batch = theta.shape[:-1]
    flat = theta.reshape(-1, N)
    uniq, inv = np.unique(flat, return_inverse=True)
    inv = inv.reshape(flat.shape)
    norm = math.factorial(N) * normalization_CN(w)
    out = np.empty(flat.shape[0])
    err = _entry_error(w)
    for k in range(0, flat.shape[0], chunk):
        idx = inv[k:k + chunk]
        sub = np.unique(idx)
        table = _deriv_table(w, uniq[sub])
        pos = np.searchsorted(sub, idx)
        A = table[pos]                              # (n, N, N): rows a, columns b
        det = np.linalg.det(A)
        vd = vandermonde_angles(flat[k:k + chunk])
        val = vd * det / norm
        rown = np.linalg.norm(A, axis=2).prod(axis=1)
        scale = np.abs(vd) * rown / norm
        tail = np.abs(vd) / norm * N * np.linalg.norm(A, axis=2).max(axis=1) ** (N - 1) * err
        out[k:k + chunk] = _finish(val, scale, tail)
    return out.reshape(batch) if batch else float(out[0])


def class_density(w, theta, chunk=4096):
    """Density on U(N) w.r.t. Haar measure as a function of the eigenangles.

    Equals N! jpdf / |Delta|^2 = det[(-z d)^{b-1} w(z_a)] / (C_N conj(Delta(z))).
    """
    theta = np.asarray(theta, dtype=float)
    N = w.N
    batch = theta.shape[:-1]
    flat = theta.reshape(-1, N)
    cn = normalization_CN(w)
    out = np.empty(flat.shape[0], dtype=complex)
    for k in range(0, flat.shape[0], chunk):
        blk = flat[k:k + chunk]
        table = _deriv_table(w, blk.ravel()).reshape(blk.shape[0], N, N)
        out[k:k + chunk] = np.linalg.det(table) / (cn * np.conj(vandermonde_angles(blk)))
    return out.reshape(batch)


def jpdf_fixed_product(w, x, theta):
    """Density of eigenangles of X V U V^dagger with X fixed (angles x), U from weight w."""
    x = np.asarray(getattr(x, "angles", x), dtype=float)
    theta = np.asarray(getattr(theta, "angles", theta), dtype=float)
    N = w.N
    if x.size != N:
        raise ValueError("fixed spectrum must have N angles")
    if min_gap(x) < GAP_TOL:
        raise DegenerateSpectrum("fixed spectrum is degenerate (confluent limit not implemented)")
    batch = theta.shape[:-1]
    flat = theta.reshape(-1, N)
    diff = flat[:, :, None] - x[None, None, :]
    W = eval_weight(w, diff.ravel()).reshape(diff.shape)
    det = np.linalg.det(W)
    core = complex(np.prod(w.core()))
    val = vandermonde_angles(flat) / vandermonde_angles(x) * det / (math.factorial(N) * core)
    pref = np.abs(vandermonde_angles(flat)) / (math.factorial(N) * abs(core)
                                               * abs(vandermonde_angles(x)))
    scale = np.abs(val) + pref * np.linalg.norm(W, axis=2).prod(axis=1)
    tail = pref * N * np.linalg.norm(W, axis=2).max(axis=1) ** (N - 1) * _entry_error(w, 1)
    out = _finish(val, scale, tail)
    return out.reshape(batch) if batch else float(out[0])


def group_integral_rhs(w, x, y):
    """det[w(x_a/y_b)] / (prod u_j Delta(x^dagger) Delta(y))."""
    x = np.asarray(getattr(x, "angles", x), dtype=float)
    y = np.asarray(getattr(y, "angles", y), dtype=float)
    if min_gap(x) < GAP_TOL or min_gap(y) < GAP_TOL:
        raise DegenerateSpectrum("degenerate input")
    diff = x[:, None] - y[None, :]
    W = eval_weight(w, diff.ravel()).reshape(diff.shape)
    return complex(np.linalg.det(W) / (np.prod(w.core()) * vandermonde_angles(-x)
                                       * vandermonde_angles(y)))


def brute_force_Rk(density, N, k, thetas, grid_M=None):
    """k-point function by trapezoid integration of the joint density over N-k angles.

    ``density`` is a LaurentWeight, a pair (weight, fixed angles) or a callable
    mapping an (..., N) array of angles to density values.
    """
    if N > 3:
        raise ValueError("brute-force oracle limited to N <= 3")
    if not 1 <= k <= N:
        raise ValueError("need 1 <= k <= N")
    if grid_M is None:
        grid_M = 512 if N <= 2 else 128
    if grid_M < 128:
        raise ValueError("grid_M must be at least 128")
    if isinstance(density, LaurentWeight):
        f = lambda th: jpdf_polya(density, th)
    elif isinstance(density, tuple):
        w, x = density
        f = lambda th: jpdf_fixed_product(w, x, th)
    else:
        f = density
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    pref = math.factorial(N) / math.factorial(N - k)
    if k == N:
        return pref * np.asarray(f(thetas))
    g = -np.pi + 2 * np.pi * np.arange(grid_M) / grid_M
    rest = np.array(list(itertools.product(g, repeat=N - k)))
    out = []
    for th in thetas:
        full = np.concatenate([np.broadcast_to(th, (rest.shape[0], k)), rest], axis=1)
        out.append(pref * np.mean(f(full)))
    return np.array(out)
