"""Bi-orthonormal systems and correlation kernels.

Everything is evaluated in coefficient space: P_j are polynomials stored by
their monomial coefficients and Q_j are Laurent windows in z^{-l}.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .laurent import (GAP_TOL, decay_exponent, eval_weight, eval_weight_z,
                      min_gap)
from .spherical import DegenerateSpectrum
from .special import loggamma

GRAM_TOL = 1e-10
GRAM_REPAIR_MAX = 1e-6
DECAY_MARGIN = 0.01           # the decay exponent is estimated from the window edges


class InsufficientDecay(ValueError):
    pass


@dataclass
class BiorthSystem:
    N: int
    P: np.ndarray                 # (N, N): P[j, k] multiplies z^k
    Q: np.ndarray                 # (N, W): Q[j, l] multiplies z^{-(q_lo + l)}
    q_lo: int
    correction: float = 0.0       # size of any Gram repair applied

    @property
    def q_indices(self):
        return np.arange(self.q_lo, self.q_lo + self.Q.shape[1])

    def q_coeff(self, l):
        """Columns of Q at Laurent indices l (zero outside the window)."""
        l = np.asarray(l)
        k = l - self.q_lo
        ok = (k >= 0) & (k < self.Q.shape[1])
        out = np.zeros((self.N,) + l.shape, dtype=complex)
        out[:, ok] = self.Q[:, k[ok]]
        return out

    def eval_P(self, theta):
        theta = np.asarray(theta, dtype=float)
        E = np.exp(1j * np.multiply.outer(theta, np.arange(self.N)))
        return E @ self.P.T                         # (..., N)

    def eval_Q(self, theta):
        theta = np.asarray(theta, dtype=float)
        E = np.exp(-1j * np.multiply.outer(theta, self.q_indices))
        return E @ self.Q.T

    def gram(self):
        """Exact circle inner products <P_a, Q_b> = sum_k p_k q_k."""
        return self.P @ self.q_coeff(np.arange(self.N)).T

    def gram_quadrature(self, M=2048):
        th = -np.pi + 2 * np.pi * np.arange(M) / M
        return self.eval_P(th).T @ self.eval_Q(th) / M

    def kernel(self, theta1, theta2):
        """K(z1, z2) = sum_j P_j(z1) Q_j(z2), broadcasting theta1 against theta2."""
        a = self.eval_P(theta1)
        b = self.eval_Q(theta2)
        return np.sum(a * b, axis=-1)

    def kernel_matrix(self, theta1, theta2):
        return self.eval_P(np.asarray(theta1)) @ self.eval_Q(np.asarray(theta2)).T

    def check(self, tol=GRAM_TOL):
        """Verify biorthonormality; repair small deviations by a triangular change of basis."""
        G = self.gram()
        dev = np.abs(G - np.eye(self.N)).max()
        if dev <= tol:
            return self
        if dev > GRAM_REPAIR_MAX:
            raise ArithmeticError(f"Gram matrix deviates from identity by {dev:.3e}")
        from scipy.linalg import lu
        p, L, U = lu(G)
        if not np.allclose(p, np.eye(self.N)):
            raise ArithmeticError("Gram repair needs pivoting; system is ill-conditioned")
        P = np.linalg.solve(L, self.P)
        Q = np.linalg.solve(U.T, self.Q)
        return BiorthSystem(self.N, P, Q, self.q_lo, float(dev))


def _falling(x, n):
    """x (x-1) ... (x-n+1), elementwise in x."""
    out = np.ones_like(np.asarray(x, dtype=complex))
    for m in range(n):
        out = out * (x - m)
    return out


def biorth_polya(w, tol=GRAM_TOL):
    """Bi-orthonormal pair of a Polya weight.

    P_j(z) = sum_{k<=j} (-1)^k z^k / ((j-k)! k! u_k),
    Q_j(z) = sum_l (-l)(-l+1)...(j-l-1) u_l z^{-l}.
    """
    N = w.N
    core = w.core()
    if np.any(core == 0):
        raise ValueError("vanishing core coefficient")
    P = np.zeros((N, N), dtype=complex)
    for j in range(N):
        for k in range(j + 1):
            P[j, k] = (-1) ** k / (math.factorial(j - k) * math.factorial(k) * core[k])
    l = w.indices.astype(float)
    Q = np.empty((N, l.size), dtype=complex)
    for j in range(N):
        Q[j] = _rising_neg(l, j) * w.coeffs
    return BiorthSystem(N, P, Q, w.s_lo).check(tol)


def _rising_neg(l, j):
    # (-l)(-l+1)...(-l+j-1)
    out = np.ones_like(l)
    for m in range(j):
        out = out * (m - l)
    return out


def haar_system(N):
    """Monomial pair P_j = z^j, Q_j = z^{-j}."""
    return BiorthSystem(N, np.eye(N, dtype=complex), np.eye(N, dtype=complex), 0)


def chi_polynomial(w):
    """Coefficients 1/u_l of sum_{l<N} z^l / u_l."""
    core = w.core()
    if np.any(core == 0):
        raise ValueError("vanishing core coefficient")
    return 1.0 / core


def _check_cd_decay(w):
    p = decay_exponent(w)
    if not p > w.N + 1 + DECAY_MARGIN:
        raise InsufficientDecay(
            f"Christoffel-Darboux form needs sum |s|^N |u_s| < inf; "
            f"estimated decay exponent {p:.2f} <= N + 1 = {w.N + 1}")


def cd_matrix(w):
    """Coefficient matrix of the one-fold integral term of the CD form.

    Entry [k, l] multiplies z1^k z2^{-l} for k < N and l outside [0, N-1].
    """
    N = w.N
    core = w.core()
    k = np.arange(N)
    pN1 = np.array([(-1) ** kk / (math.factorial(N - 1 - kk) * math.factorial(kk) * core[kk])
                    for kk in k])
    l = w.indices.astype(float)
    qN = _rising_neg(l, N) * w.coeffs
    with np.errstate(divide="ignore", invalid="ignore"):
        A = pN1[:, None] * qN[None, :] / (k[:, None] - l[None, :])
    A[:, (l >= 0) & (l <= N - 1)] = 0.0
    return A


def cue_kernel(N, theta1, theta2):
    r = np.exp(1j * (np.asarray(theta1) - np.asarray(theta2)))
    return np.sum(np.power.outer(r, np.arange(N)), axis=-1)


class PolyaKernel:
    """Kernel of a Polya ensemble with cached coefficient data."""

    def __init__(self, w):
        self.w = w
        self.N = w.N
        self.system = biorth_polya(w)
        self._cd = None

    def series(self, theta1, theta2):
        return self.system.kernel(theta1, theta2)

    def cd(self, theta1, theta2):
        if self._cd is None:
            _check_cd_decay(self.w)
            self._cd = cd_matrix(self.w)
        t1 = np.asarray(theta1, dtype=float)
        t2 = np.asarray(theta2, dtype=float)
        E1 = np.exp(1j * np.multiply.outer(t1, np.arange(self.N)))
        E2 = np.exp(-1j * np.multiply.outer(t2, self.w.indices))
        extra = np.sum((E1 @ self._cd) * E2, axis=-1)
        return cue_kernel(self.N, t1, t2) + extra

    def __call__(self, theta1, theta2, method="series"):
        if method == "series":
            return self.series(theta1, theta2)
        if method == "cd":
            return self.cd(theta1, theta2)
        raise ValueError(f"unknown method {method!r}")


def kernel_eval(w, theta1, theta2, method="series"):
    return PolyaKernel(w)(theta1, theta2, method)


def one_point_fourier(system):
    """Fourier coefficients c_m of K(z, z) = sum_m c_m z^m."""
    N = system.N
    ql = system.q_indices
    m_lo = 0 - ql[-1]
    m_hi = N - 1 - ql[0]
    c = np.zeros(m_hi - m_lo + 1, dtype=complex)
    for k in range(N):
        v = system.P[:, k] @ system.Q           # over l
        m = k - ql
        np.add.at(c, m - m_lo, v)
    return m_lo, c


def one_point_density(system, theta):
    """K(z, z) / N as a density w.r.t. d theta / 2 pi."""
    return np.real(system.kernel(theta, theta)) / system.N


def one_point_cdf(system, theta):
    """Cumulative of K(z,z)/N from -pi to theta, in units of probability."""
    m_lo, c = one_point_fourier(system)
    theta = np.asarray(theta, dtype=float)
    m = np.arange(m_lo, m_lo + c.size)
    out = np.full(theta.shape, 0.0, dtype=complex)
    z = m == 0
    out = out + c[z].sum() * (theta + np.pi) / (2 * np.pi)
    mm = m[~z]
    cc = c[~z]
    E = (np.exp(1j * np.multiply.outer(theta, mm)) - np.exp(-1j * np.pi * mm)) / (2j * np.pi * mm)
    out = out + E @ cc
    return np.real(out) / system.N


# ---------------------------------------------------------------- Jacobi closed forms

def _poch(a, n):
    out = 1.0 + 0j
    for m in range(n):
        out *= a + m
    return out


def jacobi_biorth_closed(N, alpha, gamma, j, theta, which="P"):
    """Closed-form Jacobi P_j (terminating 2F1) or Q_j (finite derivative sum)."""
    if not alpha > -1:
        raise ValueError("alpha must be > -1")
    if not 0 <= j < N:
        raise ValueError("need 0 <= j < N")
    theta = np.asarray(theta, dtype=float)
    z = np.exp(1j * theta)
    if which == "P":
        a2 = 1 + alpha / 2 - 1j * gamma
        b1 = 1 - N - alpha / 2 - 1j * gamma
        pref = np.exp(loggamma(N + alpha / 2 + 1j * gamma) + loggamma(alpha / 2 - 1j * gamma + 1)
                      - loggamma(N + alpha) - math.lgamma(j + 1))
        out = np.zeros(theta.shape, dtype=complex)
        for k in range(j + 1):
            out = out + _poch(-j, k) * _poch(a2, k) / (_poch(b1, k) * math.factorial(k)) * (-z) ** k
        return pref * out
    if which == "Q":
        c = j - alpha / 2 - 1j * gamma - N
        p = alpha + N - 1
        # principal branches on theta in (-pi, pi): 1 + z = 2 cos(theta/2) e^{i theta/2}
        cosh_ = 2 * np.cos(theta / 2)
        out = np.zeros(theta.shape, dtype=complex)
        for l in range(j + 1):
            e1 = c + 1 - l
            e2 = p - j + l
            term = math.comb(j, l) * _falling(c, l) * _falling(p, j - l)
            out = out + term * np.exp(1j * theta * e1) * cosh_ ** e2 * np.exp(0.5j * theta * e2)
        return out
    raise ValueError("which must be 'P' or 'Q'")


# ---------------------------------------------------------------- fixed product

CONTOUR_R = 1.25
CONTOUR_RHO = (1 + CONTOUR_R) / 2
CONTOUR_M = 512


class FixedKernel:
    """Kernel of X V U V^dagger, X with fixed distinct eigenangles x, U from weight w."""

    def __init__(self, w, x):
        x = np.asarray(getattr(x, "angles", x), dtype=float)
        if x.size != w.N:
            raise ValueError("fixed spectrum must have N angles")
        if min_gap(x) < GAP_TOL:
            raise DegenerateSpectrum("fixed spectrum is degenerate (confluent limit not implemented)")
        self.w = w
        self.x = x
        self.N = w.N
        self.xz = np.exp(1j * x)
        chi = chi_polynomial(w)
        P = np.zeros((self.N, self.N), dtype=complex)
        for j in range(self.N):
            others = np.delete(self.xz, j)
            c = np.poly(others)[::-1] if others.size else np.ones(1)
            denom = np.prod(self.xz[j] - others)
            P[j, :c.size] = c * chi[:c.size] / denom
        self.P = P

    def eval_P(self, theta):
        E = np.exp(1j * np.multiply.outer(np.asarray(theta, dtype=float), np.arange(self.N)))
        return E @ self.P.T

    def eval_Q(self, theta):
        theta = np.asarray(theta, dtype=float)
        d = theta[..., None] - self.x
        return eval_weight(self.w, d.ravel()).reshape(d.shape)

    def series(self, theta1, theta2):
        return np.sum(self.eval_P(theta1) * self.eval_Q(theta2), axis=-1)

    def contour(self, theta1, theta2, R=CONTOUR_R, rho=CONTOUR_RHO, M=CONTOUR_M):
        """Double contour integral: z1' on |z| = 1 rescaled by R, z2' on the
        boundary of the annulus 1/rho < |z| < rho (which encloses the x_l but
        not the origin or R z1' z1)."""
        if not 1 < rho < R:
            raise ValueError("contour radii must satisfy 1 < rho < R")
        w = self.w
        idx = w.indices - (w.N - 1) / 2
        growth = np.max(np.abs(w.coeffs) * rho ** np.abs(idx)) / np.max(np.abs(w.coeffs))
        if growth > 1e6:
            raise ValueError(
                f"weight's Laurent window is not convergent on the contour annulus "
                f"(growth {growth:.2e}); use the series method")
        chi = chi_polynomial(w)
        t1 = np.atleast_1d(np.asarray(theta1, dtype=float))
        t2 = np.atleast_1d(np.asarray(theta2, dtype=float))
        t1, t2 = np.broadcast_arrays(t1, t2)
        phi = 2 * np.pi * np.arange(M) / M
        e = np.exp(1j * phi)
        chival = np.exp(-1j * np.outer(phi, np.arange(self.N))) @ (chi * R ** -np.arange(self.N))
        out = np.empty(t1.shape, dtype=complex)
        for i, (a, b) in enumerate(zip(t1.ravel(), t2.ravel())):
            z1, z2 = np.exp(1j * a), np.exp(1j * b)
            W = R * e * z1                                   # (M,)
            numW = np.prod(W[:, None] - self.xz[None, :], axis=1)
            acc = np.zeros(M, dtype=complex)
            for r, sgn in ((rho, 1.0), (1 / rho, -1.0)):
                zp = r * e                                   # nodes on the circle
                om = eval_weight_z(w, z2 / zp)
                den = np.prod(zp[:, None] - self.xz[None, :], axis=1)
                g = om / den * zp                            # dz'/(2 pi i) = z' dpsi / 2pi
                # inner[phi] = mean_psi g(psi) / (W(phi) - z'(psi))
                acc += sgn * np.mean(g[None, :] / (W[:, None] - zp[None, :]), axis=1)
            out.ravel()[i] = np.mean(chival * numW * acc)
        return out.reshape(np.shape(np.broadcast_arrays(np.asarray(theta1), np.asarray(theta2))[0]))

    def __call__(self, theta1, theta2, method="series"):
        if method == "series":
            return self.series(theta1, theta2)
        if method == "contour":
            return self.contour(theta1, theta2)
        raise ValueError(f"unknown method {method!r}")


def kernel_fixed(w, x, theta1, theta2, method="series"):
    return FixedKernel(w, x)(theta1, theta2, method)


def kernel_convolved(w, inner, tol=GRAM_TOL):
    """Bi-orthonormal pair of (polynomial ensemble) x (Polya ensemble with weight w).

    New P coefficients p~_k / u_k, new Q coefficients u_l q~_l.
    """
    if inner.N != w.N:
        raise ValueError("dimension mismatch")
    core = w.core()
    if np.any(core == 0):
        raise ValueError("vanishing core coefficient")
    P = inner.P / core[None, :]
    lo = max(w.s_lo, inner.q_lo)
    hi = min(w.s_hi, inner.q_lo + inner.Q.shape[1] - 1)
    if lo > hi:
        raise ValueError("weight and inner Q windows do not overlap")
    l = np.arange(lo, hi + 1)
    Q = inner.q_coeff(l) * w.coeff(l)[None, :]
    return BiorthSystem(w.N, P, Q, lo).check(tol)


# ---------------------------------------------------------------- grids

@dataclass
class KernelGrid:
    theta1: np.ndarray
    theta2: np.ndarray
    K: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# method: {self.meta.get('method', '')}\n")
            fh.write(f"# spec: {json.dumps(self.meta.get('spec', {}), sort_keys=True)}\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["theta1", "theta2", "re_K", "im_K"])
            for i, a in enumerate(self.theta1):
                for j, b in enumerate(self.theta2):
                    v = self.K[i, j]
                    wr.writerow([f"{a:.17g}", f"{b:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def kernel_grid(kernel, theta1, theta2, method="series", meta=None):
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    A, B = np.meshgrid(t1, t2, indexing="ij")
    K = kernel(A, B, method)
    m = dict(meta or {})
    m["method"] = method
    return KernelGrid(t1, t2, K, m)
