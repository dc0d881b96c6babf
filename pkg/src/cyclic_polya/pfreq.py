"""Numerical checks of the cyclic Polya frequency property.

A candidate g is tested through the Vandermonde-twisted determinant forms on
n-point configurations; a negative value beyond tolerance certifies failure,
no violation is only evidence.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .laurent import GAP_TOL, LaurentWeight, min_gap, vandermonde_angles
from .spherical import DegenerateSpectrum

FORM_TOL = 1e-12


@dataclass
class FrequencyCandidate:
    g: Callable
    parity: str                   # "odd" or "even"
    order_cap: int
    name: str = ""
    s_lo: Optional[int] = None    # optional Laurent window g = sum_s c_s z^{-s}
    coeffs: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.parity not in ("odd", "even"):
            raise ValueError("parity must be 'odd' or 'even'")

    @property
    def chi(self):
        return 1 if self.parity == "odd" else 0

    def orders(self):
        start = 1 if self.parity == "odd" else 2
        return list(range(start, self.order_cap + 1, 2))

    def magnitude(self):
        """Bound on sup |g| over (-2pi, 2pi): sum |c_s| for a Laurent window, else a grid maximum."""
        if self.coeffs is not None:
            return float(np.sum(np.abs(self.coeffs)))
        th = np.linspace(-2 * np.pi, 2 * np.pi, 4097)
        return float(np.abs(self.g(th)).max())

    def reality_defect(self, n=257):
        """max |conj g - z^{1-chi} g| on a grid."""
        th = np.linspace(-np.pi, np.pi, n, endpoint=False) + 0.1
        v = self.g(th)
        return float(np.abs(np.conj(v) - np.exp(1j * (1 - self.chi) * th) * v).max())


def laurent_candidate(s_lo, coeffs, parity, order_cap, name=""):
    coeffs = np.asarray(coeffs, dtype=complex)
    s = np.arange(s_lo, s_lo + coeffs.size)

    def g(theta):
        theta = np.asarray(theta, dtype=float)
        return np.exp(-1j * np.multiply.outer(theta, s)) @ coeffs
    return FrequencyCandidate(g, parity, order_cap, name, s_lo, coeffs)


def convolve_candidates(c1, c2, name=""):
    """Circle convolution: Laurent coefficients multiply."""
    if c1.coeffs is None or c2.coeffs is None:
        raise ValueError("convolution needs Laurent windows on both candidates")
    if c1.parity != c2.parity:
        raise ValueError("parities differ")
    lo = max(c1.s_lo, c2.s_lo)
    hi = min(c1.s_lo + c1.coeffs.size, c2.s_lo + c2.coeffs.size) - 1
    s = np.arange(lo, hi + 1)
    c = c1.coeffs[s - c1.s_lo] * c2.coeffs[s - c2.s_lo]
    return laurent_candidate(lo, c, c1.parity, min(c1.order_cap, c2.order_cap),
                             name or f"{c1.name}*{c2.name}")


# ---------------------------------------------------------------- catalog

def haar_candidate(N):
    """De la Vallee Poussin kernel (odd N) and its half-integer twin (even N)."""
    if N % 2:
        M = (N - 1) // 2
        c = np.array([math.comb(2 * M, j) for j in range(2 * M + 1)], dtype=complex)
        return laurent_candidate(-M, c, "odd", N, f"haar{N}")
    M = N // 2
    c = np.array([math.comb(2 * M - 1, j) for j in range(2 * M)], dtype=complex)
    return laurent_candidate(1 - M, c, "even", N, f"haar{N}")


def corrupted_haar_candidate(N):
    """Haar candidate with its central coefficient (pair, for even N) negated; reality is kept."""
    h = haar_candidate(N)
    c = h.coeffs.copy()
    k = (c.size - 1) // 2
    c[k] *= -1
    if c.size % 2 == 0:
        c[c.size - 1 - k] *= -1
    return laurent_candidate(h.s_lo, c, h.parity, N, f"corrupted-haar{N}")


def theta_candidate(t, parity, order_cap=7, tol=1e-17):
    if t <= 0:
        raise ValueError("t must be positive")
    shift = 0.0 if parity == "odd" else 0.5
    J = int(np.ceil(np.sqrt(-np.log(tol) / t))) + 1
    j = np.arange(-J, J + 2)
    c = np.exp(-t * (j - shift) ** 2) + 0j
    return laurent_candidate(-J, c, parity, order_cap, f"theta({t})")


def rank1_candidate(gamma, parity, order_cap=7, window=None):
    """(-z)^{-i gamma} (odd) or -i (-z)^{-1/2-i gamma} (even), angles in (-2pi, 2pi)."""
    ch, sh = math.cosh(gamma * math.pi), math.sinh(gamma * math.pi)
    if parity == "odd":
        def g(theta):
            theta = np.asarray(theta, dtype=float)
            return (np.exp(gamma * theta) * (ch - sh * np.sign(theta))) + 0j
    else:
        def g(theta):
            theta = np.asarray(theta, dtype=float)
            return np.exp((gamma - 0.5j) * theta) * (sh + ch * np.sign(theta))
    cand = FrequencyCandidate(g, parity, order_cap, f"rank1({gamma},{parity})")
    if window:
        # c_s = int_{-pi}^{pi} g e^{i s theta} d theta / 2pi, piecewise exponential
        s = np.arange(-window, window + 1)
        if parity == "odd":
            b = gamma + 1j * s
            right, left = ch - sh, ch + sh
        else:
            b = gamma - 0.5j + 1j * s
            right, left = sh + ch, sh - ch
        e = np.exp(b * math.pi)
        c = (right * (e - 1) + left * (1 - 1 / e)) / (2 * math.pi * b)
        cand.s_lo, cand.coeffs = -window, c
    return cand


def standard_candidates(order=7):
    """Rank-1, De la Vallee Poussin and theta candidates of both parities up to ``order``."""
    odd = order if order % 2 else order - 1
    even = order if order % 2 == 0 else order - 1
    return [
        rank1_candidate(0.4, "odd", order),
        rank1_candidate(-0.7, "even", order),
        haar_candidate(odd),
        haar_candidate(even),
        theta_candidate(0.5, "odd", order),
        theta_candidate(0.5, "even", order),
    ]


# ---------------------------------------------------------------- forms

def _form_parts(g, x, y):
    x = np.asarray(getattr(x, "angles", x), dtype=float)
    y = np.asarray(getattr(y, "angles", y), dtype=float)
    n = x.size
    if y.size != n:
        raise ValueError("x and y need the same size")
    if g.parity == "odd" and n % 2 == 0 or g.parity == "even" and n % 2 == 1:
        raise ValueError(f"size {n} not admissible for {g.parity} parity")
    if n > g.order_cap:
        raise ValueError(f"size {n} exceeds order cap {g.order_cap}")
    if min_gap(x) < GAP_TOL or min_gap(y) < GAP_TOL:
        raise DegenerateSpectrum("degenerate x or y")
    # angles in [0, 2pi) so that differences stay in (-2pi, 2pi)
    x = np.mod(x, 2 * np.pi)
    y = np.mod(y, 2 * np.pi)
    m = n // 2
    power = m if g.parity == "odd" else m - 1
    G = g.g(x[:, None] - y[None, :])
    pre = vandermonde_angles(x) * vandermonde_angles(-y) * np.exp(-1j * power * (x.sum() - y.sum()))
    return pre, G


def _scale(g, pre, n):
    # Hadamard bound for entries bounded by sup |g|; roundoff in the entries is relative to it
    return abs(pre) * (math.sqrt(n) * g.magnitude()) ** n


def pfreq_form(g, x, y, tol=1e-9):
    pre, G = _form_parts(g, x, y)
    val = pre * np.linalg.det(G)
    scale = _scale(g, pre, G.shape[0])
    if abs(val.imag) > tol * max(scale, 1e-300):
        raise ArithmeticError(f"form has imaginary part {val.imag:.3e} (scale {scale:.3e})")
    return float(val.real)


def form_with_scale(g, x, y):
    pre, G = _form_parts(g, x, y)
    val = pre * np.linalg.det(G)
    scale = _scale(g, pre, G.shape[0])
    return float(val.real), float(abs(val.imag)), float(scale)


def random_configuration(n, rng, interlace):
    """Two n-point angle sets in [0, 2pi); interlaced (alternating on the circle) or uniform."""
    if interlace:
        pts = np.sort(rng.uniform(0, 2 * np.pi, 2 * n))
        off = rng.integers(0, 2)
        return pts[off::2], pts[1 - off::2]
    return rng.uniform(0, 2 * np.pi, n), rng.uniform(0, 2 * np.pi, n)


@dataclass
class OrderReport:
    n: int
    trials: int
    min_value: float
    min_relative: float
    violation: Optional[dict] = None


@dataclass
class FrequencyReport:
    name: str
    parity: str
    orders: list = field(default_factory=list)

    @property
    def passed(self):
        return all(o.violation is None for o in self.orders)

    def to_dict(self):
        return {"name": self.name, "parity": self.parity, "passed": self.passed,
                "orders": [vars(o) for o in self.orders]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def check_order(g, trials, rng, tol=FORM_TOL):
    """Random search for negative form values at every admissible size up to the cap."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rep = FrequencyReport(g.name, g.parity)
    for n in g.orders():
        mn, mrel, viol = np.inf, np.inf, None
        for i in range(trials):
            x, y = random_configuration(n, rng, interlace=(i % 2 == 0))
            if min_gap(x) < GAP_TOL or min_gap(y) < GAP_TOL:
                continue
            val, im, scale = form_with_scale(g, x, y)
            rel = val / scale if scale > 0 else 0.0
            mn, mrel = min(mn, val), min(mrel, rel)
            if val < -tol * scale and viol is None:
                viol = {"x": x.tolist(), "y": y.tolist(), "value": val, "scale": scale}
        rep.orders.append(OrderReport(n, trials, float(mn), float(mrel), viol))
    return rep


# ---------------------------------------------------------------- rank-1 sign matrix

def sign_matrix_det(theta, phi, gamma, parity):
    """det[1 - tanh(gamma pi) sign(theta_a - phi_b)] (odd) or det[tanh(gamma pi) + sign(...)] (even)."""
    th = np.tanh(gamma * np.pi)
    S = np.sign(np.subtract.outer(np.asarray(theta), np.asarray(phi)))
    T = 1 - th * S if parity == "odd" else th + S
    return float(np.linalg.det(T))


def interlaced_ordered(n, rng):
    """0 <= theta_1 <= phi_1 <= theta_2 <= ... < 2 pi."""
    pts = np.sort(rng.uniform(0, 2 * np.pi, 2 * n))
    return pts[0::2], pts[1::2]


# ---------------------------------------------------------------- weights

def weight_from_candidate(g, N):
    """Weight z^{-M-chi+1} g of an N = 2M + chi ensemble built from a candidate with a Laurent window."""
    if g.coeffs is None:
        raise ValueError("candidate has no Laurent window")
    chi = N % 2
    if chi != g.chi:
        raise ValueError("parity of N does not match the candidate")
    M = (N - chi) // 2
    return LaurentWeight(N, g.s_lo + M + chi - 1, np.asarray(g.coeffs, dtype=complex))
