"""Laurent-coefficient representation of weights on the unit circle.

A weight is stored as a finite window of coefficients ``u_s`` so that

    w(e^{i theta}) = sum_s u_s e^{-i s theta},

together with the matrix dimension ``N`` and a bound on the absolute sum of
the coefficients dropped outside the window.  All circle integrals use the
normalised measure d theta / 2 pi.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

ATOL = 1e-12
RTOL = 1e-10
GAP_TOL = 1e-8


def close(a, b, atol=ATOL, rtol=RTOL):
    """Mixed absolute/relative comparison, elementwise."""
    a = np.asarray(a)
    b = np.asarray(b)
    return np.abs(a - b) <= atol + rtol * np.maximum(np.abs(a), np.abs(b))


class StructuralError(ValueError):
    """Raised when a weight cannot even be checked (bad window, wrong shape)."""


@dataclass(frozen=True)
class LaurentWeight:
    N: int
    s_lo: int
    coeffs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "s_lo", int(self.s_lo))
        if self.N < 1:
            raise StructuralError("dimension must be positive")
        if c.size == 0:
            raise StructuralError("empty coefficient window")
        if self.tail_bound < 0:
            raise StructuralError("tail_bound must be nonnegative")

    @property
    def dim_N(self):
        return self.N

    @property
    def s_hi(self):
        return self.s_lo + self.coeffs.size - 1

    @property
    def indices(self):
        return np.arange(self.s_lo, self.s_hi + 1)

    def coeff(self, s):
        """u_s for integer (array) s; zero outside the window."""
        s = np.asarray(s)
        k = s - self.s_lo
        inside = (k >= 0) & (k < self.coeffs.size)
        out = np.zeros(s.shape, dtype=complex)
        out[inside] = self.coeffs[k[inside]]
        return out if out.ndim else complex(out)

    def core(self):
        """Coefficients u_0 .. u_{N-1}."""
        return self.coeff(np.arange(self.N))

    def __call__(self, theta):
        return eval_weight(self, theta)

    def to_dict(self):
        return {
            "N": self.N,
            "s_lo": self.s_lo,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "tail_bound": float(self.tail_bound),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        c = np.array([complex(re, im) for re, im in d["coeffs"]])
        return cls(int(d["N"]), int(d["s_lo"]), c, float(d.get("tail_bound", 0.0)))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _check_window(w):
    if w.s_lo > 0 or w.s_hi < w.N - 1:
        raise StructuralError(
            f"window [{w.s_lo}, {w.s_hi}] does not cover [0, {w.N - 1}]")


def validate_weight(w, tol=ATOL):
    """Check reality, nonvanishing core and odd-N sign of the middle coefficient."""
    _check_window(w)
    bad = []
    s = w.indices
    mirror = w.N - 1 - s
    inside = (mirror >= w.s_lo) & (mirror <= w.s_hi)
    u = w.coeffs[inside]
    um = w.coeff(mirror[inside])
    dev = np.abs(np.conj(u) - um) / np.maximum(1.0, np.abs(u))
    if dev.size and dev.max() > tol:
        k = int(np.argmax(dev))
        bad.append(("reality", int(s[inside][k]), float(dev[k])))
    # coefficients whose mirror falls outside the window must be covered by the tail
    outside = np.abs(w.coeffs[~inside])
    if outside.size and outside.max() > tol + w.tail_bound:
        k = int(np.argmax(outside))
        bad.append(("reality", int(s[~inside][k]), float(outside[k])))
    core = np.abs(w.core())
    if core.min() <= tol * max(1.0, core.max()):
        k = int(np.argmin(core))
        bad.append(("nonvanishing core", k, float(core[k])))
    if w.N % 2 == 1:
        uM = w.coeff((w.N - 1) // 2)
        if uM.real <= 0 or abs(uM.imag) > tol * max(1.0, abs(uM)):
            bad.append(("middle coefficient real positive", (w.N - 1) // 2, uM))
    return ValidationReport(not bad, bad)


def eval_weight(w, theta):
    """sum_s u_s e^{-i s theta}, vectorised in theta."""
    theta = np.asarray(theta, dtype=float)
    ph = np.exp(-1j * np.multiply.outer(theta, w.indices))
    return ph @ w.coeffs


def eval_weight_z(w, z):
    """sum_s u_s z^{-s} for complex z off the circle (finite windows only)."""
    z = np.asarray(z, dtype=complex)
    return np.power.outer(z, -w.indices.astype(float)) @ w.coeffs


def derivative_coeffs(w, b):
    """Coefficients of (-z d/dz)^b w, i.e. s^b u_s."""
    b = int(b)
    if b < 0:
        raise ValueError("order must be nonnegative")
    if b > w.N - 1:
        raise ValueError(f"order {b} exceeds N-1 = {w.N - 1}")
    s = w.indices.astype(float)
    # s^b grows, so a nonzero tail on u_s gives no finite bound on s^b u_s
    tail = w.tail_bound if (b == 0 or w.tail_bound == 0) else np.inf
    return LaurentWeight(w.N, w.s_lo, w.coeffs * s ** b, tail)


def convolve(w1, w2):
    """Multiplicative convolution on the circle: coefficientwise product."""
    if w1.N != w2.N:
        raise ValueError(f"dimension mismatch: {w1.N} vs {w2.N}")
    lo = max(w1.s_lo, w2.s_lo)
    hi = min(w1.s_hi, w2.s_hi)
    s = np.arange(lo, hi + 1)
    c = w1.coeff(s) * w2.coeff(s)
    m1 = np.abs(w1.coeffs).max()
    m2 = np.abs(w2.coeffs).max()
    # coefficients of one factor beyond the other's window meet that factor's tail
    tail = m1 * w2.tail_bound + m2 * w1.tail_bound + w1.tail_bound * w2.tail_bound
    return LaurentWeight(w1.N, lo, c, tail)


def inverse_weight(w):
    """Weight of the inverse matrix: u~_s = u_{N-1-s}."""
    return LaurentWeight(w.N, w.N - 1 - w.s_hi, w.coeffs[::-1].copy(), w.tail_bound)


def phase_shift(w, phi):
    """Weight of e^{i phi} U: u'_s = u_s z0^{s-(N-1)/2} with z0 = e^{i phi}."""
    phi = float(np.angle(np.exp(1j * phi)))
    s = w.indices
    return LaurentWeight(w.N, w.s_lo, w.coeffs * np.exp(1j * phi * (s - (w.N - 1) / 2)),
                         w.tail_bound)


def reality_phase(w):
    """Unit complex c such that c*u satisfies conj(c u_s) = c u_{N-1-s} on the core."""
    N = w.N
    j = (N - 1) // 2
    a = w.coeff(j)
    b = w.coeff(N - 1 - j)
    # need conj(c) conj(a) = c b  ->  c^2 = conj(a) / b
    r = np.conj(a) / b
    return np.sqrt(r / abs(r))


def canonical_scale_factor(core):
    """Real factor bringing core coefficients into canonical form."""
    N = len(core)
    M = (N - 1) // 2
    if N % 2 == 1:
        return 1.0 / core[M].real
    v = core[N // 2 - 1]
    sign = 1.0
    if v.real < 0 or (v.real == 0 and v.imag < 0):
        sign = -1.0
    return sign / abs(v)


def canonical(w, fix_phase=False):
    """Rescale w so that u_M = 1 (odd N) or |u_{M-1}| = 1 with Re >= 0 (even N)."""
    if fix_phase:
        c = reality_phase(w)
        w = LaurentWeight(w.N, w.s_lo, w.coeffs * c, w.tail_bound)
    f = canonical_scale_factor(w.core())
    return LaurentWeight(w.N, w.s_lo, w.coeffs * f, w.tail_bound * abs(f))


def truncate(w, lo, hi):
    lo = max(lo, w.s_lo)
    hi = min(hi, w.s_hi)
    s = np.arange(lo, hi + 1)
    dropped = np.abs(w.coeffs).sum() - np.abs(w.coeff(s)).sum()
    return LaurentWeight(w.N, lo, w.coeff(s), w.tail_bound + max(dropped, 0.0))


def decay_exponent(w):
    """Rough algebraic decay rate p with |u_s| ~ |s|^{-p} at the window edges.

    Returns inf for finitely supported or exponentially decaying windows.
    """
    c = (w.N - 1) / 2
    half = (w.s_hi - w.s_lo) / 2
    if half < 8:
        return np.inf
    rates = []
    for sign in (1, -1):
        far = int(round(c + sign * half))
        mid = int(round(c + sign * half / 2))
        a, b = abs(w.coeff(far)), abs(w.coeff(mid))
        if b == 0 or a == 0:
            rates.append(np.inf)
            continue
        rates.append(np.log(b / a) / np.log(abs(far - c) / abs(mid - c)))
    p = min(rates)
    # exponential decay shows up as a rate that keeps growing with the window
    if p > 60:
        return np.inf
    return p


# ---------------------------------------------------------------- angles

def wrap_angle(theta):
    """Map angles to (-pi, pi]."""
    t = np.mod(np.asarray(theta, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(t == -np.pi, np.pi, t)


def min_gap(theta):
    """Smallest pairwise circular distance between angles."""
    theta = np.asarray(theta, dtype=float)
    if theta.size < 2:
        return np.inf
    d = np.abs(np.angle(np.exp(1j * np.subtract.outer(theta, theta))))
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


@dataclass(frozen=True)
class EigenAngles:
    angles: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=float).ravel()
        if np.any(a <= -np.pi - 1e-15) or np.any(a > np.pi + 1e-15):
            raise ValueError("angles must lie in (-pi, pi]")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @property
    def N(self):
        return self.angles.size

    @property
    def min_gap(self):
        return min_gap(self.angles)

    @property
    def z(self):
        return np.exp(1j * self.angles)


@dataclass(frozen=True)
class MultiIndex:
    s: tuple

    def __post_init__(self):
        s = tuple(int(v) for v in self.s)
        if len(set(s)) != len(s):
            raise ValueError(f"multi-index entries must be distinct: {s}")
        object.__setattr__(self, "s", s)

    @property
    def N(self):
        return len(self.s)

    def __iter__(self):
        return iter(self.s)


def vandermonde(z):
    """prod_{a<b} (z_b - z_a) along the last axis."""
    z = np.asarray(z)
    n = z.shape[-1]
    out = np.ones(z.shape[:-1], dtype=np.result_type(z, complex))
    for a in range(n):
        for b in range(a + 1, n):
            out = out * (z[..., b] - z[..., a])
    return out


def vandermonde_angles(theta):
    """Vandermonde of e^{i theta} via e^{i(ta+tb)/2} 2i sin((tb-ta)/2) factors."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[-1]
    out = np.ones(theta.shape[:-1], dtype=complex)
    for a in range(n):
        for b in range(a + 1, n):
            ta, tb = theta[..., a], theta[..., b]
            out = out * (np.exp(0.5j * (ta + tb)) * 2j * np.sin(0.5 * (tb - ta)))
    return out


def vandermonde_int(s):
    s = np.asarray(s, dtype=float)
    n = s.shape[-1]
    out = np.ones(s.shape[:-1])
    for a in range(n):
        for b in range(a + 1, n):
            out = out * (s[..., b] - s[..., a])
    return out
