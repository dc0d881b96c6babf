"""Complex log-gamma, bilateral hypergeometric series and theta coefficients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Lanczos coefficients for g = 607/128 (Godfrey), 15 terms.
_G = 607.0 / 128.0
_C = np.array([
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
])
_HALF_LOG_2PI = 0.5 * np.log(2 * np.pi)


class PoleError(ValueError):
    pass


def _is_pole(z):
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def _lanczos(z):
    # valid for Re z >= 0.5
    zm = z - 1.0
    x = np.full(z.shape, _C[0], dtype=complex)
    for k in range(1, _C.size):
        x = x + _C[k] / (zm + k)
    t = zm + _G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(x)


def _log_sin_pi(z):
    # log sin(pi z) without overflow for large |Im z|
    y = z.imag
    big = np.abs(y) > 20
    out = np.empty(z.shape, dtype=complex)
    zs = z[~big]
    # shift to the nearest integer first so sin stays accurate next to the poles
    n = np.round(zs.real)
    out[~big] = np.log(np.sin(np.pi * (zs - n))) + 1j * np.pi * n
    zb = z[big]
    s = np.sign(zb.imag)
    # sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i; keep the growing exponential
    w = -1j * s * np.pi * zb
    out[big] = w + np.log(1 - np.exp(-2 * w)) - np.log(2j * -s)
    return out


def loggamma(z, strict=True):
    """log Gamma(z) with imaginary part wrapped to (-pi, pi].

    Poles (z = 0, -1, -2, ...) raise PoleError when ``strict`` and give
    +inf otherwise.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=complex)
    pole = _is_pole(z)
    if pole.any():
        if strict:
            raise PoleError(f"log-gamma pole at {z[pole][0]}")
        out[pole] = np.inf
    right = (z.real >= 0.5) & ~pole
    left = (z.real < 0.5) & ~pole
    out[right] = _lanczos(z[right])
    if left.any():
        zl = z[left]
        out[left] = np.log(np.pi) - _log_sin_pi(zl) - _lanczos(1.0 - zl)
    fin = np.isfinite(out)
    im = out.imag[fin]
    out[fin] = out.real[fin] + 1j * (im - 2 * np.pi * np.floor((im + np.pi) / (2 * np.pi)))
    # keep Im = pi rather than -pi on the branch cut
    edge = fin & np.isclose(out.imag, -np.pi, rtol=0, atol=1e-15)
    out[edge] = out[edge].real + 1j * np.pi
    return out[0] if scalar else out


log_gamma_complex = loggamma


def gamma(z):
    z = np.asarray(z, dtype=complex)
    return np.exp(loggamma(z))


def rgamma(z):
    """1/Gamma(z), zero at the poles."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.zeros(z.shape, dtype=complex)
    ok = ~_is_pole(z)
    out[ok] = np.exp(-loggamma(z[ok]))
    return out[0] if scalar else out


# ---------------------------------------------------------------- bilateral

@dataclass(frozen=True)
class BilateralParams:
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(complex(v) for v in self.a)
        b = tuple(complex(v) for v in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        for v in a:
            if v.imag == 0 and v.real > 0 and v.real == round(v.real):
                raise PoleError(f"upper parameter {v} is a positive integer")
        for v in b:
            if v.imag == 0 and v.real <= 0 and v.real == round(v.real):
                raise PoleError(f"lower parameter {v} is a non-positive integer")

    @property
    def excess(self):
        """Re(sum b - sum a): controls the |s| decay of the terms."""
        return float(np.real(sum(self.b) - sum(self.a)))

    def merged(self, other):
        return BilateralParams(self.a + other.a, self.b + other.b)

    def reciprocal(self):
        return BilateralParams(tuple(1 - v for v in self.b), tuple(1 - v for v in self.a))


def bilateral_terms(params, s_lo, s_hi):
    """prod (a)_s / prod (b)_s for s in [s_lo, s_hi], with (c)_s = Gamma(c+s)/Gamma(c).

    Built by the two-sided recurrence from s = 0, so terminating parameters
    produce exact zeros.
    """
    if s_lo > 0 or s_hi < 0:
        raise ValueError("window must contain 0")
    a = np.array(params.a, dtype=complex)
    b = np.array(params.b, dtype=complex)
    up = np.arange(0, s_hi)
    # t_{s+1} / t_s = prod(a + s) / prod(b + s)
    num = np.prod(a[:, None] + up[None, :], axis=0) if a.size else np.ones(up.size)
    den = np.prod(b[:, None] + up[None, :], axis=0) if b.size else np.ones(up.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_up = np.where(num == 0, 0.0, num / np.where(den == 0, np.inf, den))
    down = np.arange(-1, s_lo - 1, -1)
    # t_{s} / t_{s+1} = prod(b + s) / prod(a + s)
    num = np.prod(b[:, None] + down[None, :], axis=0) if b.size else np.ones(down.size)
    den = np.prod(a[:, None] + down[None, :], axis=0) if a.size else np.ones(down.size)
    if np.any((den == 0) & (num != 0)):
        raise PoleError("series hits a pole of an upper parameter")
    with np.errstate(divide="ignore", invalid="ignore"):
        r_down = np.where(num == 0, 0.0, num / np.where(den == 0, np.inf, den))
    hi = np.cumprod(r_up) if up.size else np.zeros(0)
    lo = np.cumprod(r_down) if down.size else np.zeros(0)
    return np.concatenate([lo[::-1], [1.0 + 0j], hi])


def gamma_ratio(params):
    """prod Gamma(a) / prod Gamma(b): converts pHq into sum prod Gamma(a+s) / prod Gamma(b+s) x^s."""
    lg = sum(loggamma(v) for v in params.a) - sum(loggamma(v) for v in params.b)
    return np.exp(lg)


def check_convergence(params, x):
    """Paper-style convergence condition on |x| = 1."""
    c = params.excess
    if np.isclose(x, -1):
        return c > 1
    if np.isclose(x, 1):
        return c > 0
    return c > 0


@dataclass
class BilateralResult:
    value: complex
    remainder: float
    s_lo: int
    s_hi: int


def _side_remainder(t_edge, s_edge, c):
    # |t_s| ~ A |s|^{-c}: tail sum beyond the edge <= |t_edge| (|s|+1) / (c - 1), doubled
    return 2.0 * abs(t_edge) * (abs(s_edge) + 1) / (c - 1)


def bilateral_H(params, x, tol=1e-12, max_terms=2 ** 22, gamma_sum=False):
    """Bilateral series pHq[a; b | x] on |x| = 1 with a certified-style remainder.

    pHq = prod Gamma(b) / prod Gamma(a) * sum_s prod Gamma(a+s) / prod Gamma(b+s) x^s,
    i.e. the normalised sum of (a)_s / (b)_s x^s.  With ``gamma_sum`` the bare
    gamma-ratio sum is returned instead.  The window is doubled until the
    majorant of both tails drops below tol; absolute convergence
    (Re(sum b - sum a) > 1) is required for the bound.
    """
    x = complex(x)
    if abs(abs(x) - 1) > 1e-12:
        raise ValueError("x must lie on the unit circle")
    c = params.excess
    if not check_convergence(params, x):
        raise ValueError(f"divergent configuration: Re(sum b - sum a) = {c}")
    if c <= 1:
        raise ValueError("remainder certificate needs Re(sum b - sum a) > 1")
    S = 64
    while True:
        t = bilateral_terms(params, -S, S)
        s = np.arange(-S, S + 1)
        rem = 0.0
        for edge in (0, -1):
            if t[edge] != 0:
                rem += _side_remainder(t[edge], s[edge], c)
        if rem < tol or 2 * S + 1 >= max_terms:
            break
        S *= 2
    if rem >= tol:
        raise ValueError(f"remainder {rem:.3e} above tol after {2 * S + 1} terms")
    # sum from small terms inward
    vals = t * x ** s.astype(float)
    order = np.argsort(np.abs(vals))
    val = complex(np.sum(vals[order]))
    pf = gamma_ratio(params) if gamma_sum else 1.0
    return BilateralResult(complex(pf * val), float(abs(pf) * rem), -S, S)


def bilateral_eval(params, x, window, gamma_sum=False):
    """Evaluate the truncated series at many points x on the circle."""
    x = np.asarray(x, dtype=complex)
    lo, hi = window
    t = bilateral_terms(params, lo, hi)
    s = np.arange(lo, hi + 1)
    v = np.power.outer(x, s.astype(float)) @ t
    pf = gamma_ratio(params) if gamma_sum else 1.0
    return pf * v


# ---------------------------------------------------------------- theta

def theta_coeffs(N, t, tol=1e-14):
    """u_s = exp(-t (s + (1-N)/2)^2) for every s with u_s >= tol.

    Returns (s_lo, coeffs, tail) where tail bounds the discarded mass.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    c = (N - 1) / 2
    # largest |s - c| with exp(-t x^2) >= tol
    xmax = np.sqrt(max(-np.log(tol), 0.0) / t)
    s_lo = int(np.ceil(c - xmax))
    s_hi = int(np.floor(c + xmax))
    s_lo = min(s_lo, 0)
    s_hi = max(s_hi, N - 1)
    s = np.arange(s_lo, s_hi + 1)
    u = np.exp(-t * (s - c) ** 2)
    # tail: two geometric-dominated Gaussian sums beyond the window
    x0 = min(c - s_lo, s_hi - c) + 1
    q = np.exp(-t * (2 * x0 + 1))
    tail = 2 * np.exp(-t * x0 ** 2) / (1 - q)
    return s_lo, u, float(tail)
