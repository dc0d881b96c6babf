"""Catalog of cyclic Polya weights and ensemble-level transformations.

Each spec resolves to a :class:`LaurentWeight` (except ``FixedTimes``, which
has no single weight) and has a closed-form Laurent coefficient that does not
need a window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .laurent import (LaurentWeight, canonical_scale_factor, convolve, inverse_weight,
                      phase_shift, validate_weight, wrap_angle, GAP_TOL, min_gap)
from .special import loggamma

TAIL_TARGET = 1e-14
MAX_HALF_WIDTH = 1000


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class Haar:
    N: int
    variant: str = "geometric"
    coeffs: tuple = ()

    def __post_init__(self):
        if self.variant not in ("geometric", "binomial", "custom"):
            raise SpecError(f"unknown Haar variant {self.variant!r}")
        if self.variant == "custom":
            c = tuple(complex(v) for v in self.coeffs)
            if len(c) != self.N:
                raise SpecError("custom Haar needs exactly N coefficients")
            object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class Jacobi:
    N: int
    alpha: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.alpha > -1:
            raise SpecError(f"alpha must be > -1 (got {self.alpha})")


@dataclass(frozen=True)
class Gauss:
    N: int
    t: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise SpecError(f"t must be > 0 (got {self.t})")


@dataclass(frozen=True)
class Rank1Product:
    N: int
    gammas: tuple = ()

    def __post_init__(self):
        g = tuple(float(v) for v in self.gammas)
        object.__setattr__(self, "gammas", g)
        if len(g) < self.N:
            raise SpecError(f"need at least N = {self.N} rank-1 factors, got {len(g)}")
        if self.N % 2 == 1 and any(v == 0 for v in g):
            raise SpecError("gamma = 0 factors are singular for odd N")

    @property
    def L(self):
        return len(self.gammas)


@dataclass(frozen=True)
class Ginibre:
    N: int
    nu: float = 0.0

    def __post_init__(self):
        if not self.nu > -1:
            raise SpecError(f"nu must be > -1 (got {self.nu})")


@dataclass(frozen=True)
class PhaseShift:
    phi: float
    inner: object

    @property
    def N(self):
        return self.inner.N


@dataclass(frozen=True)
class Inverse:
    inner: object

    @property
    def N(self):
        return self.inner.N


@dataclass(frozen=True)
class Product:
    specs: tuple

    def __post_init__(self):
        s = tuple(self.specs)
        object.__setattr__(self, "specs", s)
        if not s:
            raise SpecError("empty product")
        if len({x.N for x in s}) != 1:
            raise SpecError("all factors of a product need the same N")

    @property
    def N(self):
        return self.specs[0].N


@dataclass(frozen=True)
class FixedTimes:
    x: tuple
    inner: object

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        object.__setattr__(self, "x", x)
        if len(x) != self.inner.N:
            raise SpecError("fixed spectrum length must equal N")
        if min_gap(np.array(x)) < GAP_TOL:
            raise SpecError("fixed spectrum must have pairwise distinct eigenvalues")

    @property
    def N(self):
        return self.inner.N


_TYPES = {c.__name__: c for c in (Haar, Jacobi, Gauss, Rank1Product, Ginibre,
                                  PhaseShift, Inverse, Product, FixedTimes)}


def spec_to_dict(spec):
    name = type(spec).__name__
    if isinstance(spec, Haar):
        d = {"N": spec.N, "variant": spec.variant}
        if spec.variant == "custom":
            d["coeffs"] = [[c.real, c.imag] for c in spec.coeffs]
    elif isinstance(spec, Jacobi):
        d = {"N": spec.N, "alpha": spec.alpha, "gamma": spec.gamma}
    elif isinstance(spec, Gauss):
        d = {"N": spec.N, "t": spec.t}
    elif isinstance(spec, Rank1Product):
        d = {"N": spec.N, "gammas": list(spec.gammas)}
    elif isinstance(spec, Ginibre):
        d = {"N": spec.N, "nu": spec.nu}
    elif isinstance(spec, PhaseShift):
        d = {"phi": spec.phi, "inner": spec_to_dict(spec.inner)}
    elif isinstance(spec, Inverse):
        d = {"inner": spec_to_dict(spec.inner)}
    elif isinstance(spec, Product):
        d = {"specs": [spec_to_dict(s) for s in spec.specs]}
    elif isinstance(spec, FixedTimes):
        d = {"x": list(spec.x), "inner": spec_to_dict(spec.inner)}
    else:
        raise SpecError(f"unknown spec {spec!r}")
    return {"type": name, **d}


def spec_from_dict(d):
    d = dict(d)
    name = d.pop("type")
    if name not in _TYPES:
        raise SpecError(f"unknown spec type {name!r}")
    if name == "Haar" and "coeffs" in d:
        d["coeffs"] = tuple(complex(re, im) for re, im in d["coeffs"])
    if "inner" in d:
        d["inner"] = spec_from_dict(d["inner"])
    if "specs" in d:
        d["specs"] = tuple(spec_from_dict(s) for s in d["specs"])
    for k in ("gammas", "x"):
        if k in d:
            d[k] = tuple(d[k])
    return _TYPES[name](**d)


# ---------------------------------------------------------------- raw closed forms

def jacobi_coeff(N, alpha, gamma, s):
    """Gamma(N+a) / (Gamma(N+a/2-s+ig) Gamma(a/2+s-ig+1)); zero at poles."""
    s = np.asarray(s, dtype=float)
    z1 = N + alpha / 2 - s + 1j * gamma
    z2 = alpha / 2 + s - 1j * gamma + 1
    out = np.zeros(s.shape, dtype=complex)
    pole = _poles(z1) | _poles(z2)
    ok = ~pole
    lg = loggamma(N + alpha) - loggamma(z1[ok]) - loggamma(z2[ok])
    out[ok] = np.exp(lg)
    return out


def _poles(z):
    z = np.asarray(z, dtype=complex)
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def jacobi_weight_function(N, alpha, gamma, theta):
    """Closed-form Jacobi weight at e^{i theta}, theta in (-pi, pi)."""
    theta = np.asarray(theta, dtype=float)
    c = 2 * np.cos(theta / 2)
    return np.exp(-0.5j * (N - 1) * theta + gamma * theta) * c ** (alpha + N - 1)


def _gauss_raw(N, t, s):
    s = np.asarray(s, dtype=float)
    return np.exp(-t * (s - (N - 1) / 2) ** 2) + 0j


def _ginibre_raw(N, nu, s):
    s = np.asarray(s, dtype=float)
    return np.exp(loggamma(nu + 1 + 1j * (s - (N - 1) / 2)))


def _rank1_raw(N, gammas, s):
    s = np.asarray(s, dtype=float)
    out = np.ones(s.shape, dtype=complex)
    for g in gammas:
        out = out / ((1 - N) / 2 - 1j * g + s)
    return out


def _canonical_constant(raw, N):
    """Complex constant c making c*raw real-symmetric and canonically scaled."""
    core = raw(np.arange(N))
    j = (N - 1) // 2
    r = np.conj(core[j]) / core[N - 1 - j]
    c = np.sqrt(r / abs(r))
    return c * canonical_scale_factor(core * c)


def _raw_fn(spec):
    """Closed-form coefficient function s -> u_s for a spec (vectorised)."""
    N = spec.N
    if isinstance(spec, Haar):
        if spec.variant == "geometric":
            core = np.ones(N, dtype=complex)
        elif spec.variant == "binomial":
            core = np.array([math.comb(N - 1, k) for k in range(N)], dtype=complex)
        else:
            core = np.array(spec.coeffs, dtype=complex)

        def f(s):
            s = np.asarray(s)
            out = np.zeros(s.shape, dtype=complex)
            m = (s >= 0) & (s < N)
            out[m] = core[s[m].astype(int)]
            return out
        return f
    if isinstance(spec, Jacobi):
        return lambda s: jacobi_coeff(N, spec.alpha, spec.gamma, s)
    if isinstance(spec, Gauss):
        return lambda s: _gauss_raw(N, spec.t, s)
    if isinstance(spec, Ginibre):
        raw = lambda s: _ginibre_raw(N, spec.nu, s)
        c = _canonical_constant(raw, N)
        return lambda s: c * raw(s)
    if isinstance(spec, Rank1Product):
        raw = lambda s: _rank1_raw(N, spec.gammas, s)
        c = _canonical_constant(raw, N)
        return lambda s: c * raw(s)
    if isinstance(spec, PhaseShift):
        inner = _raw_fn(spec.inner)
        phi = float(wrap_angle(spec.phi))
        return lambda s: inner(s) * np.exp(1j * phi * (np.asarray(s) - (N - 1) / 2))
    if isinstance(spec, Inverse):
        inner = _raw_fn(spec.inner)
        return lambda s: inner(N - 1 - np.asarray(s))
    if isinstance(spec, Product):
        fns = [_raw_fn(x) for x in spec.specs]

        def f(s):
            out = np.ones(np.shape(s), dtype=complex)
            for g in fns:
                out = out * g(s)
            return out
        return f
    if isinstance(spec, FixedTimes):
        raise SpecError("FixedTimes has no single weight; use the fixed-product routines")
    raise SpecError(f"unknown spec {spec!r}")


def closed_form_transform(spec, s):
    """Laurent coefficient u_s (= S w(s)) from the closed form, no window needed."""
    out = _raw_fn(spec)(np.asarray(s))
    return out if np.ndim(out) else complex(out)


# ---------------------------------------------------------------- windows

def _decay(spec):
    """(kind, rate): algebraic |s|^{-rate}, exponential e^{-rate |s|}, or finite."""
    if isinstance(spec, Haar):
        return ("finite", 0.0)
    if isinstance(spec, Jacobi):
        if spec.gamma == 0 and float(spec.alpha / 2).is_integer():
            return ("finite", 0.0)
        return ("algebraic", spec.N + spec.alpha)
    if isinstance(spec, Gauss):
        return ("gauss", spec.t)
    if isinstance(spec, Ginibre):
        return ("exponential", np.pi / 2)
    if isinstance(spec, Rank1Product):
        return ("algebraic", float(spec.L))
    if isinstance(spec, (PhaseShift, Inverse)):
        return _decay(spec.inner)
    if isinstance(spec, Product):
        kinds = [_decay(x) for x in spec.specs]
        if any(k == "finite" for k, _ in kinds):
            return ("finite", 0.0)
        if any(k == "gauss" for k, _ in kinds):
            return ("gauss", sum(r for k, r in kinds if k == "gauss"))
        if any(k == "exponential" for k, _ in kinds):
            return ("exponential", sum(r for k, r in kinds if k == "exponential"))
        return ("algebraic", sum(r for _, r in kinds))
    raise SpecError(f"unknown spec {spec!r}")


def _tail_estimate(kind, rate, u_lo, u_hi, half):
    """Majorant for the absolute sum beyond a symmetric window of half-width ``half``."""
    tail = 0.0
    for u in (abs(u_lo), abs(u_hi)):
        if u == 0:
            continue
        if kind == "algebraic":
            if rate <= 1:
                return np.inf
            tail += 2.0 * u * (half + 1) / (rate - 1)
        elif kind == "exponential":
            q = np.exp(-rate) * 1.5
            tail += u * q / (1 - q) if q < 1 else np.inf
        elif kind == "gauss":
            q = np.exp(-rate * (2 * half + 1))
            tail += u * q / (1 - q)
    return tail


def _build(spec, raw, max_half=MAX_HALF_WIDTH, tail_target=TAIL_TARGET):
    N = spec.N
    c = (N - 1) / 2
    kind, rate = _decay(spec)
    if kind == "finite":
        half = int(np.ceil(c)) + 2
        # Jacobi with even alpha has support [-alpha/2, N-1+alpha/2]
        if isinstance(spec, Jacobi):
            half += int(abs(spec.alpha) / 2) + 1
        if isinstance(spec, Product):
            half += sum(int(abs(getattr(x, "alpha", 0)) / 2) + 1 for x in spec.specs)
    else:
        half = 16
    while True:
        lo = int(np.floor(c - half))
        hi = int(np.ceil(c + half))
        lo, hi = min(lo, 0), max(hi, N - 1)
        s = np.arange(lo, hi + 1)
        u = raw(s)
        if kind == "finite":
            tail = 0.0
            break
        tail = _tail_estimate(kind, rate, u[0], u[-1], half)
        if tail < tail_target or half >= max_half:
            break
        half = min(2 * half, max_half)
    # trim exact zeros at both ends, keeping [0, N-1]
    nz = np.nonzero(u)[0]
    if nz.size:
        a = min(nz[0], -lo)
        b = max(nz[-1], N - 1 - lo)
        u = u[a:b + 1]
        lo = lo + a
    return LaurentWeight(N, lo, u, float(tail))


def resolve_weight(spec, max_half=MAX_HALF_WIDTH, kernel_grade=True):
    """Laurent coefficient window for a spec.

    Infinite families are truncated symmetrically about (N-1)/2 until the tail
    majorant drops below 1e-14 or the half-width reaches ``max_half``; the
    achieved bound is stored in ``tail_bound``.
    """
    if isinstance(spec, FixedTimes):
        raise SpecError("FixedTimes has no single weight; use the fixed-product routines")
    if kernel_grade:
        _check_kernel_grade(spec)
    if isinstance(spec, Inverse):
        return inverse_weight(resolve_weight(spec.inner, max_half, kernel_grade))
    if isinstance(spec, PhaseShift):
        return phase_shift(resolve_weight(spec.inner, max_half, kernel_grade), spec.phi)
    if isinstance(spec, Product):
        ws = [resolve_weight(x, max_half, kernel_grade) for x in spec.specs]
        out = ws[0]
        for w in ws[1:]:
            out = convolve(out, w)
        return out
    w = _build(spec, _raw_fn(spec), max_half)
    rep = validate_weight(w, tol=1e-10)
    if not rep:
        raise SpecError(f"resolved weight fails validation: {rep.violations}")
    return w


def _check_kernel_grade(spec):
    if isinstance(spec, Rank1Product) and spec.L < spec.N + 2:
        raise SpecError(
            f"Rank1Product needs L >= N + 2 = {spec.N + 2} factors so that "
            f"sum |s|^(N-1) |u_s| converges with a usable tail bound (got L = {spec.L})")
    for attr in ("inner",):
        if hasattr(spec, attr):
            _check_kernel_grade(getattr(spec, attr))
    if isinstance(spec, Product):
        # the product decays faster than each factor, so only the total matters
        kind, rate = _decay(spec)
        if kind == "algebraic" and rate < spec.N + 2 and all(
                isinstance(x, Rank1Product) for x in spec.specs):
            raise SpecError("rank-1 product needs total L >= N + 2")


# ---------------------------------------------------------------- densities

def rank1_angle_density(N, gamma, theta):
    """Density of the nontrivial eigenangle of a rank-1 Jacobi factor (w.r.t. dtheta/2pi)."""
    theta = np.asarray(theta, dtype=float)
    lg = 2 * loggamma((N + 1) / 2 + 1j * gamma).real - math.lgamma(N)
    c = np.clip(np.cos(theta / 2), 0, None)
    return np.exp(lg + (N - 1) * np.log(2.0)) * c ** (N - 1) * np.exp(gamma * theta)


def morris_constant(N, alpha, gamma):
    """Normalisation of |Delta|^2 prod |1+z|^alpha e^{gamma theta} on the torus."""
    out = 0.0
    for j in range(N):
        out += (math.lgamma(1 + alpha + j) + math.lgamma(j + 2)
                - 2 * loggamma(1 + alpha / 2 + 1j * gamma + j).real)
    return math.exp(out)


def jacobi_jpdf_closed(N, alpha, gamma, theta):
    """Circular Jacobi joint density of the angles, normalised on the full torus."""
    from .laurent import vandermonde_angles
    theta = np.asarray(theta, dtype=float)
    v = np.abs(vandermonde_angles(theta)) ** 2
    f = np.prod(np.abs(2 * np.cos(theta / 2)) ** alpha * np.exp(gamma * theta), axis=-1)
    return v * f / morris_constant(N, alpha, gamma)
