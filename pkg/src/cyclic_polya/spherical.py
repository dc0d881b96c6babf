"""Spherical functions and spherical transforms on U(N)."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .laurent import GAP_TOL, LaurentWeight, min_gap, vandermonde_angles, vandermonde_int
from . import ensembles as ens


class DegenerateSpectrum(ValueError):
    pass


def _superfactorial(N):
    return math.prod(math.factorial(j) for j in range(N))


def spherical_function(theta, s, gap_tol=GAP_TOL):
    """Normalised character prod j! det[z_a^{s_b}] / (Delta(z) Delta(s)) at z = e^{i theta}."""
    theta = np.asarray(getattr(theta, "angles", theta), dtype=float)
    s = np.asarray(tuple(s), dtype=float)
    N = theta.size
    if s.size != N:
        raise ValueError("spherical function needs len(s) == len(theta)")
    if len(set(s.tolist())) != N:
        raise ValueError("multi-index entries must be distinct")
    if min_gap(theta) < gap_tol:
        raise DegenerateSpectrum(f"eigenvalues closer than {gap_tol}")
    # entries have unit modulus, so the determinant cannot overflow; the phase
    # of each row is pulled out against a reference exponent to keep the LU tame
    shift = np.round(s.mean())
    A = np.exp(1j * np.outer(theta, s - shift))
    det = np.linalg.det(A) * np.exp(1j * shift * theta.sum())
    return _superfactorial(N) * det / (vandermonde_angles(theta) * vandermonde_int(s))


def _weight_transform(w, s):
    s = np.asarray(tuple(s))
    N = w.N
    num = w.coeff(s)
    den = w.coeff(np.arange(N))
    if np.any(den == 0):
        raise ValueError("weight has a vanishing core coefficient")
    return complex(np.prod(num / den))


def ensemble_transform(spec_or_weight, s):
    """Spherical transform at a multi-index for a weight or an ensemble spec."""
    s = tuple(int(v) for v in s)
    if len(set(s)) != len(s):
        raise ValueError("multi-index entries must be distinct")
    obj = spec_or_weight
    if isinstance(obj, LaurentWeight):
        return _weight_transform(obj, s)
    if isinstance(obj, ens.FixedTimes):
        return spherical_function(np.array(obj.x), s) * ensemble_transform(obj.inner, s)
    if isinstance(obj, ens.Product) and any(isinstance(x, ens.FixedTimes) for x in obj.specs):
        out = 1.0 + 0j
        for x in obj.specs:
            out *= ensemble_transform(x, s)
        return out
    N = obj.N
    num = ens.closed_form_transform(obj, np.array(s))
    den = ens.closed_form_transform(obj, np.arange(N))
    if np.any(den == 0):
        raise ValueError("weight has a vanishing core coefficient")
    return complex(np.prod(num / den))


def polynomial_ensemble_transform(coeff_fns, s):
    """Transform of a polynomial ensemble given the Laurent coefficient maps of its weights.

    ``coeff_fns[b](s)`` returns S w_b(s).
    """
    s = np.asarray(tuple(s))
    N = s.size
    A = np.array([[coeff_fns[b](sa) for b in range(N)] for sa in s], dtype=complex)
    B = np.array([[coeff_fns[b](a) for b in range(N)] for a in range(N)], dtype=complex)
    return complex(_superfactorial(N) / vandermonde_int(s) * np.linalg.det(A) / np.linalg.det(B))


def _combos(lo, hi, N):
    return np.array(list(itertools.combinations(range(lo, hi + 1), N)), dtype=int)


def inverse_transform_density(transform, theta, s_window=None, t_reg=0.0, chunk=4096):
    """Eigenvalue density recovered from a spherical transform by the inversion sum.

    The sum over distinct integer tuples is restricted to ``s_window`` and each
    term carries the Gaussian regulator exp(-t (sum (s+(1-N)/2)^2 - sum_j (j+(1-N)/2)^2)).
    Terms are enumerated as sorted tuples (the summand is symmetric) and summed
    with compensated summation, so the result does not depend on chunking.
    """
    theta = np.asarray(getattr(theta, "angles", theta), dtype=float)
    N = theta.size
    if N > 4:
        raise ValueError("inversion sum is restricted to N <= 4")
    if min_gap(theta) < GAP_TOL:
        raise DegenerateSpectrum("degenerate spectrum")
    c = (N - 1) / 2
    if s_window is None:
        s_window = (int(np.floor(c - 40)), int(np.ceil(c + 40)))
    lo, hi = s_window
    S = _combos(lo, hi, N)
    ref = sum((j - c) ** 2 for j in range(N))
    zinv = -theta
    re_parts, im_parts = [], []
    vz = vandermonde_angles(zinv)
    sf = _superfactorial(N)
    for k in range(0, len(S), chunk):
        blk = S[k:k + chunk]
        T = np.array([transform(tuple(row)) for row in blk], dtype=complex)
        ds = vandermonde_int(blk)
        # Delta(s)^2 Phi(z^-1; s) = prod j! Delta(s) det[z_a^{-s_b}] / Delta(z^-1)
        A = np.exp(1j * zinv[None, :, None] * blk[:, None, :])
        det = np.linalg.det(A)
        reg = np.exp(-t_reg * (((blk - c) ** 2).sum(axis=1) - ref)) if t_reg else 1.0
        terms = sf * ds * det / vz * T * reg
        re_parts.extend(terms.real.tolist())
        im_parts.extend(terms.imag.tolist())
    total = complex(math.fsum(re_parts), math.fsum(im_parts))
    # summand is symmetric in s, so sorted tuples suffice with this prefactor
    pref = np.abs(vandermonde_angles(theta)) ** 2 / (math.factorial(N) * sf ** 2)
    val = pref * total
    scale = pref * math.fsum(np.abs(np.array(re_parts) + 1j * np.array(im_parts)))
    if abs(val.imag) > 1e-8 * max(scale, 1.0):
        raise ArithmeticError(f"inverse transform not real: {val}")
    return float(val.real)


def reconstruct_ratios(transform, N, s_values, ref=None):
    """Recover u_s / u_ref from transform values on multi-indices (s', core minus one index).

    For s' outside the core, transform((s',) + core\\{l}) = u_{s'} / u_l.  Core
    ratios are obtained through a pivot s* outside the core with nonzero value.
    """
    core = list(range(N))
    if ref is None:
        ref = (N - 1) // 2

    def ratio_out(sp, l):
        idx = (sp,) + tuple(j for j in core if j != l)
        return transform(idx)

    outside = [s for s in s_values if s < 0 or s >= N]
    if not outside:
        raise ValueError("need at least one index outside [0, N-1]")
    vals = {s: ratio_out(s, ref) for s in outside}
    pivot = max(outside, key=lambda s: abs(vals[s]))
    if vals[pivot] == 0:
        raise ValueError("all probed transforms vanish: weight is a Haar variant, no uniqueness")
    out = {}
    for s in s_values:
        if s in vals:
            out[s] = vals[s]
        elif s == ref:
            out[s] = 1.0 + 0j
        else:
            # u_s/u_ref = (u_p/u_ref) / (u_p/u_s)
            out[s] = vals[pivot] / ratio_out(pivot, s)
    return out


def reconstruct_weight(transform, N, s_lo, s_hi):
    """Weight window rebuilt from transform values, with reality restored and canonical scale."""
    from .laurent import canonical
    s_values = list(range(s_lo, s_hi + 1))
    r = reconstruct_ratios(transform, N, s_values)
    w = LaurentWeight(N, s_lo, np.array([r[s] for s in s_values]))
    return canonical(w, fix_phase=True)
