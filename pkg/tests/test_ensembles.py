import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cyclic_polya import ensembles as ens
from cyclic_polya.kernel import kernel_eval, cue_kernel
from cyclic_polya.laurent import convolve, eval_weight, validate_weight
from cyclic_polya.spherical import ensemble_transform

# jacobi_coeff(3, 1.5, 0.3, s), 30-digit mpmath evaluations
JACOBI_REF = {
    -2: -0.05273681416106282506 - 0.0039206972543489997334j,
    0: 2.8860443843934056048 - 0.82502062867783958004j,
    4: -0.05273681416106282506 + 0.0039206972543489997334j,
    7: 0.0015379738227738376988 - 0.0006486487325849217622j,
}


@pytest.mark.parametrize("s, ref", sorted(JACOBI_REF.items()))
def test_jacobi_coefficient_reference(s, ref):
    assert abs(ens.jacobi_coeff(3, 1.5, 0.3, s) - ref) < 1e-13 * abs(ref)


@pytest.mark.parametrize("N", [1, 2, 3, 5, 8])
def test_jacobi_zero_is_binomial_haar(N):
    s = np.arange(-4, N + 4)
    a = ens.closed_form_transform(ens.Jacobi(N, 0.0, 0.0), s)
    b = ens.closed_form_transform(ens.Haar(N, "binomial"), s)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


def test_jacobi_n4_middle():
    assert abs(ens.jacobi_coeff(4, 0.0, 0.0, 2) - 3) < 1e-13


def test_jacobi_n2_alpha1_s0():
    # Gamma(N+a) / (Gamma(N+a/2-s) Gamma(a/2+s+1)) at N=2, a=1, s=0
    ref = math.gamma(3) / (math.gamma(2.5) * math.gamma(1.5))
    assert abs(ens.jacobi_coeff(2, 1.0, 0.0, 0) - ref) < 1e-14
    # the same number as the zeroth Fourier coefficient of the weight
    M = 1 << 14
    th = -np.pi + 2 * np.pi * (np.arange(M) + 0.5) / M
    assert abs(np.mean(ens.jacobi_weight_function(2, 1.0, 0.0, th)) - ref) < 1e-7


def test_haar_outside_core_vanishes():
    v = ens.closed_form_transform(ens.Haar(4), np.array([-3, -1, 4, 9]))
    assert np.all(v == 0)


@pytest.mark.parametrize("N", [1, 3, 5])
def test_gauss_centre_is_one(N):
    assert ens.closed_form_transform(ens.Gauss(N, 0.7), (N - 1) // 2) == 1


def test_inverse_jacobi_equals_flipped_gamma():
    s = np.arange(-12, 16)
    a = ens.closed_form_transform(ens.Inverse(ens.Jacobi(4, 2.5, 0.6)), s)
    b = ens.closed_form_transform(ens.Jacobi(4, 2.5, -0.6), s)
    np.testing.assert_allclose(a, b, rtol=1e-13)


@given(st.integers(1, 7), st.floats(-0.9, 6), st.floats(-2, 2))
def test_jacobi_reality_relation(N, a, g):
    s = np.arange(-10, N + 10)
    u = ens.jacobi_coeff(N, a, g, s)
    m = ens.jacobi_coeff(N, a, g, N - 1 - s)
    assert np.all(np.abs(np.conj(u) - m) <= 1e-12 * np.maximum(1, np.abs(u)))


def test_spec_validation():
    with pytest.raises(ens.SpecError):
        ens.Jacobi(3, -1.0)
    with pytest.raises(ens.SpecError):
        ens.Gauss(3, 0.0)
    with pytest.raises(ens.SpecError):
        ens.Ginibre(2, -1.5)
    with pytest.raises(ens.SpecError):
        ens.Rank1Product(3, (0.1, 0.2))
    with pytest.raises(ens.SpecError):
        ens.Haar(3, "triangular")
    with pytest.raises(ens.SpecError):
        ens.FixedTimes((0.1, 0.1), ens.Haar(2))


def test_rank1_product_kernel_grade():
    with pytest.raises(ens.SpecError):
        ens.resolve_weight(ens.Rank1Product(3, (0.1, 0.2, 0.3, 0.4)))
    w = ens.resolve_weight(ens.Rank1Product(3, (0.1, 0.2, 0.3, 0.4, 0.5)))
    assert validate_weight(w, 1e-10).ok


@pytest.mark.parametrize("spec", [
    ens.Haar(3), ens.Haar(4, "binomial"), ens.Jacobi(3, 1.5, 0.3), ens.Jacobi(4, 2.0, 0.0),
    ens.Gauss(4, 0.3), ens.Ginibre(3, 0.5), ens.Ginibre(2, 0.0),
    ens.Rank1Product(2, (0.3, -0.2, 0.5, 0.1)),
    ens.PhaseShift(0.7, ens.Jacobi(3, 2.5, -0.4)), ens.Inverse(ens.Gauss(3, 0.2)),
    ens.Product((ens.Jacobi(3, 1.5, 0.3), ens.Gauss(3, 0.5))),
    ens.Haar(3, "custom", (1 - 1j, 3, 1 + 1j)),
], ids=repr)
def test_resolved_catalog_weights_validate(spec):
    w = ens.resolve_weight(spec)
    assert validate_weight(w, 1e-12).ok
    assert np.isfinite(w.tail_bound)
    if not isinstance(spec, (ens.Product, ens.PhaseShift, ens.Inverse)):
        # either the tail target is met or the window hit its cap
        width = w.s_hi - w.s_lo + 1
        assert w.tail_bound < ens.TAIL_TARGET or width >= 2 * ens.MAX_HALF_WIDTH
    s = w.indices
    np.testing.assert_allclose(w.coeffs, ens.closed_form_transform(spec, s) *
                               (w.coeffs[-w.s_lo] / ens.closed_form_transform(spec, 0)),
                               rtol=1e-12, atol=1e-15)


def test_finite_support_for_even_alpha():
    w = ens.resolve_weight(ens.Jacobi(3, 4.0, 0.0))
    assert (w.s_lo, w.s_hi) == (-2, 4)
    assert w.tail_bound == 0


@pytest.mark.parametrize("spec", [ens.Jacobi(3, 1.5, 0.3), ens.Gauss(2, 0.4),
                                  ens.Rank1Product(3, (0.1, 0.2, 0.3, 0.4, 0.5))])
def test_transform_normalisation_anchor(spec):
    assert abs(ensemble_transform(spec, tuple(range(spec.N))) - 1) < 1e-14


@given(st.lists(st.integers(-15, 18), min_size=3, max_size=3, unique=True))
def test_window_and_closed_form_transforms_agree(s):
    spec = ens.Jacobi(3, 2.5, 0.4)
    w = ens.resolve_weight(spec)
    a = ensemble_transform(w, s)
    b = ensemble_transform(spec, s)
    assert abs(a - b) <= 1e-12 * max(1, abs(b))


def test_convolution_with_haar_gives_haar_kernel():
    w = convolve(ens.resolve_weight(ens.Gauss(4, 0.3)), ens.resolve_weight(ens.Haar(4)))
    rng = np.random.default_rng(3)
    t1, t2 = rng.uniform(-np.pi, np.pi, (2, 50))
    np.testing.assert_allclose(kernel_eval(w, t1, t2), cue_kernel(4, t1, t2), atol=1e-12)


def test_phase_shift_keeps_validity():
    for phi in (-3.0, -0.4, 1.1, 2.9):
        w = ens.resolve_weight(ens.PhaseShift(phi, ens.Jacobi(4, 1.5, 0.3)))
        assert validate_weight(w, 1e-12).ok


def test_jacobi_weight_matches_coefficients():
    N, a, g = 3, 2.5, 0.7
    w = ens.resolve_weight(ens.Jacobi(N, a, g))
    th = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(eval_weight(w, th), ens.jacobi_weight_function(N, a, g, th),
                               atol=1e-10)


def test_spec_dict_round_trip():
    spec = ens.Product((ens.PhaseShift(0.3, ens.Jacobi(3, 1.5, 0.2)),
                        ens.Inverse(ens.Rank1Product(3, (0.1, 0.2, 0.3, 0.4, 0.5))),
                        ens.Haar(3, "custom", (1 - 1j, 2, 1 + 1j))))
    assert ens.spec_from_dict(ens.spec_to_dict(spec)) == spec
    f = ens.FixedTimes((0.1, 1.0, 2.5), ens.Gauss(3, 0.2))
    assert ens.spec_from_dict(ens.spec_to_dict(f)) == f


# ---------------------------------------------------------------- rank-1 angle density

def test_rank1_density_n1_gamma0_is_uniform():
    th = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(ens.rank1_angle_density(1, 0.0, th), 1.0, rtol=1e-14)


def test_rank1_density_normalised():
    M = 2048
    th = -np.pi + 2 * np.pi * np.arange(M) / M
    assert abs(np.mean(ens.rank1_angle_density(3, 0.7, th)) - 1) < 1e-10


@given(st.integers(1, 6), st.floats(-2, 2), st.floats(0.01, 3.1))
def test_rank1_density_tilt_ratio(N, g, th):
    p = ens.rank1_angle_density(N, g, th)
    q = ens.rank1_angle_density(N, g, -th)
    assert abs(p / q - math.exp(2 * g * th)) <= 1e-12 * math.exp(2 * g * th)


# ---------------------------------------------------------------- Morris constant

def test_morris_reference():
    # N=2, alpha=1, gamma=0.3 by 30-digit quadrature
    assert abs(ens.morris_constant(2, 1.0, 0.3) - 3.27290592398872569759212192281) < 1e-13


def test_morris_haar():
    for N in range(1, 6):
        assert abs(ens.morris_constant(N, 0.0, 0.0) - math.factorial(N)) < 1e-10 * math.factorial(N)
