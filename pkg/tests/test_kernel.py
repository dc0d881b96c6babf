import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cyclic_polya import ensembles as ens
from cyclic_polya import kernel as kern
from cyclic_polya.density import brute_force_Rk, jpdf_fixed_product
from cyclic_polya.laurent import LaurentWeight, convolve, eval_weight
from cyclic_polya.spherical import DegenerateSpectrum

CATALOG = [ens.Haar(3), ens.Jacobi(3, 1.5, 0.3), ens.Jacobi(4, 2.5, 0.7), ens.Gauss(5, 0.3),
           ens.Ginibre(4, 0.5), ens.Rank1Product(3, (0.1, 0.2, 0.3, 0.4, 0.5)),
           ens.PhaseShift(1.2, ens.Jacobi(2, 0.5, -0.4)), ens.Inverse(ens.Gauss(6, 0.2))]


def trapezoid(M):
    return -np.pi + 2 * np.pi * np.arange(M) / M


def test_geometric_haar_n2_system():
    s = kern.biorth_polya(LaurentWeight(2, 0, np.array([1, 1], dtype=complex)))
    np.testing.assert_array_equal(s.P, [[1, 0], [1, -1]])
    assert s.q_lo == 0
    np.testing.assert_array_equal(s.Q, [[1, 1], [0, -1]])
    np.testing.assert_array_equal(s.gram(), np.eye(2))


@pytest.mark.parametrize("spec", CATALOG, ids=repr)
def test_biorthonormal(spec):
    s = kern.biorth_polya(ens.resolve_weight(spec))
    assert np.abs(s.gram() - np.eye(spec.N)).max() < 1e-10
    assert np.abs(s.gram_quadrature(4096) - np.eye(spec.N)).max() < 1e-9
    # P_j has degree exactly j
    for j in range(spec.N):
        assert s.P[j, j] != 0 and np.all(s.P[j, j + 1:] == 0)


@pytest.mark.parametrize("spec", CATALOG, ids=repr)
def test_ladder_relation(spec):
    # (j - z d/dz) P_j = P_{j-1}, i.e. (j - k) P_j[k] = P_{j-1}[k]
    P = kern.biorth_polya(ens.resolve_weight(spec)).P
    k = np.arange(spec.N)
    for j in range(1, spec.N):
        np.testing.assert_allclose((j - k) * P[j], P[j - 1], rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("N, a, g", [(4, 2.5, 0.7), (3, 3.5, -0.3), (2, 1.5, 0.3)])
def test_jacobi_closed_forms(N, a, g):
    s = kern.biorth_polya(ens.resolve_weight(ens.Jacobi(N, a, g)))
    th = np.linspace(-3.0, 3.0, 11)
    for j in range(N):
        np.testing.assert_allclose(kern.jacobi_biorth_closed(N, a, g, j, th, "P"),
                                   s.eval_P(th)[:, j], rtol=1e-12)
        # the window is truncated, so Q agrees to the tail level
        np.testing.assert_allclose(kern.jacobi_biorth_closed(N, a, g, j, th, "Q"),
                                   s.eval_Q(th)[:, j], atol=1e-5)


def test_jacobi_closed_p_small_alpha():
    N, a, g = 3, 0.5, -0.3
    s = kern.biorth_polya(ens.resolve_weight(ens.Jacobi(N, a, g)))
    th = np.linspace(-3.0, 3.0, 11)
    for j in range(N):
        np.testing.assert_allclose(kern.jacobi_biorth_closed(N, a, g, j, th, "P"),
                                   s.eval_P(th)[:, j], rtol=1e-12)


def test_jacobi_closed_p0_constant():
    N, a, g = 3, 1.5, 0.3
    ref = math.exp((ens.loggamma(N + a / 2 + 1j * g) + ens.loggamma(a / 2 - 1j * g + 1)
                    - ens.loggamma(N + a)).real)
    v = kern.jacobi_biorth_closed(N, a, g, 0, np.array([0.1, 2.0]), "P")
    assert np.allclose(np.abs(v), ref, rtol=1e-13)
    assert abs(v[0] - v[1]) < 1e-15


def test_jacobi_closed_biorthonormal():
    N, a, g, M = 4, 2.5, 0.7, 2048
    th = trapezoid(M)
    P = np.array([kern.jacobi_biorth_closed(N, a, g, j, th, "P") for j in range(N)])
    Q = np.array([kern.jacobi_biorth_closed(N, a, g, j, th, "Q") for j in range(N)])
    assert np.abs(P @ Q.T / M - np.eye(N)).max() < 1e-9


def test_jacobi_closed_at_zero_parameters_is_haar():
    N = 4
    s = kern.biorth_polya(ens.resolve_weight(ens.Haar(N, "binomial")))
    th = np.linspace(-3, 3, 7)
    for j in range(N):
        np.testing.assert_allclose(kern.jacobi_biorth_closed(N, 0.0, 0.0, j, th, "P"),
                                   s.eval_P(th)[:, j], atol=1e-13)
        np.testing.assert_allclose(kern.jacobi_biorth_closed(N, 0.0, 0.0, j, th, "Q"),
                                   s.eval_Q(th)[:, j], atol=1e-13)


# ---------------------------------------------------------------- chi

def test_chi_geometric_haar():
    np.testing.assert_array_equal(kern.chi_polynomial(ens.resolve_weight(ens.Haar(4))), np.ones(4))


def test_chi_n1():
    w = LaurentWeight(1, 0, np.array([2.5 + 0j]))
    assert kern.chi_polynomial(w)[0] == 0.4


def test_chi_reproduces_polynomials():
    # int int chi(z/z') w(y/z') p(y) = p(z), checked with p(y) = y at z = 1
    M = 256
    w = ens.resolve_weight(ens.Jacobi(2, 1.5, 0.3), max_half=M // 2 - 3)
    chi = kern.chi_polynomial(w)
    th = trapezoid(M)
    y = np.exp(1j * th)
    # (w * p)(z') = mean_y w(y / z') p(y)
    conv = np.array([np.mean(eval_weight(w, th - t) * y) for t in th])
    chi_vals = sum(chi[l] * np.exp(-1j * l * th) for l in range(2))    # chi(1 / z')
    assert abs(np.mean(chi_vals * conv) - 1) < 1e-10


# ---------------------------------------------------------------- kernels

@pytest.mark.parametrize("N", range(2, 9))
def test_haar_reduction(N):
    w = ens.resolve_weight(ens.Jacobi(N, 0.0, 0.0))
    rng = np.random.default_rng(N)
    t1, t2 = rng.uniform(-np.pi, np.pi, (2, 100))
    r = np.exp(1j * (t1 - t2))
    ref = (1 - r ** N) / (1 - r)
    assert np.abs(kern.kernel_eval(w, t1, t2) - ref).max() < 1e-10
    assert np.allclose(kern.kernel_eval(w, t1, t1), N, atol=1e-12)


@pytest.mark.parametrize("spec", CATALOG, ids=repr)
def test_trace_and_reproducing(spec):
    w = ens.resolve_weight(spec)
    s = kern.biorth_polya(w)
    M = 2048
    th = trapezoid(M)
    assert abs(np.mean(s.kernel(th, th)) - spec.N) < 1e-10
    a, b = np.random.default_rng(1).uniform(-np.pi, np.pi, (2, 5))
    rep = s.kernel_matrix(a, th) @ s.kernel_matrix(th, b) / M
    assert np.abs(rep - s.kernel_matrix(a, b)).max() < 1e-8


def test_diagonal_is_real():
    for spec in CATALOG:
        w = ens.resolve_weight(spec)
        th = np.random.default_rng(0).uniform(-np.pi, np.pi, 1000)
        assert np.abs(kern.kernel_eval(w, th, th).imag).max() < 1e-10


@pytest.mark.parametrize("spec", [ens.Jacobi(2, 1.5, 0.3), ens.Jacobi(3, 2.5, 0.7),
                                  ens.Gauss(4, 0.3), ens.Ginibre(3, 0.5),
                                  ens.Rank1Product(2, (0.1, 0.2, 0.3, 0.4, 0.5))], ids=repr)
def test_christoffel_darboux_matches_series(spec):
    pk = kern.PolyaKernel(ens.resolve_weight(spec))
    t1, t2 = np.random.default_rng(7).uniform(-np.pi, np.pi, (2, 100))
    assert np.abs(pk(t1, t2, "cd") - pk(t1, t2, "series")).max() < 1e-8
    # coincident points go through the removable singularity of the Haar part
    assert abs(pk(0.3, 0.3, "cd") - pk(0.3, 0.3, "series")) < 1e-8


def test_christoffel_darboux_needs_decay():
    # |u_s| ~ |s|^-3 for N=2, alpha=1: sum |s|^N |u_s| diverges
    pk = kern.PolyaKernel(ens.resolve_weight(ens.Jacobi(2, 1.0, 0.3)))
    with pytest.raises(kern.InsufficientDecay):
        pk(0.1, 0.2, "cd")


@pytest.mark.parametrize("N, k", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_determinantal_oracle(N, k):
    M = 128
    # window below the grid Nyquist index makes the oracle's quadrature exact
    w = ens.resolve_weight(ens.Jacobi(N, 2.5, 0.4), max_half=M // 2 - N - 1)
    s = kern.biorth_polya(w)
    pts = np.random.default_rng(N + k).uniform(-np.pi, np.pi, (4, k))
    R = brute_force_Rk(w, N, k, pts, grid_M=M)
    for p, r in zip(pts, R):
        d = np.linalg.det(s.kernel_matrix(p, p)).real
        assert abs(d - r) < 1e-5 * abs(r)


def test_one_point_cdf():
    from scipy.integrate import quad
    # a short window keeps the density a low-degree trigonometric polynomial for quad
    s = kern.biorth_polya(ens.resolve_weight(ens.Jacobi(3, 1.5, 0.3), max_half=30))
    assert abs(kern.one_point_cdf(s, np.pi) - 1) < 1e-12
    assert abs(kern.one_point_cdf(s, -np.pi)) < 1e-12
    q, _ = quad(lambda t: kern.one_point_density(s, t) / (2 * np.pi), -np.pi, 0.7,
                epsabs=1e-12, limit=200)
    assert abs(q - kern.one_point_cdf(s, 0.7)) < 1e-9


# ---------------------------------------------------------------- fixed product

@pytest.mark.parametrize("N", [2, 3])
def test_fixed_series_vs_contour(N):
    w = ens.resolve_weight(ens.Jacobi(N, 2.5, 0.4), max_half=200)
    x = np.array([0.3, 2.2, -1.9][:N])
    fk = kern.FixedKernel(w, x)
    t1, t2 = np.random.default_rng(0).uniform(-np.pi, np.pi, (2, 20))
    assert np.abs(fk(t1, t2, "series") - fk(t1, t2, "contour")).max() < 1e-7


@pytest.mark.parametrize("N", [2, 3])
def test_fixed_trace(N):
    M = 2048
    w = ens.resolve_weight(ens.Jacobi(N, 1.5, 0.3), max_half=M // 2 - N - 1)
    fk = kern.FixedKernel(w, np.array([0.3, 2.2, -1.9][:N]))
    th = trapezoid(M)
    assert abs(np.mean(fk.series(th, th)) - N) < 1e-8


def test_fixed_determinant_reproduces_density():
    w = ens.resolve_weight(ens.Jacobi(2, 1.5, 0.3))
    x = np.array([0.3, 2.2])
    fk = kern.FixedKernel(w, x)
    rng = np.random.default_rng(4)
    for _ in range(10):
        th = rng.uniform(-np.pi, np.pi, 2)
        K = fk.series(th[:, None], th[None, :])
        ref = 2 * jpdf_fixed_product(w, x, th)
        assert abs(np.linalg.det(K).real - ref) < 1e-5 * max(ref, 1e-3)


def test_fixed_degenerate_rejected():
    w = ens.resolve_weight(ens.Gauss(2, 0.3))
    with pytest.raises(DegenerateSpectrum):
        kern.FixedKernel(w, np.array([0.1, 0.1 + 1e-10]))


def test_contour_radii_checked():
    fk = kern.FixedKernel(ens.resolve_weight(ens.Haar(2)), np.array([0.1, 1.0]))
    with pytest.raises(ValueError):
        fk.contour(0.1, 0.2, R=1.25, rho=1.5)


# ---------------------------------------------------------------- convolved kernels

def test_convolved_with_haar_inner():
    # a Haar factor absorbs any Polya factor: the product is Haar again
    w = ens.resolve_weight(ens.Jacobi(3, 1.5, 0.3))
    a = kern.kernel_convolved(w, kern.haar_system(3))
    t1, t2 = np.random.default_rng(0).uniform(-np.pi, np.pi, (2, 100))
    assert np.abs(a.kernel(t1, t2) - kern.cue_kernel(3, t1, t2)).max() < 1e-9


def test_convolved_with_haar_weight_truncates():
    inner = kern.biorth_polya(ens.resolve_weight(ens.Gauss(3, 0.4)))
    out = kern.kernel_convolved(ens.resolve_weight(ens.Haar(3)), inner)
    assert (out.q_lo, out.Q.shape[1]) == (0, 3)
    t1, t2 = np.random.default_rng(0).uniform(-np.pi, np.pi, (2, 50))
    assert np.abs(out.kernel(t1, t2) - kern.cue_kernel(3, t1, t2)).max() < 1e-12


def test_convolved_polya_inner_gives_product_system():
    w1 = ens.resolve_weight(ens.Jacobi(3, 1.5, 0.3))
    w2 = ens.resolve_weight(ens.Gauss(3, 0.4))
    a = kern.kernel_convolved(w2, kern.biorth_polya(w1))
    b = kern.biorth_polya(convolve(w1, w2))
    t1, t2 = np.random.default_rng(2).uniform(-np.pi, np.pi, (2, 50))
    assert np.abs(a.kernel(t1, t2) - b.kernel(t1, t2)).max() < 1e-12


def test_convolved_associates():
    inner = kern.biorth_polya(ens.resolve_weight(ens.Jacobi(3, 2.5, 0.1)))
    w1 = ens.resolve_weight(ens.Gauss(3, 0.4))
    w2 = ens.resolve_weight(ens.Ginibre(3, 0.5))
    a = kern.kernel_convolved(w2, kern.kernel_convolved(w1, inner))
    b = kern.kernel_convolved(convolve(w1, w2), inner)
    t1, t2 = np.random.default_rng(3).uniform(-np.pi, np.pi, (2, 50))
    assert np.abs(a.kernel(t1, t2) - b.kernel(t1, t2)).max() < 1e-12


# ---------------------------------------------------------------- grids

def test_kernel_grid_csv(tmp_path):
    w = ens.resolve_weight(ens.Jacobi(2, 1.5, 0.3))
    th = trapezoid(8)
    g = kern.kernel_grid(kern.PolyaKernel(w), th, th, "series", {"spec": {"type": "Jacobi"}})
    p = tmp_path / "k.csv"
    g.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "# method: series"
    assert lines[1].startswith("# spec: ")
    rows = list(csv.reader(lines[2:]))
    assert rows[0] == ["theta1", "theta2", "re_K", "im_K"]
    assert len(rows) == 1 + 64
    v = complex(float(rows[1 + 8 + 2][2]), float(rows[1 + 8 + 2][3]))
    assert v == g.K[1, 2]           # 17 significant digits round-trip exactly
    g.to_csv(tmp_path / "k2.csv")
    assert (tmp_path / "k2.csv").read_bytes() == p.read_bytes()


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_haar_kernel_symmetry(a, b):
    v = kern.cue_kernel(5, a, b)
    assert abs(v - np.conj(kern.cue_kernel(5, b, a))) < 1e-12
