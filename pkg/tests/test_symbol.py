import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dixtrace.errors import (ConfigError, DomainError, SizeError,
                             SpectrumFormatError, TableLookupError)
from dixtrace.geometry import Geometry, enumerate_dual
from dixtrace.symbol import (BesselPotential, ClassOneMask, DiagonalTable,
                             FullMatrixTable, ModulusWeight, PowerOfEigenvalue,
                             RadialWeight, Scaled, SymbolSum,
                             _jacobi_singular_values, eval_symbol,
                             is_radial_scalar, nuclear_trace_abs,
                             parse_complex, parse_symbol, scalar_values,
                             singular_values)


def random_matrix(seed, d, hermitian=False):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    if hermitian:
        m = 0.5 * (m + m.conj().T)
    return m.astype(np.complex128)


# ---------------------------------------------------------------------------
# Singular values: the hand-written Jacobi sweep against LAPACK
# ---------------------------------------------------------------------------

@given(st.integers(0, 10_000), st.integers(1, 8))
@settings(max_examples=80, deadline=None)
def test_jacobi_matches_lapack(seed, d):
    m = random_matrix(seed, d)
    ours = np.sort(_jacobi_singular_values(m, None))[::-1]
    ref = np.linalg.svd(m, compute_uv=False)
    scale = max(1.0, float(ref[0]))
    assert np.allclose(ours, ref, rtol=1e-10, atol=1e-10 * scale)


@given(st.integers(0, 10_000), st.integers(2, 6))
@settings(max_examples=40, deadline=None)
def test_jacobi_on_rank_deficient(seed, d):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(d, 1)) + 1j * rng.normal(size=(d, 1))
    v = rng.normal(size=(1, d)) + 1j * rng.normal(size=(1, d))
    m = (u @ v).astype(np.complex128)
    ours = np.sort(_jacobi_singular_values(m, None))[::-1]
    ref = np.linalg.svd(m, compute_uv=False)
    assert np.allclose(ours, ref, rtol=1e-9, atol=1e-9 * max(1.0, ref[0]))


@given(st.integers(0, 10_000), st.integers(1, 8))
@settings(max_examples=40, deadline=None)
def test_hermitian_route_matches_lapack(seed, d):
    m = random_matrix(seed, d, hermitian=True)
    ours = np.sort(singular_values(m))[::-1]
    ref = np.linalg.svd(m, compute_uv=False)
    assert np.allclose(ours, ref, rtol=1e-11, atol=1e-11 * max(1.0, ref[0]))


def test_exact_diagonal_route():
    m = np.diag([3.0, -1.0 + 0j, 0.5j])
    s = singular_values(m)
    assert list(s) == [3.0, 1.0, 0.5]  # exact, no rounding


def test_scalar_identity_is_exact():
    c = 3.7 - 0.2j
    m = c * np.eye(5, dtype=np.complex128)
    assert nuclear_trace_abs(m) == 5 * abs(c)


@given(st.integers(0, 10_000), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_nuclear_subadditivity(seed, d):
    a = random_matrix(seed, d)
    b = random_matrix(seed + 1, d)
    na, nb = nuclear_trace_abs(a), nuclear_trace_abs(b)
    nab = nuclear_trace_abs(a + b)
    assert nab <= na + nb + 1e-9 * (na + nb + 1.0)


@given(st.integers(0, 10_000), st.integers(1, 6),
       st.floats(min_value=-8, max_value=8))
@settings(max_examples=40, deadline=None)
def test_nuclear_homogeneity(seed, d, c):
    a = random_matrix(seed, d)
    assert nuclear_trace_abs(c * a) == pytest.approx(abs(c) * nuclear_trace_abs(a),
                                                     rel=1e-10, abs=1e-12)


@given(st.integers(0, 10_000), st.integers(2, 6))
@settings(max_examples=30, deadline=None)
def test_unitary_invariance(seed, d):
    a = random_matrix(seed, d)
    q1, _ = np.linalg.qr(random_matrix(seed + 7, d))
    q2, _ = np.linalg.qr(random_matrix(seed + 13, d))
    s0 = np.sort(singular_values(a))
    s1 = np.sort(singular_values(q1 @ a @ q2))
    assert np.allclose(s0, s1, rtol=1e-9, atol=1e-9 * max(1.0, s0[-1]))


# ---------------------------------------------------------------------------
# Evaluation and masking
# ---------------------------------------------------------------------------

def point_of(geom, want_label):
    for p in enumerate_dual(geom, 50.0):
        if p.label == want_label:
            return p
    raise AssertionError("label not found")


def test_eval_radial_on_group_point():
    g = Geometry.su2()
    p = point_of(g, (3,))  # d = 4, lambda = 15/4
    m = eval_symbol(RadialWeight(2.0), p, g)
    expect = (1.0 + 15.0 / 4.0) ** -1.0
    assert m.shape == (4, 4)
    assert np.allclose(np.diag(m), expect)
    assert np.count_nonzero(m - np.diag(np.diag(m))) == 0


def test_mask_zeroes_outside_class_one_block():
    g = Geometry.sphere(2)
    p = point_of(g, (2,))  # d = 5, k = 1
    m = eval_symbol(ClassOneMask(RadialWeight(2.0)), p, g)
    assert m[0, 0] != 0
    assert np.count_nonzero(m) == 1
    # same through the masked flag
    m2 = eval_symbol(RadialWeight(2.0), p, g, masked=True)
    assert np.array_equal(m, m2)


def test_scalar_values_semantics():
    g = Geometry.torus(1)
    lam = np.array([0.0, 3.0, 99.0])
    np.testing.assert_allclose(scalar_values(RadialWeight(1.0), lam, g),
                               (1.0 + lam) ** -0.5)
    np.testing.assert_allclose(scalar_values(BesselPotential(3.0, 2.0), lam, g),
                               (1.0 + lam) ** -1.5)
    np.testing.assert_allclose(scalar_values(ModulusWeight(0.5), lam, g),
                               (1.0 + np.sqrt(lam)) ** -0.5)
    np.testing.assert_allclose(
        scalar_values(PowerOfEigenvalue(1.0, shift=1.0), lam, g),
        (1.0 + lam) ** -1.0)
    with pytest.raises(DomainError):
        scalar_values(PowerOfEigenvalue(1.0), lam, g)  # hits 1/0 at lam = 0


def test_sum_and_scale_compose():
    g = Geometry.torus(1)
    lam = np.array([1.0, 7.0])
    spec = SymbolSum([Scaled(2.0, RadialWeight(1.0)), RadialWeight(3.0)])
    got = scalar_values(spec, lam, g)
    want = 2.0 * (1 + lam) ** -0.5 + (1 + lam) ** -1.5
    np.testing.assert_allclose(got, want, rtol=1e-15)
    assert is_radial_scalar(spec)
    assert not is_radial_scalar(ClassOneMask(spec))


# ---------------------------------------------------------------------------
# parse_symbol / parse_complex
# ---------------------------------------------------------------------------

def test_parse_symbol_forms():
    assert parse_symbol("radial:2") == RadialWeight(2.0)
    assert parse_symbol("bessel:3:2") == BesselPotential(3.0, 2.0)
    assert parse_symbol("bessel:3") == BesselPotential(3.0, 2.0)
    assert parse_symbol("power:1.5:0.25") == PowerOfEigenvalue(1.5, 0.25)
    assert parse_symbol("modulus:0.75") == ModulusWeight(0.75)
    assert parse_symbol("scaled:2:radial:1") == Scaled(2.0, RadialWeight(1.0))
    assert parse_symbol("mask:radial:1") == ClassOneMask(RadialWeight(1.0))
    with pytest.raises(ConfigError):
        parse_symbol("radial:abc")
    with pytest.raises(ConfigError):
        parse_symbol("spherical:1")


def test_parse_complex_accepts_i_and_j():
    assert parse_complex("3") == 3.0
    assert parse_complex("-2.5") == -2.5
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("1-0.5j") == 1 - 0.5j
    assert parse_complex("2i") == 2j
    with pytest.raises(SpectrumFormatError):
        parse_complex("one")


# ---------------------------------------------------------------------------
# Symbol tables
# ---------------------------------------------------------------------------

def test_diagonal_table_round_trip(tmp_path):
    path = tmp_path / "diag.txt"
    path.write_text("# per-label diagonals\n0\n1.0\n1\n0.5 0.5\n2\n0.25 0.25 0.25\n")
    g = Geometry.su2()
    spec = DiagonalTable(str(path))
    p = point_of(g, (1,))
    m = eval_symbol(spec, p, g)
    assert np.allclose(np.diag(m), 0.5)


def test_diagonal_table_accepts_square_form(tmp_path):
    path = tmp_path / "diag.txt"
    path.write_text("1\n0.5 0\n0 0.5\n")
    spec = DiagonalTable(str(path))
    assert np.allclose(spec.entries["1"], [0.5, 0.5])
    bad = tmp_path / "bad.txt"
    bad.write_text("1\n0.5 0.1\n0 0.5\n")
    with pytest.raises(SpectrumFormatError):
        DiagonalTable(str(bad))


def test_full_table_and_errors(tmp_path):
    path = tmp_path / "mat.txt"
    path.write_text("1\n1 1i\n0 1\n")
    g = Geometry.su2()
    spec = FullMatrixTable(str(path))
    p = point_of(g, (1,))
    m = eval_symbol(spec, p, g)
    assert m[0, 1] == 1j
    with pytest.raises(TableLookupError):
        eval_symbol(spec, point_of(g, (2,)), g)
    short = tmp_path / "short.txt"
    short.write_text("2\n1 0\n0 1\n")  # 2x2 block for a rep_dim-3 point
    with pytest.raises(SizeError):
        eval_symbol(FullMatrixTable(str(short)), point_of(g, (2,)), g)
    with pytest.raises(ConfigError):
        DiagonalTable(str(tmp_path / "missing.txt"))


def test_table_rejects_non_finite(tmp_path):
    path = tmp_path / "nan.txt"
    path.write_text("0\nnan\n")
    g = Geometry.su2()
    spec = DiagonalTable(str(path))
    with pytest.raises(DomainError):
        eval_symbol(spec, point_of(g, (0,)), g)


def test_truncated_matrix_table(tmp_path):
    path = tmp_path / "trunc.txt"
    path.write_text("1\n1 0\n")
    with pytest.raises(SpectrumFormatError):
        FullMatrixTable(str(path))
