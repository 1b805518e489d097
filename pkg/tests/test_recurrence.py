import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import mathieu_a, mathieu_b

from hillspec.errors import (
    DivisionGuardError,
    InvalidTruncationError,
    NoEigenvectorError,
)
from hillspec.recurrence import (
    SymmetryClass,
    build_tridiagonal,
    coefficient_sequence,
    family_spectrum,
    self_orthogonality,
    sort_spectrum,
    tail_bound_check,
    truncated_spectrum,
    truncation_order,
)

# scipy's characteristic values solve y'' + (lambda - 2q cos 2x) y = 0: q plays the role of a
SCIPY_ORACLE = {
    SymmetryClass.PN: (mathieu_a, 0),
    SymmetryClass.PD: (mathieu_b, 2),
    SymmetryClass.AN: (mathieu_a, 1),
    SymmetryClass.AD: (mathieu_b, 1),
}


def galerkin_matrix(cls, a, N):
    """Projection of -d^2 + 2a cos 2x on the normalised parity basis, by quadrature."""
    def basis(k):
        m = 2 * (k + cls.first_index) if cls.periodic else 2 * (k + 1) - 1
        if cls.dirichlet:
            return m, (lambda x: math.sin(m * x))
        if m == 0:
            return m, (lambda x: 1 / math.sqrt(2))
        return m, (lambda x: math.cos(m * x))

    M = np.zeros((N, N), dtype=complex)
    for j in range(N):
        mj, fj = basis(j)
        M[j, j] += mj * mj
        for k in range(max(0, j - 1), min(N, j + 2)):
            _, fk = basis(k)
            val = quad(lambda x: fj(x) * 2 * math.cos(2 * x) * fk(x), 0, math.pi, limit=200)[0]
            M[j, k] += a * 2 / math.pi * val
    return M


class TestBuildTridiagonal:
    def test_an_decoupled(self):
        op = build_tridiagonal("AN", 0, 3)
        np.testing.assert_array_equal(op.diagonal, [1, 9, 25])
        np.testing.assert_array_equal(op.offdiagonal, [0, 0])

    def test_pn_leading_coupling(self):
        op = build_tridiagonal(SymmetryClass.PN, 2, 3)
        np.testing.assert_array_equal(op.diagonal, [0, 4, 16])
        np.testing.assert_allclose(op.offdiagonal, [2 * math.sqrt(2), 2])

    def test_ad_ground_sign(self):
        op = build_tridiagonal("AD", 1, 3)
        np.testing.assert_array_equal(op.diagonal, [0, 9, 25])
        np.testing.assert_array_equal(op.offdiagonal, [1, 1])

    def test_pd_diagonal(self):
        op = build_tridiagonal("PD", 0.5j, 4)
        np.testing.assert_array_equal(op.diagonal, [4, 16, 36, 64])
        assert np.all(op.offdiagonal == 0.5j)

    @pytest.mark.parametrize("cls", list(SymmetryClass))
    def test_complex_symmetric(self, cls):
        T = build_tridiagonal(cls, 1 + 2j, 6).to_dense()
        np.testing.assert_array_equal(T, T.T)

    @pytest.mark.parametrize("cls", list(SymmetryClass))
    def test_matches_quadrature_projection(self, cls):
        N = 5
        M = galerkin_matrix(cls, 0.7, N)
        np.testing.assert_allclose(build_tridiagonal(cls, 0.7, N).to_dense(), M, atol=1e-10)

    @pytest.mark.parametrize("N", [0, 1, -3])
    def test_bad_truncation(self, N):
        with pytest.raises(InvalidTruncationError):
            build_tridiagonal("PN", 1, N)

    def test_non_integer_truncation(self):
        with pytest.raises(TypeError):
            build_tridiagonal("PN", 1, 4.0)


class TestTruncatedSpectrum:
    def test_free_an(self):
        np.testing.assert_allclose(truncated_spectrum(build_tridiagonal("AN", 0, 5)),
                                   [1, 9, 25, 49, 81])

    def test_free_pn(self):
        np.testing.assert_allclose(truncated_spectrum(build_tridiagonal("PN", 0, 4)),
                                   [0, 4, 16, 36])

    def test_an_half_pinned_by_dense_oracle(self):
        small = truncated_spectrum(build_tridiagonal("AN", 0.5, 24))[0]
        dense = np.linalg.eigvals(build_tridiagonal("AN", 0.5, 64).to_dense())
        ref = dense[np.argmin(dense.real)]
        assert abs(small - ref) <= 1e-12
        assert small == pytest.approx(1.4667668425160572, abs=1e-12)

    @pytest.mark.parametrize("cls", list(SymmetryClass))
    @pytest.mark.parametrize("a", [0.3, 1.3, 4.0])
    def test_real_a_matches_scipy_mathieu(self, cls, a):
        func, m0 = SCIPY_ORACLE[cls]
        w = truncated_spectrum(build_tridiagonal(cls, a, 40))
        ref = [func(m0 + 2 * k, a) for k in range(4)]
        np.testing.assert_allclose(w[:4].real, ref, rtol=0, atol=1e-8)
        assert np.all(np.abs(w[:4].imag) < 1e-12)

    @pytest.mark.parametrize("cls", list(SymmetryClass))
    def test_finite_section_stability(self, cls):
        a = 8 / math.sqrt(6) * np.exp(1j * math.pi / 4)
        N = truncation_order(a, 100)
        w1 = family_spectrum(cls, a, 100, N=N)
        w2 = family_spectrum(cls, a, 100, N=2 * N)
        assert len(w1) == len(w2)
        assert np.max(np.abs(w1 - w2)) <= 1e-9

    def test_sort_order_is_by_real_part(self):
        w = truncated_spectrum(build_tridiagonal("PN", 3j, 20))
        assert np.all(np.diff(w.real) >= -1e-12)

    def test_sort_spectrum_fuzz(self):
        s = sort_spectrum([2 + 1j, 1.0, 2 - 1j, 2 + 1e-14 - 2j])
        assert s[0] == 1.0
        np.testing.assert_array_equal(s[1:].imag, [-2, -1, 1])


class TestCoefficientSequence:
    def test_decoupled_an(self):
        seq = coefficient_sequence(build_tridiagonal("AN", 0, 6), 9)
        np.testing.assert_allclose(seq.values, [0, 1, 0, 0, 0, 0], atol=1e-14)
        assert self_orthogonality(seq) == pytest.approx(1)

    def test_decoupled_pn(self):
        seq = coefficient_sequence(build_tridiagonal("PN", 0, 6), 0)
        np.testing.assert_allclose(seq.values, [1, 0, 0, 0, 0, 0], atol=1e-14)

    def test_monotone_decay_past_first_index(self):
        op = build_tridiagonal("AN", 1, 30)
        lam = truncated_spectrum(op)[0]
        seq = coefficient_sequence(op, lam)
        mags = np.abs(seq.values)
        assert np.all(np.diff(mags[:20]) < 0)
        assert seq.residual <= 1e-10

    def test_not_an_eigenvalue(self):
        with pytest.raises(NoEigenvectorError):
            coefficient_sequence(build_tridiagonal("AN", 1, 10), 3.3)

    def test_normalised(self):
        op = build_tridiagonal("PD", 2 + 1j, 30)
        for lam in truncated_spectrum(op)[:4]:
            assert coefficient_sequence(op, lam).norm_squared == pytest.approx(1)

    @settings(max_examples=25, deadline=None)
    @given(a=st.floats(0.05, 5.0), k=st.integers(0, 3),
           cls=st.sampled_from(list(SymmetryClass)))
    def test_real_a_self_orthogonality_in_unit_interval(self, a, k, cls):
        op = build_tridiagonal(cls, a, 40)
        seq = coefficient_sequence(op, truncated_spectrum(op)[k])
        s = self_orthogonality(seq)
        assert abs(s.imag) < 1e-10
        assert 0 < s.real <= 1 + 1e-12


class TestTailBound:
    def test_an_smallest_tail(self):
        op = build_tridiagonal("AN", 1, 30)
        seq = coefficient_sequence(op, truncated_spectrum(op)[0])
        rep = tail_bound_check(seq, 1, 3)
        assert rep.holds and rep.margin > 0

    def test_free_case_trivial(self):
        seq = coefficient_sequence(build_tridiagonal("AN", 0, 8), 9)
        rep = tail_bound_check(seq, 0.0, [1, 3, 4])
        assert rep.lhs == 0 and rep.holds

    def test_threshold_set_holds(self):
        a = 8 / math.sqrt(6)
        op = build_tridiagonal("AN", a, 40)
        for lam in truncated_spectrum(op):
            if lam.real > 50:
                break
            seq = coefficient_sequence(op, lam)
            idx = [k for k in range(1, 41) if abs(lam - (2 * k - 1) ** 2) > 2 * math.sqrt(2) * a]
            assert tail_bound_check(seq, a, idx).holds

    def test_division_guard(self):
        seq = coefficient_sequence(build_tridiagonal("AN", 0, 8), 9)
        with pytest.raises(DivisionGuardError):
            tail_bound_check(seq, 0.0, [2])
