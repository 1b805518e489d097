import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from hillspec.errors import PreconditionError
from hillspec.monodromy import (
    PotentialParams,
    discriminant_identity_check,
    fundamental_values,
    hill_discriminant,
    integrate_monodromy,
)

# theta, theta', phi, phi' at pi for a=b=1, lambda=0 (cross-checked below against DOP853)
PINNED_A1_L0 = (-1.4166952481719433, -2.941916011354341, -0.34230257502469297, -1.4166952481719444)


def dop853_values(p, lam):
    """Independent oracle: fundamental system by scipy's DOP853 at tight tolerance."""
    def rhs(x, y):
        q = p.a * cmath.exp(-2j * x) + p.b * cmath.exp(2j * x)
        return [y[1], (q - lam) * y[0], y[3], (q - lam) * y[2]]
    sol = solve_ivp(rhs, (0, math.pi), [1 + 0j, 0j, 0j, 1 + 0j], method="DOP853",
                    rtol=1e-13, atol=1e-14)
    return sol.y[:, -1]


class TestFundamentalValues:
    def test_free_lambda_one(self):
        v = fundamental_values(PotentialParams(0), 1.0, 0)[0]
        np.testing.assert_allclose(v, [-1, 0, 0, -1], atol=1e-13)

    def test_free_lambda_zero(self):
        v = fundamental_values(PotentialParams(0), 0.0, 0)[0]
        np.testing.assert_allclose(v, [1, 0, math.pi, 1], atol=1e-13)

    def test_pinned_against_gbs(self):
        p = PotentialParams(1)
        t = fundamental_values(p, 0.0, 0)[0]
        g = fundamental_values(p, 0.0, 0, method="gbs")[0]
        np.testing.assert_allclose(t, PINNED_A1_L0, rtol=0, atol=1e-12)
        np.testing.assert_allclose(g, PINNED_A1_L0, rtol=0, atol=1e-10)

    @pytest.mark.parametrize("a,b,lam", [(1, 1, 0), (1 + 1j, 1 + 1j, 3 - 2j), (2, 0.5j, 20 + 1j),
                                         (3j, 1, -4)])
    def test_against_dop853(self, a, b, lam):
        p = PotentialParams(a, b)
        ours = fundamental_values(p, lam, 0)[0]
        ref = dop853_values(p, lam)
        np.testing.assert_allclose(ours, ref, rtol=1e-9, atol=1e-9)

    def test_shape_and_batch(self):
        lam = np.linspace(0, 10, 6).reshape(2, 3) + 0.5j
        v = fundamental_values(PotentialParams(1), lam, 2)
        assert v.shape == (2, 3, 3, 4)
        single = fundamental_values(PotentialParams(1), lam[1, 2], 2)
        assert single.shape == (3, 4)
        np.testing.assert_allclose(v[1, 2], single, rtol=1e-13)

    @pytest.mark.parametrize("k", [1, 2])
    def test_lambda_derivatives_by_differences(self, k):
        p = PotentialParams(1 + 0.5j)
        lam, h = 5 + 1j, 1e-3
        d = fundamental_values(p, np.array([lam - h, lam, lam + h]), 0)[:, 0]
        fd = (d[2] - d[0]) / (2 * h) if k == 1 else (d[2] - 2 * d[1] + d[0]) / h ** 2
        exact = fundamental_values(p, lam, 2)[k]
        np.testing.assert_allclose(exact, fd, rtol=1e-5, atol=1e-6)

    def test_bad_method(self):
        with pytest.raises(ValueError):
            fundamental_values(PotentialParams(1), 0.0, method="rk4")


class TestDiscriminant:
    @pytest.mark.parametrize("lam,F", [(1, -2), (4, 2), (2, 2 * math.cos(math.pi * math.sqrt(2)))])
    def test_free(self, lam, F):
        assert hill_discriminant(PotentialParams(0), lam) == pytest.approx(F, abs=1e-12)

    @pytest.mark.parametrize("ab,cd", [((2, 2), (4, 1)), ((3j, 1), (1, 3j)),
                                       ((1 + 1j, 2), (2j, 1 - 1j))])
    def test_product_invariance(self, ab, cd):
        lam = 3 + 2j
        F1 = hill_discriminant(PotentialParams(*ab), lam)
        F2 = hill_discriminant(PotentialParams(*cd), lam)
        assert abs(F1 - F2) <= 1e-8

    def test_array_input(self):
        F = hill_discriminant(PotentialParams(0), np.array([1.0, 4.0, 9.0]))
        np.testing.assert_allclose(F, [-2, 2, -2], atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(re=st.floats(-5, 50), im=st.floats(-5, 5), ar=st.floats(-3, 3), ai=st.floats(-3, 3))
    def test_wronskian_and_evenness(self, re, im, ar, ai):
        m = integrate_monodromy(PotentialParams(complex(ar, ai)), complex(re, im))
        scale = max(1.0, abs(m.theta_pi), abs(m.phi_prime_pi)) ** 2
        assert abs(m.wronskian - 1) <= 1e-10 * scale
        assert abs(m.theta_pi - m.phi_prime_pi) <= 1e-10 * math.sqrt(scale)

    def test_discriminant_derivative(self):
        m = integrate_monodromy(PotentialParams(1), 2.5, order=1)
        h = 1e-5
        F = hill_discriminant(PotentialParams(1), np.array([2.5 - h, 2.5 + h]))
        assert m.discriminant_derivative() == pytest.approx((F[1] - F[0]) / (2 * h), rel=1e-6)


class TestIdentity:
    def test_free(self):
        rep = discriminant_identity_check(PotentialParams(0), 2.0)
        assert rep.lhs == pytest.approx(4 * math.cos(math.pi * math.sqrt(2)) ** 2 - 4)
        assert rep.ok

    def test_complex_point(self):
        assert discriminant_identity_check(PotentialParams(1), 1 + 1j).ok

    def test_grid_at_threshold(self):
        re, im = np.meshgrid(np.linspace(0, 50, 11), np.linspace(-5, 5, 5))
        rep = discriminant_identity_check(PotentialParams(8 / math.sqrt(6)), re + 1j * im)
        assert rep.max_deviation <= 1e-8

    def test_requires_even(self):
        with pytest.raises(PreconditionError):
            discriminant_identity_check(PotentialParams(1, 2), 0)


class TestPotentialParams:
    def test_defaults(self):
        p = PotentialParams(2)
        assert p.b == 2 and p.is_even and p.effective_a == 2

    def test_effective_a(self):
        c = PotentialParams(4, 1).effective_a
        assert c * c == pytest.approx(4)

    def test_rejects_non_numeric(self):
        with pytest.raises((TypeError, ValueError)):
            PotentialParams("x")
