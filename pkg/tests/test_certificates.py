import json
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, strategies as st

from hillspec import certificates as cert
from hillspec.certificates import (
    ALL_IDS,
    CHAIN_DEPENDENCIES,
    ENCLOSURE_WIDTH,
    Interval,
    Monomial,
    SurdEnclosure,
    certify_all,
    certify_chain,
    certify_estimation,
    certify_iteration_bound,
)
from hillspec.errors import DependencyError

mpmath.mp.dps = 50


def mp_value(m: Monomial):
    """Independent high-precision evaluation of a surd monomial."""
    v = mpmath.mpf(m.coefficient.numerator) / m.coefficient.denominator
    for n, e in m.surds:
        v *= mpmath.sqrt(n) ** e
    return v


class TestSurdEnclosure:
    @pytest.mark.parametrize("n", [2, 5, 6, 7, 10])
    def test_encloses_and_is_narrow(self, n):
        enc = SurdEnclosure.of(n)
        assert enc.lower ** 2 < n < enc.upper ** 2
        assert enc.upper - enc.lower <= ENCLOSURE_WIDTH

    def test_perfect_square_rejected(self):
        with pytest.raises(ValueError):
            SurdEnclosure.of(9)

    def test_decimal_must_enclose(self):
        with pytest.raises(ValueError):
            SurdEnclosure.decimal(6, "2.4495", "2.45")

    @given(st.integers(2, 10 ** 6).filter(lambda n: int(n ** 0.5 + 0.5) ** 2 != n))
    def test_property(self, n):
        enc = SurdEnclosure.of(n)
        assert enc.lower ** 2 <= n <= enc.upper ** 2


class TestMonomial:
    def test_even_powers_are_rational(self):
        m = Monomial.of(3, s6=-2) * Monomial.of(2, s2=4)
        iv = m.evaluate()
        assert iv.exact and iv.lo == F(3, 6) * 2 * 4

    @given(st.integers(-5, 5), st.integers(-3, 3))
    def test_enclosure_contains_true_value(self, e6, e2):
        m = Monomial.of(F(7, 3), s6=e6, s2=e2)
        iv = m.evaluate()
        v = mp_value(m)
        eps = mpmath.mpf(10) ** -45 * v
        assert mpmath.mpf(iv.lo.numerator) / iv.lo.denominator <= v + eps
        assert v - eps <= mpmath.mpf(iv.hi.numerator) / iv.hi.denominator


class TestEstimations:
    def test_est1_bit_exact(self):
        c = certify_estimation("Est1")
        assert c.computed.exact
        assert c.computed.lo == F(128, 3267) + F(32, 243) + F(1, 6) == F(19849, 58806)
        assert c.verdict and c.matches_printed

    def test_est5_bit_exact(self):
        c = certify_estimation("Est5")
        assert c.computed.lo == F(25, 484) + F(1, 4) + F(25, 324) + F(25, 729) == F(145759, 352836)
        assert c.verdict and c.matches_printed

    def test_est8_consistent_denominator(self):
        c = certify_estimation("Est8")
        assert c.computed.lo == F(25, 2704) + F(25, 576) + F(25, 1936) == F(772225, 11778624)
        assert c.verdict and c.matches_printed is False

    def test_est3_tight_margin(self):
        c = certify_estimation("Est3")
        assert c.verdict
        assert 0 < c.margin < F(1, 10 ** 5)

    def test_est3_fails_with_widened_surds(self):
        wide = {6: SurdEnclosure.decimal(6, "2.4494", "2.4495"),
                2: SurdEnclosure.decimal(2, "1.4142", "1.4143")}
        c = certify_estimation("Est3", enclosures=wide)
        assert not c.verdict

    def test_est9_all_rational(self):
        c = certify_iteration_bound("Est9")
        ref = (F(5, 24) + F(125, 52 * 576) + F(4 * 5 ** 5, 52 ** 2 * 24 ** 3)
               + F(8 * 5 ** 5, 88 * 52 ** 2 * 24 ** 2))
        assert c.computed.exact and c.computed.lo == ref
        assert c.verdict and c.claimed_bound == F(2131, 10000)

    @pytest.mark.parametrize("id_", cert.ESTIMATIONS)
    def test_terms_agree_with_mpmath(self, id_):
        spec = cert._SPECS[id_]
        total = sum(mp_value(t.value) for t in spec.terms)
        c = certify_estimation(id_)
        lo, hi = c.computed_lower, c.computed_upper
        assert mpmath.mpf(lo.numerator) / lo.denominator <= total + mpmath.mpf(10) ** -40
        assert total <= mpmath.mpf(hi.numerator) / hi.denominator + mpmath.mpf(10) ** -40
        assert c.verdict

    def test_est4_value(self):
        c = certify_iteration_bound("Est4")
        assert float(c.computed_upper) == pytest.approx(0.17431483, abs=1e-8)
        assert c.computed_upper < F(17432, 100000)

    def test_iteration_bound_rejects_other_ids(self):
        with pytest.raises(KeyError):
            certify_iteration_bound("Est1")

    def test_unknown_id(self):
        with pytest.raises(KeyError):
            certify_estimation("Est13")

    def test_reproducible_json(self):
        assert certify_estimation("Est3").to_json() == certify_estimation("Est3").to_json()
        d = json.loads(certify_estimation("Est1").to_json())
        assert (d["computed_lower"]["numerator"], d["computed_lower"]["denominator"]) == ("19849", "58806")

    def test_substitution_mode_widens(self):
        m = Monomial.of(1, s6=2)
        assert m.evaluate().exact
        assert not m.evaluate({}).exact


class TestChains:
    @pytest.mark.parametrize("id_", cert.CHAINS)
    def test_chain_verifies(self, id_):
        deps = {d: certify_estimation(d) for d in CHAIN_DEPENDENCIES[id_]}
        c = certify_chain(id_, deps)
        assert c.verdict and all(s.holds for s in c.steps)

    def test_t13_against_sqrt6(self):
        deps = {d: certify_estimation(d) for d in CHAIN_DEPENDENCIES["ChainT13"]}
        c = certify_chain("ChainT13", deps)
        assert mpmath.sqrt(5) + mpmath.mpf("0.17432") + mpmath.mpf("0.002") < mpmath.sqrt(6)
        assert c.computed_upper < SurdEnclosure.of(6).lower

    def test_t14_exact(self):
        deps = {d: certify_estimation(d) for d in CHAIN_DEPENDENCIES["ChainT14"]}
        c = certify_chain("ChainT14", deps)
        assert c.computed.lo == F(22231, 10000) and c.claimed_bound == F(12, 5)

    def test_t15_value(self):
        deps = {d: certify_estimation(d) for d in CHAIN_DEPENDENCIES["ChainT15"]}
        c = certify_chain("ChainT15", deps)
        ref = mpmath.sqrt(2) * mpmath.mpf("2.0006") + mpmath.mpf("0.10301")
        assert float(c.computed_upper) == pytest.approx(float(ref), abs=1e-11)

    def test_missing_dependency(self):
        with pytest.raises(DependencyError):
            certify_chain("ChainT14", {})

    def test_failed_dependency(self):
        deps = {d: certify_estimation(d) for d in CHAIN_DEPENDENCIES["ChainT13"]}
        wide = {6: SurdEnclosure.decimal(6, "2.4494", "2.4495"),
                2: SurdEnclosure.decimal(2, "1.4142", "1.4143")}
        deps["Est3"] = certify_estimation("Est3", enclosures=wide)
        with pytest.raises(DependencyError):
            certify_chain("ChainT13", deps)

    def test_certify_all(self):
        res = certify_all()
        assert list(res) == list(ALL_IDS) and len(res) == 15
        assert all(c.verdict for c in res.values())


def test_interval_addition():
    s = Interval.point(F(1, 3)) + Interval(F(1, 4), F(1, 2))
    assert (s.lo, s.hi) == (F(7, 12), F(5, 6))
