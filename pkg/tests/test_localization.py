import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hillspec.errors import ContainmentViolation, DegenerateParameterError, PreconditionError
from hillspec.localization import (
    SQRT2,
    Disk,
    containment_check,
    default_n_max,
    disks_for,
    localize,
    modulus_squared,
    simplicity_condition,
    threshold_report,
)
from hillspec.monodromy import PotentialParams
from hillspec.recurrence import family_spectrum

A13 = 8 / math.sqrt(6)


class TestDisks:
    def test_antiperiodic_first_disk(self):
        d = disks_for("antiperiodic", A13, 3)[0]
        assert d.center == 1 and d.radius == pytest.approx(16 / math.sqrt(6))
        assert d.label == "D_1"

    def test_pn_radii(self):
        a = 4 / 3
        disks = {d.label: d for d in disks_for("PN", a, 2)}
        assert disks["A_0"].radius == pytest.approx(4 * math.sqrt(2) / 3)
        assert disks["A_1"].radius == pytest.approx(4 * (1 + math.sqrt(2)) / 3)
        assert disks["A_1"].center == 4

    def test_pd_labels(self):
        assert [d.label for d in disks_for("PD", 1 + 1j, 3)] == ["B", "B_2", "B_3"]

    def test_periodic_union(self):
        assert [d.label for d in disks_for("periodic", 1, 3)] == ["A_0", "B", "A_1", "B_2", "B_3"]

    def test_zero_a(self):
        with pytest.raises(DegenerateParameterError):
            disks_for("antiperiodic", 0, 3)

    def test_disk_contains(self):
        d = Disk(1 + 0j, 2.0, "D_1")
        assert d.contains(3) and not d.contains(3.1) and d.contains(3 + 1e-10, slack=1e-9)

    def test_default_n_max(self):
        n = default_n_max(100, 2)
        assert (2 * n - 1) ** 2 <= 104 < (2 * n + 1) ** 2


class TestContainment:
    @pytest.mark.parametrize("a", [1, A13 * 1j, 0.5 - 2j])
    def test_antiperiodic_sections_covered(self, a):
        # section eigenvalues are an independent source of points
        pts = np.concatenate([family_spectrum(f, a, 100) for f in ("AD", "AN")])
        rep = containment_check(pts, disks_for("antiperiodic", a, default_n_max(100, a)))
        assert rep.ok

    def test_perturbative_margin(self):
        a = 0.01
        pts = family_spectrum("AN", a, 100)
        rep = containment_check(pts, disks_for("AN", a, 6))
        # the ground mode moves by a at first order, the others by O(a^2)
        first, *rest = rep.coverage
        assert first.margin == pytest.approx(first.disk.radius / 2, abs=1e-4)
        for c in rest:
            assert c.margin == pytest.approx(c.disk.radius, abs=1e-4)

    def test_violation_raises(self):
        with pytest.raises(ContainmentViolation) as exc:
            containment_check([50 + 0j], [Disk(1 + 0j, 1.0, "D_1")])
        assert exc.value.points == [50 + 0j]

    def test_violation_report(self):
        rep = containment_check([50 + 0j], [Disk(1 + 0j, 1.0, "D_1")], raise_on_violation=False)
        assert not rep.ok and rep.uncovered == [50 + 0j]

    @pytest.mark.parametrize("bc", ["antiperiodic", "periodic"])
    def test_localize_shooting(self, bc):
        res = localize(PotentialParams(1 + 1j), bc, 40)
        assert res.report.ok and len(res.points) > 0

    def test_localize_pair_periodic(self):
        res = localize(PotentialParams(4, 1), "periodic", 60)
        assert res.report.ok

    def test_localize_pair_dirichlet_rejected(self):
        with pytest.raises(PreconditionError):
            localize(PotentialParams(4, 1), "dirichlet", 30)


class TestSimplicity:
    def test_antiperiodic_third_disk_at_threshold(self):
        assert simplicity_condition("antiperiodic", A13, 3)

    def test_periodic_fourth_disk_at_five(self):
        assert simplicity_condition("periodic", 5, 4)

    def test_fails_for_large_a(self):
        assert not simplicity_condition("antiperiodic", 100, 2)

    def test_periodic_first_disk_never(self):
        assert not simplicity_condition("periodic", 0.001, 1)

    @settings(max_examples=200)
    @given(st.floats(0.01, 40), st.integers(1, 30))
    def test_matches_float_away_from_boundary(self, r, n):
        margin = 4 * n - 4 - (1 + SQRT2) * r
        if abs(margin) > 1e-9:
            assert simplicity_condition("AN", r, n) == (margin > 0)

    def test_exact_boundary(self):
        # 4n-4 = (1+sqrt2)|a| has no rational solution; test the sharp side with |a|^2 exact
        m = F(64, 6)
        assert simplicity_condition("AD", 0, 3, abs_squared=m)
        assert not simplicity_condition("AD", 0, 2, abs_squared=m)


class TestThresholds:
    def test_unit(self):
        assert threshold_report(1).guarantees == {"A": True, "D": True, "P": True, "N": True}

    def test_pair(self):
        rep = threshold_report(4, 2)
        assert rep.pair and rep.modulus_squared == 64
        assert rep.applies("A") and not rep.applies("P")

    def test_large(self):
        assert not any(threshold_report(10).guarantees.values())

    def test_zero(self):
        assert not any(threshold_report(0).guarantees.values())

    def test_boundaries_inclusive(self):
        assert threshold_report(0, abs_squared=F(64, 6)).applies("A")
        assert not threshold_report(0, abs_squared=F(64, 6) + F(1, 10 ** 30)).applies("A")
        assert threshold_report(0, abs_squared=F(16, 9)).applies("P")

    def test_float_threshold_read_exactly(self):
        m = modulus_squared(4 / 3)
        assert m == F(4 / 3) ** 2 and m != F(16, 9)
