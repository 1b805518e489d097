"""Localization disks for A(a) and P(a) spectra and the simplicity thresholds.

Disks (all closed):

    D_n  |lambda - (2n-1)^2| <= 2|a|          antiperiodic, n >= 1
    B    |lambda - 4| <= |a|                  PD
    B_n  |lambda - (2n)^2| <= 2|a|            PD and PN, n >= 2
    A_0  |lambda| <= sqrt(2)|a|               PN
    A_1  |lambda - 4| <= (1 + sqrt(2))|a|     PN

Threshold comparisons are done on |a|^2 as an exact rational so that
boundary values such as |a|^2 = 32/3 are decided without rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from ._validation import as_complex, check_int
from .errors import ContainmentViolation, DegenerateParameterError, PreconditionError
from .monodromy import PotentialParams
from .recurrence import SymmetryClass
from .spectra import BoundaryCondition, SpectralPoint, locate_eigenvalues

SQRT2 = math.sqrt(2.0)
CONTAINMENT_SLACK = 1e-9

A_D_THRESHOLD_SQ = Fraction(64, 6)   # |a| <= 8/sqrt(6)
P_N_THRESHOLD_SQ = Fraction(16, 9)   # |a| <= 4/3


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float
    label: str

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError(f"disk radius must be >= 0, got {self.radius}")

    def margin(self, z: complex) -> float:
        """radius - distance; nonnegative iff ``z`` lies in the disk."""
        return self.radius - abs(complex(z) - self.center)

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return self.margin(z) >= -slack


def _family_key(family) -> str:
    if isinstance(family, SymmetryClass):
        return family.value
    if isinstance(family, BoundaryCondition):
        return family.value
    key = str(family)
    try:
        return SymmetryClass(key.upper()).value
    except ValueError:
        return BoundaryCondition.parse(key).value


def default_n_max(re_extent: float, a) -> int:
    """Smallest n with (2n+1)^2 > re_extent + 2|a|."""
    bound = float(re_extent) + 2.0 * abs(as_complex(a, "a"))
    n = 1
    while (2 * n + 1) ** 2 <= bound:
        n += 1
    return n


def disks_for(family, a, n_max: int) -> list[Disk]:
    """Disks covering the eigenvalues of one family or one operator.

    ``family`` is a SymmetryClass or a boundary condition: antiperiodic
    (and AD, AN) use D_1..D_nmax; PD uses B, B_2..B_nmax; PN uses A_0, A_1,
    B_2..B_nmax; periodic uses the union of the PD and PN disks.  Dirichlet
    and Neumann use the unions of their two families.
    """
    a = as_complex(a, "a")
    if a == 0:
        raise DegenerateParameterError("the localization disks assume a != 0")
    n_max = check_int(n_max, "n_max", minimum=1)
    r = abs(a)
    key = _family_key(family)

    def d_disks():
        return [Disk(complex((2 * n - 1) ** 2), 2 * r, f"D_{n}") for n in range(1, n_max + 1)]

    def b_disks():
        return [Disk(complex((2 * n) ** 2), 2 * r, f"B_{n}") for n in range(2, n_max + 1)]

    pd = [Disk(4 + 0j, r, "B")] + b_disks()
    pn = [Disk(0j, SQRT2 * r, "A_0"), Disk(4 + 0j, (1 + SQRT2) * r, "A_1")] + b_disks()
    if key in ("AD", "AN", "antiperiodic"):
        return d_disks()
    if key == "PD":
        return pd
    if key == "PN":
        return pn
    if key == "periodic":
        return [pn[0], pd[0], pn[1]] + b_disks()
    if key == "dirichlet":
        return pd + d_disks()
    if key == "neumann":
        return pn + d_disks()
    raise ValueError(f"no disk family for {family!r}")


@dataclass(frozen=True)
class Coverage:
    lam: complex
    disk: Disk | None
    margin: float

    @property
    def covered(self) -> bool:
        return self.disk is not None


@dataclass(frozen=True)
class ContainmentReport:
    coverage: tuple
    slack: float

    @property
    def ok(self) -> bool:
        return all(c.covered for c in self.coverage)

    @property
    def min_margin(self) -> float:
        return min((c.margin for c in self.coverage), default=math.inf)

    @property
    def uncovered(self) -> list:
        return [c.lam for c in self.coverage if not c.covered]


def containment_check(points: Iterable, disks: Sequence[Disk], *,
                      slack: float = CONTAINMENT_SLACK, raise_on_violation: bool = True
                      ) -> ContainmentReport:
    """Cover each eigenvalue by the disk with the largest margin.

    ``points`` may be SpectralPoints or plain complex numbers.  ``slack``
    absorbs the accuracy of the computed eigenvalues.
    """
    coverage = []
    for pt in points:
        lam = pt.lam if isinstance(pt, SpectralPoint) else complex(pt)
        best = max(disks, key=lambda d: d.margin(lam), default=None)
        margin = best.margin(lam) if best is not None else -math.inf
        coverage.append(Coverage(lam, best if margin >= -slack else None, margin))
    report = ContainmentReport(tuple(coverage), slack)
    if raise_on_violation and not report.ok:
        raise ContainmentViolation(
            f"{len(report.uncovered)} eigenvalue(s) outside every disk", report.uncovered)
    return report


def modulus_squared(z) -> Fraction:
    """|z|^2 as an exact rational of the binary floats (or Fractions) given."""
    if isinstance(z, (Fraction, int)):
        return Fraction(z) ** 2
    z = complex(z)
    return Fraction(z.real) ** 2 + Fraction(z.imag) ** 2


def _exceeds_surd_multiple(L: int, m: Fraction) -> bool:
    """L > (1 + sqrt 2) sqrt(m), decided exactly."""
    if L <= 0:
        return False
    # L - sqrt(m) > sqrt(2 m)  <=>  L^2 > m  and  (L^2 - m)^2 > 4 L^2 m  (after L^2 - m > 0)
    d = L * L - m
    return d > 0 and d * d > 4 * L * L * m


def simplicity_condition(family, a, n: int, *, abs_squared: Fraction | None = None) -> bool:
    """Whether the disk with index ``n`` is guaranteed to hold simple eigenvalues only.

    Antiperiodic families (D_n disks): 4n - 4 > (1 + sqrt 2)|a|.
    Periodic families (B_n disks): 4n - 2 > (1 + sqrt 2)|a| and n > 1.
    ``abs_squared`` overrides |a|^2 for exact inputs such as 32/3.
    """
    n = check_int(n, "n", minimum=1)
    m = modulus_squared(a) if abs_squared is None else Fraction(abs_squared)
    if m == 0:
        raise DegenerateParameterError("the simplicity conditions assume a != 0")
    key = _family_key(family)
    if key in ("AD", "AN", "antiperiodic"):
        return _exceeds_surd_multiple(4 * n - 4, m)
    if key in ("PD", "PN", "periodic"):
        return n > 1 and _exceeds_surd_multiple(4 * n - 2, m)
    raise ValueError(f"no simplicity condition for {family!r}")


@dataclass(frozen=True)
class ThresholdReport:
    a: complex
    b: complex | None
    modulus_squared: Fraction  # |a|^2 for an even potential, |ab|^2 for a pair
    guarantees: dict

    @property
    def pair(self) -> bool:
        return self.b is not None

    def applies(self, operator: str) -> bool:
        return bool(self.guarantees.get(operator, False))


def threshold_report(a, b=None, *, abs_squared: Fraction | None = None) -> ThresholdReport:
    """Which all-eigenvalues-simple guarantees hold for q = 2a cos 2x or for (a, b).

    Even potential: |a| <= 8/sqrt(6) gives A and D, |a| <= 4/3 gives P and N.
    Pair (a, b): P and A spectra depend on ab only, so |ab| <= 64/6 gives A
    and |ab| <= 16/9 gives P.  No guarantee holds at a = 0 (or ab = 0).
    For a pair, ``modulus_squared`` holds |ab|^2 and both thresholds are
    squared before comparison.
    """
    a = as_complex(a, "a")
    if b is None:
        m = modulus_squared(a) if abs_squared is None else Fraction(abs_squared)
        ad = 0 < m <= A_D_THRESHOLD_SQ
        pn = 0 < m <= P_N_THRESHOLD_SQ
        return ThresholdReport(a, None, m, {"A": ad, "D": ad, "P": pn, "N": pn})
    b = as_complex(b, "b")
    m = (modulus_squared(a * b) if abs_squared is None else Fraction(abs_squared))
    return ThresholdReport(a, b, m, {"A": 0 < m <= A_D_THRESHOLD_SQ ** 2,
                                     "P": 0 < m <= P_N_THRESHOLD_SQ ** 2})


@dataclass(frozen=True)
class LocalizationResult:
    points: tuple
    disks: tuple
    report: ContainmentReport


def localize(p: PotentialParams, bc, re_max: float, *, n_max: int | None = None,
             raise_on_violation: bool = False) -> LocalizationResult:
    """Locate one spectrum with Re(lambda) <= re_max and check it against its disks."""
    bc = BoundaryCondition.parse(bc)
    if bc is BoundaryCondition.DOUBLE_PERIODIC:
        raise ValueError("localize one of periodic/antiperiodic/dirichlet/neumann at a time")
    spec = locate_eigenvalues(p, bc, re_max=re_max, with_self_orth=False)
    pts = tuple(pt for pt in spec if pt.lam.real <= re_max)
    if n_max is None:
        n_max = default_n_max(re_max, p.a)
    if p.is_even:
        a_disk = p.a
    elif bc in (BoundaryCondition.PERIODIC, BoundaryCondition.ANTIPERIODIC):
        # P and A spectra of (a, b) are those of c = sqrt(ab) with b = a
        a_disk = p.effective_a
    else:
        raise PreconditionError("Dirichlet/Neumann disks need an even potential (b == a)")
    disks = disks_for(bc, a_disk, n_max)
    report = containment_check(pts, disks, raise_on_violation=raise_on_violation)
    return LocalizationResult(pts, tuple(disks), report)
