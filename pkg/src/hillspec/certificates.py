"""Exact verification of the twelve estimations and the three contradiction chains.

Every quantity is a sum of monomials  c * prod sqrt(n)^e  with rational c.
Squares of surds are rationalised exactly; an odd leftover power is bounded
by a rational enclosure of sqrt(n) from its continued-fraction convergents.
Passing ``enclosures`` substitutes given (typically coarser) enclosures for
every surd power instead, which is how the sensitivity of an estimation to
its surd arithmetic is probed.

Estimations 1-12 bound coefficient sums of normalised eigenvectors inside a
strip of the lambda-plane.  Each term records the recurrence centres it
uses and the distance lower bound that is claimed for them; the bound is
re-derived from the strip before the term is summed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Mapping

from .errors import DependencyError

ESTIMATIONS = tuple(f"Est{i}" for i in range(1, 13))
CHAINS = ("ChainT13", "ChainT14", "ChainT15")
ALL_IDS = ESTIMATIONS + CHAINS
ITERATION_BOUNDS = ("Est4", "Est9", "Est12")
ENCLOSURE_WIDTH = Fraction(1, 10 ** 12)

CHAIN_DEPENDENCIES = {
    "ChainT13": ("Est1", "Est2", "Est3", "Est4"),
    "ChainT14": ("Est5", "Est6", "Est7", "Est8", "Est9"),
    "ChainT15": ("Est10", "Est11", "Est12"),
}


def _dec(text: str) -> Fraction:
    """Exact rational of a decimal literal such as '0.03415'."""
    return Fraction(Decimal(text))


# ------------------------------------------------------------------ surds

@dataclass(frozen=True)
class SurdEnclosure:
    value_squared: Fraction
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        n = self.value_squared
        if not (self.lower > 0 and self.lower ** 2 < n < self.upper ** 2):
            raise ValueError(f"[{self.lower}, {self.upper}] does not enclose sqrt({n})")

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @classmethod
    def of(cls, n: int, width: Fraction = ENCLOSURE_WIDTH) -> "SurdEnclosure":
        """Enclosure of sqrt(n) by consecutive continued-fraction convergents."""
        n = int(n)
        r = math.isqrt(n)
        if r * r == n:
            raise ValueError(f"{n} is a perfect square")
        # periodic continued fraction of sqrt(n)
        m, d, a = 0, 1, r
        p0, p1 = 1, r
        q0, q1 = 0, 1
        prev = Fraction(p1, q1)
        while True:
            m = d * a - m
            d = (n - m * m) // d
            a = (r + m) // d
            p0, p1 = p1, a * p1 + p0
            q0, q1 = q1, a * q1 + q0
            cur = Fraction(p1, q1)
            lo, hi = min(prev, cur), max(prev, cur)
            if hi - lo <= width:
                return cls(Fraction(n), lo, hi)
            prev = cur

    @classmethod
    def decimal(cls, n: int, lower: str, upper: str) -> "SurdEnclosure":
        return cls(Fraction(n), _dec(lower), _dec(upper))


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @classmethod
    def point(cls, x) -> "Interval":
        x = Fraction(x)
        return cls(x, x)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    @property
    def exact(self) -> bool:
        return self.lo == self.hi


def _surd_power(n: int, e: int, enc: SurdEnclosure | None) -> Interval:
    """Enclosure of sqrt(n)^e.

    Without ``enc`` even powers are exact and an odd power keeps a single
    enclosed factor sqrt(n).  With ``enc`` the power is taken of the
    enclosure itself.
    """
    if enc is None:
        base = Fraction(n) ** (e // 2)
        if e % 2 == 0:
            return Interval.point(base)
        enc = SurdEnclosure.of(n)
        return Interval(base * enc.lower, base * enc.upper)
    if e >= 0:
        return Interval(enc.lower ** e, enc.upper ** e)
    return Interval(1 / enc.upper ** (-e), 1 / enc.lower ** (-e))


@dataclass(frozen=True)
class Monomial:
    """coefficient * prod_n sqrt(n)^exponent, all quantities positive."""

    coefficient: Fraction
    surds: tuple = ()      # sorted ((n, exponent), ...)

    @classmethod
    def of(cls, coefficient, **surds) -> "Monomial":
        items = tuple(sorted((int(k[1:]), int(v)) for k, v in surds.items() if v))
        return cls(Fraction(coefficient), items)

    def __mul__(self, other) -> "Monomial":
        if not isinstance(other, Monomial):
            return Monomial(self.coefficient * Fraction(other), self.surds)
        exps = dict(self.surds)
        for n, e in other.surds:
            exps[n] = exps.get(n, 0) + e
        return Monomial(self.coefficient * other.coefficient,
                        tuple(sorted((n, e) for n, e in exps.items() if e)))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Monomial":
        return Monomial(self.coefficient ** k, tuple((n, e * k) for n, e in self.surds))

    def evaluate(self, enclosures: Mapping[int, SurdEnclosure] | None = None) -> Interval:
        out = Interval.point(self.coefficient)
        for n, e in self.surds:
            enc = None
            if enclosures is not None:
                enc = enclosures.get(n) or SurdEnclosure.of(n)
            f = _surd_power(n, e, enc)
            out = Interval(out.lo * f.lo, out.hi * f.hi)
        return out


# -------------------------------------------------------------- estimations

@dataclass(frozen=True)
class Strip:
    """lo (<|<=) Re(lambda) (<|<=) hi; None for an open end."""

    lo: Fraction | None
    hi: Fraction | None

    def distance_to(self, center: int) -> Fraction:
        """Lower bound of |lambda - center| over the strip."""
        c = Fraction(center)
        if self.hi is not None and c >= self.hi:
            return c - self.hi
        if self.lo is not None and c <= self.lo:
            return self.lo - c
        return Fraction(0)


@dataclass(frozen=True)
class Term:
    label: str
    value: Monomial
    distances: tuple          # ((centre, claimed lower bound), ...)


@dataclass(frozen=True)
class EstimationSpec:
    id: str
    strip: Strip
    cap: Monomial             # the |a| bound used
    terms: tuple
    claimed: Fraction
    printed: Fraction | None = None


_C13 = Monomial.of(8, s6=-1)       # 8/sqrt(6)
_C14 = Monomial.of(5)
_C15 = Monomial.of(Fraction(4, 3))
_HALF_SQRT2 = Monomial.of(Fraction(1, 2), s2=1)


def _single(c: Monomial, d: int) -> Monomial:
    """|c_k|^2 <= |a|^2 / d^2 from one row of the recurrence."""
    return c ** 2 * Fraction(1, d * d)


def _tail(c: Monomial, d: int) -> Monomial:
    """sum over a tail <= 4|a|^2 / d^2."""
    return c ** 2 * Fraction(4, d * d)


def _iteration(c: Monomial, d1: int, d2: int, d3: int) -> list[Monomial]:
    """The four terms bounding |x_{k+1}/x_k| after iterating the recurrence twice.

    x_{k+1} = a x_k/(l-m1) + a^3 x_k/((l-m1)^2 (l-m2)) + a^3 x_{k+2}/((l-m1)^2 (l-m2))
              + a^2 x_{k+3}/((l-m1)(l-m2)),
    with |x_{k+2}| <= (2|a|)^2 |x_k|/(d2 d1) and |x_{k+3}| <= (2|a|)^3 |x_k|/(d3 d2 d1).
    """
    return [c * Fraction(1, d1),
            c ** 3 * Fraction(1, d2 * d1 * d1),
            c ** 5 * Fraction(4, d2 * d2 * d1 ** 3),
            c ** 5 * Fraction(8, d3 * d2 * d2 * d1 * d1)]


def _specs() -> dict:
    F = Fraction
    c13, c14, c15 = _C13, _C14, _C15
    s = {}
    s["Est1"] = EstimationSpec("Est1", Strip(F(9), F(16)), c13, (
        Term("|d1|^2", _single(c13, 8), ((1, 8),)),
        Term("|d3|^2", _single(c13, 9), ((25, 9),)),
        Term("sum_{k>=4} |d_k|^2", _tail(c13, 33), ((49, 33),)),
    ), F(1, 2), F(19849, 58806))
    s["Est2"] = EstimationSpec("Est2", Strip(F(6), F(9)), c13, (
        Term("|d1|^2", _single(c13, 5), ((1, 5),)),
        Term("|d3|^2", _single(c13, 16), ((25, 16),)),
        Term("sum_{k>=4} |d_k|^2", _tail(c13, 40), ((49, 40),)),
    ), F(1, 2), F(99, 200))
    two_c = c13 * 2
    d4 = two_c ** 2 * _HALF_SQRT2 * F(1, 43 * 19)
    d5 = two_c ** 3 * _HALF_SQRT2 * F(1, 75 * 43 * 19)
    s["Est3"] = EstimationSpec("Est3", Strip(None, F(6)), c13, (
        Term("|d3|^2", _single(c13, 19), ((25, 19),)),
        Term("|d4|^2", d4 ** 2, ((25, 19), (49, 43))),
        Term("|d5|^2", d5 ** 2, ((25, 19), (49, 43), (81, 75))),
        Term("sum_{k>=6} |d_k|^2", _tail(c13, 115), ((121, 115),)),
    ), _dec("0.03415"))
    labels = ("a/(l-m1)", "a^3/((l-m1)^2(l-m2))", "a^3 x_{k+2}", "a^2 x_{k+3}")

    def iter_terms(c, d1, d2, d3, m1, m2, m3):
        dist = (((m1, d1),), ((m1, d1), (m2, d2)), ((m1, d1), (m2, d2)),
                ((m1, d1), (m2, d2), (m3, d3)))
        return tuple(Term(lbl, v, d) for lbl, v, d in zip(labels, _iteration(c, d1, d2, d3), dist))

    s["Est4"] = EstimationSpec("Est4", Strip(None, F(6)), c13,
                               iter_terms(c13, 19, 43, 75, 25, 49, 81), _dec("0.17432"))
    s["Est5"] = EstimationSpec("Est5", Strip(F(26), F(46)), c14, (
        Term("|b1|^2", _single(c14, 22), ((4, 22),)),
        Term("|b2|^2", _single(c14, 10), ((16, 10),)),
        Term("|b4|^2", _single(c14, 18), ((64, 18),)),
        Term("sum_{k>=5} |b_k|^2", _tail(c14, 54), ((100, 54),)),
    ), F(1, 2), F(145759, 352836))
    s["Est6"] = EstimationSpec("Est6", Strip(F(16), F(26)), c14, (
        Term("|b1|^2", _single(c14, 12), ((4, 12),)),
        Term("|b3|^2", _single(c14, 10), ((36, 10),)),
        Term("sum_{k>=4} |b_k|^2", _tail(c14, 38), ((64, 38),)),
    ), F(1, 2), F(25621, 51984))
    s["Est7"] = EstimationSpec("Est7", Strip(F(12), F(16)), c14, (
        Term("|b1|^2", _single(c14, 8), ((4, 8),)),
        Term("|b3|^2", _single(c14, 20), ((36, 20),)),
        Term("|b4|^2", _single(c14, 48), ((64, 48),)),
        Term("sum_{k>=5} |b_k|^2", _tail(c14, 84), ((100, 84),)),
    ), F(1, 2), F(53981, 112896))
    s["Est8"] = EstimationSpec("Est8", Strip(None, F(12)), c14, (
        Term("|b4|^2", _single(c14, 52), ((64, 52),)),
        Term("|b3|^2", _single(c14, 24), ((36, 24),)),
        Term("sum_{k>=5} |b_k|^2", _tail(c14, 88), ((100, 88),)),
    ), F(1, 15), F(30495, 465088))
    s["Est9"] = EstimationSpec("Est9", Strip(None, F(12)), c14,
                               iter_terms(c14, 24, 52, 88, 36, 64, 100), _dec("0.2131"))
    s["Est10"] = EstimationSpec("Est10", Strip(F(3), F(8)), c15, (
        Term("|a0|^2", _single(c15, 3), ((0, 3),)),
        Term("|a2|^2", _single(c15, 8), ((16, 8),)),
        Term("sum_{k>=3} |a_k|^2", _tail(c15, 28), ((36, 28),)),
    ), F(1, 2))
    s["Est11"] = EstimationSpec("Est11", Strip(None, F(3)), c15, (
        Term("|a2|^2", _single(c15, 13), ((16, 13),)),
        Term("sum_{k>=3} |a_k|^2", _tail(c15, 33), ((36, 33),)),
    ), F(1, 58))
    s["Est12"] = EstimationSpec("Est12", Strip(None, F(3)), c15,
                                iter_terms(c15, 13, 33, 61, 16, 36, 64), _dec("0.10301"))
    return s


_SPECS = _specs()


# -------------------------------------------------------------- certificates

def _rational_record(x: Fraction) -> dict:
    with localcontext() as ctx:
        ctx.prec = 24
        dec = Decimal(x.numerator) / Decimal(x.denominator)
    return {"decimal": format(dec, "f"), "numerator": str(x.numerator),
            "denominator": str(x.denominator)}


@dataclass(frozen=True)
class Step:
    """One link of a chain; ``bound`` None marks a derived constant, not a claim."""

    label: str
    value: Interval
    bound: Fraction | None
    holds: bool


@dataclass(frozen=True)
class Certificate:
    id: str
    claimed_bound: Fraction
    computed: Interval
    verdict: bool
    margin: Fraction
    terms: tuple = ()
    steps: tuple = ()
    notes: tuple = ()         # printed links that are checked but not part of the verdict
    printed: Fraction | None = None
    distances_ok: bool = True
    dependencies: tuple = ()

    @property
    def computed_lower(self) -> Fraction:
        return self.computed.lo

    @property
    def computed_upper(self) -> Fraction:
        return self.computed.hi

    @property
    def matches_printed(self) -> bool | None:
        if self.printed is None:
            return None
        return self.computed.exact and self.computed.lo == self.printed

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "claimed": _rational_record(self.claimed_bound),
            "computed_lower": _rational_record(self.computed.lo),
            "computed_upper": _rational_record(self.computed.hi),
            "verdict": self.verdict,
            "margin": _rational_record(self.margin),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_id(id_: str, allowed) -> str:
    if id_ not in allowed:
        raise KeyError(f"unknown certificate id {id_!r}; expected one of {', '.join(allowed)}")
    return id_


def certify_estimation(id_: str, *, enclosures: Mapping[int, SurdEnclosure] | None = None
                       ) -> Certificate:
    """Recompute one estimation exactly and compare with its claimed bound.

    With ``enclosures`` (mapping n -> SurdEnclosure of sqrt(n)) every surd
    power is bounded through those enclosures, even powers included.
    """
    spec = _SPECS[_check_id(id_, ESTIMATIONS)]
    values = [t.value.evaluate(enclosures) for t in spec.terms]
    total = Interval.point(0)
    for v in values:
        total = total + v
    dist_ok = all(c_bound <= spec.strip.distance_to(centre)
                  for t in spec.terms for centre, c_bound in t.distances)
    verdict = dist_ok and total.hi < spec.claimed
    return Certificate(id_, spec.claimed, total, verdict, spec.claimed - total.hi,
                       terms=tuple(zip((t.label for t in spec.terms), values)),
                       printed=spec.printed, distances_ok=dist_ok)


def certify_iteration_bound(id_: str, *, enclosures=None) -> Certificate:
    """The ratio bounds |d3/d2|, |b3/b2|, |a2/a1| (Est4, Est9, Est12)."""
    return certify_estimation(_check_id(id_, ITERATION_BOUNDS), enclosures=enclosures)


def _sqrt(n: int) -> Interval:
    e = SurdEnclosure.of(n)
    return Interval(e.lower, e.upper)


def _step(label: str, value: Interval, bound: Fraction | None = None) -> Step:
    return Step(label, value, bound, bound is None or value.hi < bound)


def _delta_bound(alpha: Interval) -> Interval:
    # d2/d1 = +-(i + delta) with |delta| < |alpha|/2 + |alpha|^2/7
    f = lambda x: x / 2 + x * x / 7
    return Interval(f(alpha.lo), f(alpha.hi))


def _gamma_bound(delta: Interval) -> Interval:
    f = lambda x: x * x / (1 - x)
    return Interval(f(delta.lo), f(delta.hi))


def _alpha_bound(eps: Fraction) -> Interval:
    return Interval.point(eps / (Fraction(1, 2) - eps))


def _chain_t13(deps):
    eps = deps["Est3"].claimed_bound
    ratio = deps["Est4"].claimed_bound
    s6, s5, s2 = _sqrt(6), _sqrt(5), _sqrt(2)
    F = Fraction
    steps = [
        # (1 + sqrt 2) 8/sqrt 6 < 8 so only D_1 and D_2 need the strip estimates
        _step("(8/sqrt6)(1+sqrt2) < 8", Interval(8 * (1 + s2.lo) / s6.hi, 8 * (1 + s2.hi) / s6.lo), F(8)),
        _step("alpha = eps/(1/2 - eps) < 0.074", _alpha_bound(eps), _dec("0.074")),
        _step("delta < 0.074/2 + 0.074^2/7 < 0.04", _delta_bound(Interval.point(_dec("0.074"))),
              _dec("0.04")),
        _step("gamma < 0.04^2/(1 - 0.04) < 0.002", _gamma_bound(Interval.point(_dec("0.04"))),
              _dec("0.002")),
    ]
    final = Interval(s5.lo + ratio + _dec("0.002"), s5.hi + ratio + _dec("0.002"))
    steps.append(_step("sqrt5 + 0.17432 + 0.002 < 2.4125", final, _dec("2.4125")))
    steps.append(_step("sqrt5 + 0.17432 + 0.002 < sqrt6", final, s6.lo))
    # the printed decimal 2.4495 exceeds sqrt6 = 2.449489...; kept as a note only
    notes = [_step("2.4495 < sqrt6 (printed)", Interval.point(_dec("2.4495")), s6.lo)]
    return steps, final, s6.lo, notes


def _chain_t14(deps):
    beta = deps["Est8"].claimed_bound
    ratio = deps["Est9"].claimed_bound
    s2 = _sqrt(2)
    F = Fraction
    alpha = _alpha_bound(beta)
    delta = _delta_bound(alpha)
    gamma = _gamma_bound(delta)
    steps = [
        _step("5(1+sqrt2) < 14", Interval(5 * (1 + s2.lo), 5 * (1 + s2.hi)), F(14)),
        _step("alpha = beta/(1/2 - beta)", alpha),
        _step("delta = alpha/2 + alpha^2/7", delta),
        _step("gamma_1 < 0.01", gamma, _dec("0.01")),
    ]
    final = Interval.point(2 + ratio + _dec("0.01"))
    steps.append(_step("2 + 0.2131 + 0.01 = 2.2231 < 2.4", final, _dec("2.4")))
    return steps, final, _dec("2.4"), []


def _chain_t15(deps):
    rho = deps["Est11"].claimed_bound
    ratio = deps["Est12"].claimed_bound
    s2 = _sqrt(2)
    F = Fraction
    alpha = _alpha_bound(rho)
    delta = _delta_bound(alpha)
    gamma = _gamma_bound(delta)
    g = _dec("0.0006")
    steps = [
        _step("(4/3)(1+sqrt2) < 6", Interval(F(4, 3) * (1 + s2.lo), F(4, 3) * (1 + s2.hi)), F(6)),
        _step("alpha = rho/(1/2 - rho)", alpha),
        _step("delta = alpha/2 + alpha^2/7", delta),
        _step("gamma < 0.0006", gamma, g),
    ]
    final = Interval(s2.lo * (2 + g) + ratio, s2.hi * (2 + g) + ratio)
    steps.append(_step("sqrt2 (2 + 0.0006) + 0.10301 < 3", final, F(3)))
    return steps, final, F(3), []


_CHAIN_BUILDERS = {"ChainT13": _chain_t13, "ChainT14": _chain_t14, "ChainT15": _chain_t15}


def certify_chain(id_: str, verified: Mapping[str, Certificate]) -> Certificate:
    """Check the constant derivations and the final inequality of one chain.

    ``verified`` must hold passing certificates for every estimation the
    chain consumes; its constants (epsilon, the ratio bounds, ...) are the
    claimed bounds of those certificates.
    """
    _check_id(id_, CHAINS)
    needed = CHAIN_DEPENDENCIES[id_]
    missing = [d for d in needed if d not in verified]
    failed = [d for d in needed if d in verified and not verified[d].verdict]
    if missing or failed:
        raise DependencyError(
            f"{id_} needs verified {', '.join(needed)}; missing {missing or 'none'}, "
            f"failed {failed or 'none'}")
    steps, final, bound, notes = _CHAIN_BUILDERS[id_](verified)
    verdict = all(s.holds for s in steps)
    return Certificate(id_, bound, final, verdict, bound - final.hi, steps=tuple(steps),
                       notes=tuple(notes), dependencies=needed)


def certify_all() -> dict[str, Certificate]:
    """All twelve estimations followed by the three chains, in dependency order."""
    out = {i: certify_estimation(i) for i in ESTIMATIONS}
    for c in CHAINS:
        out[c] = certify_chain(c, out)
    return out
