"""Shooting spectra of P, A, D, N and L = P u A with multiplicities and classes.

Defining functions (all evaluated at x = pi):

    P: F - 2     A: F + 2     D: phi     N: theta'

where F = phi' + theta.  For even potentials (b == a) the identity
F^2 - 4 = 4 phi theta' splits every P or A eigenvalue into its Dirichlet
order u and Neumann order v with s = u + v.  This module uses that split
for location as well: PD/PN (and AD/AN) pairs can lie closer than one ulp
of lambda, where F -+ 2 cannot separate them but phi and theta' can, since
each has well separated roots.  The total of every P or A search is still
checked against the boundary winding of F -+ 2 itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _extended as ext
from ._contour import Rectangle, find_roots, integer_windings, track_rows, winding
from ._validation import as_complex, check_positive
from .errors import (
    CrossValidationError,
    InconsistentClassificationError,
    LocalizationError,
    NoEigenvectorError,
    PreconditionError,
    RadiusRefinementError,
)
from .monodromy import PotentialParams, fundamental_values
from .recurrence import (
    SymmetryClass,
    build_tridiagonal,
    coefficient_sequence,
    self_orthogonality,
    sort_spectrum,
    truncated_spectrum,
    truncation_order,
)

RESIDUAL_TOL = 1e-9
MATCH_TOL = 1e-6
ASSOCIATED_TOL = 1e-7
# relative accuracy of one double-precision monodromy entry
_DOUBLE_DELTA = 1e-12
_TRUST = 100.0
_MAX_SHRINK = 6


class BoundaryCondition(str, Enum):
    PERIODIC = "periodic"
    ANTIPERIODIC = "antiperiodic"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    DOUBLE_PERIODIC = "L"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        aliases = {"p": cls.PERIODIC, "a": cls.ANTIPERIODIC, "d": cls.DIRICHLET,
                   "n": cls.NEUMANN, "l": cls.DOUBLE_PERIODIC,
                   "doubleperiodic": cls.DOUBLE_PERIODIC, "double_periodic": cls.DOUBLE_PERIODIC}
        key = str(value).strip().lower()
        for bc in cls:
            if bc.value.lower() == key:
                return bc
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown boundary condition {value!r}")


class SpectralClass(str, Enum):
    PDN = "PDN"
    PD = "PD"
    PN = "PN"
    ADN = "ADN"
    AD = "AD"
    AN = "AN"
    UNCLASSIFIED = "Unclassified"

    @property
    def symmetry_classes(self) -> tuple[SymmetryClass, ...]:
        return {"PDN": (SymmetryClass.PD, SymmetryClass.PN),
                "ADN": (SymmetryClass.AD, SymmetryClass.AN),
                "PD": (SymmetryClass.PD,), "PN": (SymmetryClass.PN,),
                "AD": (SymmetryClass.AD,), "AN": (SymmetryClass.AN,)}.get(self.value, ())


@dataclass(frozen=True)
class SpectralPoint:
    lam: complex
    bc: BoundaryCondition
    multiplicity: int
    dirichlet_order: int
    neumann_order: int
    spectral_class: SpectralClass = SpectralClass.UNCLASSIFIED
    residual: float = 0.0
    self_orth: complex | None = None
    # True when F(lambda) = 2, False when F(lambda) = -2, None for non-even D/N
    periodic_side: bool | None = None
    extended_precision: bool = False

    @property
    def s(self) -> int:
        return self.multiplicity

    @property
    def u(self) -> int:
        return self.dirichlet_order

    @property
    def v(self) -> int:
        return self.neumann_order


@dataclass(frozen=True)
class Spectrum:
    """Located eigenvalues together with the contour that counted them."""

    points: tuple
    bc: BoundaryCondition
    region: Rectangle
    winding: int

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def values(self) -> np.ndarray:
        return np.array([pt.lam for pt in self.points], dtype=complex)

    def expanded(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        return np.array([pt.lam for pt in self.points for _ in range(pt.multiplicity)],
                        dtype=complex)


@dataclass(frozen=True)
class Multiplicity:
    s: int
    u: int
    v: int
    radius: float
    extended_precision: bool = False

    def __iter__(self):
        return iter((self.s, self.u, self.v))


# ---------------------------------------------------------------- evaluation

def _rows(vals: np.ndarray) -> np.ndarray:
    """(F - 2, F + 2, phi, theta') from fundamental values of shape (n, 4)."""
    F = vals[:, 3] + vals[:, 0]
    return np.stack([F - 2.0, F + 2.0, vals[:, 2], vals[:, 1]])


def _row_errors(vals: np.ndarray, lam, delta: float) -> np.ndarray:
    w = np.sqrt(np.abs(lam) + 1.0)
    scale = np.abs(vals[:, 0]) + np.abs(vals[:, 1]) / w + w * np.abs(vals[:, 2]) + np.abs(vals[:, 3])
    return delta * np.stack([scale, scale, scale / w, scale * w])


def defining_function(p: PotentialParams, bc):
    """``func(z, nderiv)`` for the characteristic function of one problem."""
    bc = BoundaryCondition.parse(bc)
    if bc is BoundaryCondition.DOUBLE_PERIODIC:
        def func(z, k):
            v = fundamental_values(p, z, k)
            F = v[..., 3] + v[..., 0]
            out = [F[:, 0] ** 2 - 4.0]
            if k >= 1:
                out.append(2 * F[:, 0] * F[:, 1])
            if k >= 2:
                out.append(2 * F[:, 1] ** 2 + 2 * F[:, 0] * F[:, 2])
            if k >= 3:
                out.append(6 * F[:, 1] * F[:, 2] + 2 * F[:, 0] * F[:, 3])
            return np.array(out)
        return func

    def func(z, k):
        v = fundamental_values(p, z, k)
        if bc is BoundaryCondition.DIRICHLET:
            return v[:, :, 2].T
        if bc is BoundaryCondition.NEUMANN:
            return v[:, :, 1].T
        F = (v[:, :, 3] + v[:, :, 0]).T.copy()
        F[0] += -2.0 if bc is BoundaryCondition.PERIODIC else 2.0
        return F
    return func


def default_region(p: PotentialParams, re_max: float, re_min: float | None = None) -> Rectangle:
    """Rectangle holding every eigenvalue with Re(lambda) <= re_max.

    The numerical range of -d^2/dx^2 + q lies within max|q| <= |a| + |b| of
    [0, inf), which bounds every eigenvalue of P, A, D and N.
    """
    bound = abs(p.a) + abs(p.b) + 1.0
    lo = -bound if re_min is None else float(re_min)
    return Rectangle(lo, float(re_max), -bound, bound)


# ---------------------------------------------------------- circle windings

@dataclass(frozen=True)
class _Orders:
    windings: tuple   # (F-2, F+2, phi, theta'), -1 if unresolved
    trusted: tuple    # per row: min |row| on the circle well above its error
    extended: bool

    def get(self, i: int) -> int | None:
        w = self.windings[i]
        return w if (self.trusted[i] and w >= 0) else None


def _circle_orders(evaluate, n: int, extended: bool) -> _Orders:
    """Windings of the rows (F-2, F+2, phi, theta') on one circle.

    ``evaluate(t)`` returns (rows, errors), each of shape (4, len(t)).  Rows
    whose modulus does not clear their error estimate are not tracked, since
    refining the argument of pure rounding noise never terminates.
    """
    t0 = np.arange(n) / n
    rows0, err0 = evaluate(t0)
    keep = [i for i in range(4)
            if np.min(np.abs(rows0[i])) >= _TRUST * np.max(err0[i])]
    windings = [-1] * 4
    trusted = [False] * 4
    if keep:
        first = [True]

        def rows_at(t):
            if first[0]:
                first[0] = False
                r, e = rows0, err0
            else:
                r, e = evaluate(t)
            return np.concatenate([r[keep], e[keep].astype(complex)])

        totals, f = track_rows(rows_at, n)
        w = integer_windings(totals[:len(keep)])
        k = len(keep)
        for j, i in enumerate(keep):
            windings[i] = w[j]
            trusted[i] = bool(np.min(np.abs(f[j])) >= _TRUST * np.max(f[k + j].real))
    return _Orders(tuple(windings), tuple(trusted), extended)


def _orders_double(p: PotentialParams, center: complex, radius: float) -> _Orders:
    def evaluate(t):
        z = center + radius * np.exp(2j * math.pi * t)
        vals = fundamental_values(p, z, 0)[:, 0, :]
        return _rows(vals), _row_errors(vals, z, _DOUBLE_DELTA)

    return _circle_orders(evaluate, 32, False)


def _orders_extended(p: PotentialParams, center, radius, bits: int = ext.DEFAULT_BITS) -> _Orders:
    delta = ext.relative_resolution(bits)
    with ext.precision(bits):
        c = ext.mpc(center)
        r = ext.mpfr(radius)
        two_pi_i = 2 * ext.gmpy2.const_pi() * ext.mpc(0, 1)

    def evaluate(t):
        vals, zs = [], []
        with ext.precision(bits):
            for ti in t:
                z = c + r * ext.gmpy2.exp(two_pi_i * ext.mpfr(float(ti)))
                th, thp, ph, php = ext.fundamental_values_ext(p.a, p.b, z, bits)
                F = th + php
                vals.append([complex(F - 2), complex(F + 2), complex(ph), complex(thp),
                             complex(th), complex(php)])
                zs.append(complex(z))
        v = np.array(vals).T
        fv = np.stack([v[4], v[3], v[2], v[5]], axis=1)
        return v[:4], _row_errors(fv, np.array(zs), delta)

    return _circle_orders(evaluate, 16, True)


def _extended_root(p: PotentialParams, lam: complex, kind: str, bits: int = ext.DEFAULT_BITS):
    """Polish a root of phi (kind 'D') or theta' (kind 'N') in extended precision."""
    idx = 2 if kind == "D" else 1
    with ext.precision(bits):
        g = lambda z: ext.fundamental_values_ext(p.a, p.b, z, bits)[idx]
        z0 = ext.mpc(lam)
        z1 = z0 + ext.mpfr(1e-9 * max(1.0, abs(lam)))
        tol = ext.mpfr(ext.relative_resolution(bits) * max(1.0, abs(lam)))
        root, _ = ext.secant_root(g, z0, z1, tol)
        return root


def _s_from(bc: BoundaryCondition, even: bool, o: _Orders):
    wP, wA, u, v = (o.get(i) for i in range(4))
    if even:
        if u is None or v is None:
            return None
        if bc is BoundaryCondition.DIRICHLET:
            return u
        if bc is BoundaryCondition.NEUMANN:
            return v
        if bc is BoundaryCondition.PERIODIC:
            return None if wA is None else u + v - wA
        if bc is BoundaryCondition.ANTIPERIODIC:
            return None if wP is None else u + v - wP
        return u + v
    direct = {BoundaryCondition.PERIODIC: wP, BoundaryCondition.ANTIPERIODIC: wA,
              BoundaryCondition.DIRICHLET: u, BoundaryCondition.NEUMANN: v}
    if bc is BoundaryCondition.DOUBLE_PERIODIC:
        return None if wP is None or wA is None else wP + wA
    return direct[bc]


def _consistent(bc: BoundaryCondition, even: bool, o: _Orders, s: int) -> bool:
    wP, wA = o.get(0), o.get(1)
    if not even:
        return True
    # where F -+ 2 itself is resolvable its winding must equal u + v, since F^2-4 = 4 phi theta'
    if bc is BoundaryCondition.PERIODIC and wP is not None:
        return wP == s
    if bc is BoundaryCondition.ANTIPERIODIC and wA is not None:
        return wA == s
    return True


def multiplicity(p: PotentialParams, lam, bc, *, neighbors: Iterable = (),
                 radius: float | None = None, kind: str | None = None,
                 center_ext=None) -> Multiplicity:
    """Orders (s, u, v) of ``lam`` from winding numbers on a small circle.

    s counts zeros of the problem's defining function, u and v those of
    phi(pi, .) and theta'(pi, .).  The radius starts at half the distance to
    the nearest of ``neighbors`` and halves on any conditioning failure.
    When double precision cannot resolve the circle the same radius is
    retried in extended precision, centred on ``center_ext`` or on the root
    of phi (``kind='D'``) or theta' (``kind='N'``) nearest ``lam``.
    """
    bc = BoundaryCondition.parse(bc)
    lam = as_complex(lam, "lambda")
    even = p.is_even
    neighbors = [complex(z) for z in neighbors]
    if radius is None:
        gaps = [abs(z - lam) for z in neighbors if z != lam]
        gaps = [g for g in gaps if g > 0]
        radius = 0.5 * min(gaps) if gaps else 0.1
        radius = min(radius, 0.25)
    else:
        radius = check_positive(radius, "radius")
    for _ in range(_MAX_SHRINK + 1):
        o = _orders_double(p, lam, radius)
        s = _s_from(bc, even, o)
        if s is None or not _consistent(bc, even, o, s) or s < 1:
            if center_ext is None and kind is not None:
                center_ext = _extended_root(p, lam, kind)
            o = _orders_extended(p, lam if center_ext is None else center_ext, radius)
            s = _s_from(bc, even, o)
        if s is not None and s >= 1 and _consistent(bc, even, o, s):
            u = o.get(2) if o.get(2) is not None else 0
            v = o.get(3) if o.get(3) is not None else 0
            if even and bc in (BoundaryCondition.PERIODIC, BoundaryCondition.ANTIPERIODIC,
                               BoundaryCondition.DOUBLE_PERIODIC) and s != u + v:
                radius *= 0.5
                continue
            return Multiplicity(int(s), int(u), int(v), float(radius), o.extended)
        radius *= 0.5
    raise RadiusRefinementError(
        f"no well-conditioned circle around lambda={lam} down to radius {radius:.3e}")


# ----------------------------------------------------------- classification

def classify(point: SpectralPoint, p: PotentialParams) -> SpectralPoint:
    """Assign PD/PN/AD/AN (or PDN/ADN) from the orders u, v and the sign of F."""
    if not p.is_even:
        raise PreconditionError("classification needs an even potential (b == a)")
    u, v = point.dirichlet_order, point.neumann_order
    if u == 0 and v == 0:
        raise InconsistentClassificationError(
            f"lambda={point.lam} is neither a Dirichlet nor a Neumann eigenvalue")
    side = point.periodic_side
    if side is None:
        side = point.bc is BoundaryCondition.PERIODIC
    prefix = "P" if side else "A"
    suffix = "DN" if (u and v) else ("D" if u else "N")
    cls = SpectralClass(prefix + suffix)
    if cls in (SpectralClass.PDN, SpectralClass.ADN) and p.a != 0:
        raise InconsistentClassificationError(
            f"lambda={point.lam} classified {cls.value} for a={p.a} != 0: "
            "geometric multiplicity 2 is impossible there")
    return replace(point, spectral_class=cls)


# ----------------------------------------------------------------- location

class _SectionCache:
    """Finite-section spectra of the four families, built on demand."""

    def __init__(self, a: complex, re_max: float):
        self.a = a
        self.re_max = re_max
        self.ops: dict = {}
        self.spectra: dict = {}

    def spectrum(self, cls: SymmetryClass) -> np.ndarray:
        if cls not in self.spectra:
            N = truncation_order(self.a, self.re_max)
            op = build_tridiagonal(cls, self.a, N)
            self.ops[cls] = op
            self.spectra[cls] = truncated_spectrum(op)
        return self.spectra[cls]

    def self_orth(self, cls: SymmetryClass, lam: complex) -> complex | None:
        w = self.spectrum(cls)
        i = int(np.argmin(np.abs(w - lam)))
        if abs(w[i] - lam) > MATCH_TOL * max(1.0, abs(lam)):
            return None
        try:
            seq = coefficient_sequence(self.ops[cls], w[i])
        except NoEigenvectorError:
            return None
        return self_orthogonality(seq)


def _search(p: PotentialParams, bc: BoundaryCondition, rect: Rectangle):
    return find_roots(defining_function(p, bc), rect, residual_tol=RESIDUAL_TOL)


def _common_searches(p: PotentialParams, rect: Rectangle):
    """Dirichlet and Neumann root searches over one shared contour."""
    for _ in range(4):
        d = _search(p, BoundaryCondition.DIRICHLET, rect)
        n = _search(p, BoundaryCondition.NEUMANN, d.region)
        if n.region == d.region:
            return d, n
        rect = n.region
    raise RadiusRefinementError("Dirichlet and Neumann contours did not settle")


@dataclass
class _Candidate:
    lam: complex
    kind: str           # "D" or "N"
    mult: int
    periodic: bool
    partner: "_Candidate | None" = None
    orders: Multiplicity | None = None
    center_ext: object = None


def _is_free(p: PotentialParams) -> bool:
    return p.a == 0 and p.b == 0


def _pair_distance_floor(lam: complex) -> float:
    return 1e-6 * max(1.0, abs(lam))


def _resolve(p: PotentialParams, cands: list[_Candidate]) -> list[list[_Candidate]]:
    """Group D and N roots into eigenvalues; each group is one eigenvalue."""
    groups: list[list[_Candidate]] = []
    used = set()
    for i, c in enumerate(cands):
        if i in used:
            continue
        used.add(i)
        group = [c]
        if c.kind == "D":
            best = None
            for j, d in enumerate(cands):
                if j in used or d.kind != "N":
                    continue
                dist = abs(d.lam - c.lam)
                if dist <= _pair_distance_floor(c.lam) and (best is None or dist < best[0]):
                    best = (dist, j)
            if best is not None:
                j = best[1]
                d = cands[j]
                gap = best[0]
                if gap > 1e3 * _DOUBLE_DELTA * max(1.0, abs(c.lam)):
                    used.add(j)
                    groups.extend([[c], [d]])
                    continue
                if _is_free(p):
                    # q = 0: coincident D and N roots are exact
                    used.add(j)
                    group.append(d)
                    groups.append(group)
                    continue
                ed = _extended_root(p, c.lam, "D")
                en = _extended_root(p, d.lam, "N")
                gap_ext = abs(complex(ed - en)) if ed != en else 0.0
                res = ext.relative_resolution() * 1e6 * max(1.0, abs(c.lam))
                used.add(j)
                if gap_ext > res:
                    c.center_ext, d.center_ext = ed, en
                    c.partner, d.partner = d, c
                    c.lam, d.lam = complex(ed), complex(en)
                    groups.extend([[c], [d]])
                else:
                    group.append(d)
                    groups.append(group)
                continue
        groups.append(group)
    return groups


def _orders_for_group(p, group, bc, others):
    c = group[0]
    if len(group) == 2:
        d = group[1]
        u, v = (c.mult, d.mult) if c.kind == "D" else (d.mult, c.mult)
        return Multiplicity(u + v, u, v, 0.0, False)
    if c.partner is not None:
        gap = abs(complex(c.center_ext - c.partner.center_ext))
        return multiplicity(p, c.lam, bc, radius=0.5 * gap, kind=c.kind, center_ext=c.center_ext)
    return multiplicity(p, c.lam, bc, neighbors=others, kind=c.kind)


def _defining_residual(p: PotentialParams, lam: complex, bc: BoundaryCondition,
                       periodic: bool | None) -> float:
    vals = fundamental_values(p, np.array([lam]), 0)[0, 0]
    F = vals[3] + vals[0]
    if bc is BoundaryCondition.DIRICHLET:
        return float(abs(vals[2]))
    if bc is BoundaryCondition.NEUMANN:
        return float(abs(vals[1]))
    if bc is BoundaryCondition.PERIODIC or (bc is BoundaryCondition.DOUBLE_PERIODIC and periodic):
        return float(abs(F - 2))
    return float(abs(F + 2))


@dataclass(frozen=True)
class _EvenGroup:
    lam: complex
    periodic: bool
    orders: Multiplicity
    kinds: frozenset
    extended_precision: bool


@dataclass
class EvenSpectra:
    """Shared Dirichlet/Neumann analysis of one even potential on one region."""

    p: PotentialParams
    region: Rectangle
    d_winding: int
    n_winding: int
    groups: tuple
    with_self_orth: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def compute(cls, p: PotentialParams, region: Rectangle, *,
                with_self_orth: bool = True) -> "EvenSpectra":
        if not p.is_even:
            raise PreconditionError("the Dirichlet/Neumann split needs b == a")
        d_search, n_search = _common_searches(p, region)
        cands = []
        for kind, search in (("D", d_search), ("N", n_search)):
            if not search.roots:
                continue
            z = np.array([r.value for r in search.roots])
            vals = fundamental_values(p, z, 0)[:, 0, :]
            F = vals[:, 3] + vals[:, 0]
            for r, Fi in zip(search.roots, F):
                cands.append(_Candidate(r.value, kind, r.multiplicity, bool(Fi.real > 0)))
        all_vals = [c.lam for c in cands]
        groups = []
        for group in _resolve(p, cands):
            c = group[0]
            others = [z for z in all_vals if all(z is not g.lam for g in group)]
            side = BoundaryCondition.PERIODIC if c.periodic else BoundaryCondition.ANTIPERIODIC
            orders = _orders_for_group(p, group, side, others)
            groups.append(_EvenGroup(c.lam, c.periodic, orders,
                                     frozenset(g.kind for g in group),
                                     orders.extended_precision or c.center_ext is not None))
        return cls(p, d_search.region, d_search.winding, n_search.winding, tuple(groups),
                   with_self_orth)

    def spectrum(self, bc) -> Spectrum:
        bc = BoundaryCondition.parse(bc)
        if bc not in self._cache:
            self._cache[bc] = self._assemble(bc)
        return self._cache[bc]

    def _assemble(self, bc: BoundaryCondition) -> Spectrum:
        p = self.p
        wanted = {
            BoundaryCondition.DIRICHLET: lambda g: g.orders.u > 0,
            BoundaryCondition.NEUMANN: lambda g: g.orders.v > 0,
            BoundaryCondition.PERIODIC: lambda g: g.periodic,
            BoundaryCondition.ANTIPERIODIC: lambda g: not g.periodic,
            BoundaryCondition.DOUBLE_PERIODIC: lambda g: True,
        }[bc]
        sections = _SectionCache(p.a, self.region.re_max + 1.0) if self.with_self_orth else None
        points = []
        for g in self.groups:
            if not wanted(g):
                continue
            o = g.orders
            s = o.u if bc is BoundaryCondition.DIRICHLET else (
                o.v if bc is BoundaryCondition.NEUMANN else o.s)
            side = BoundaryCondition.PERIODIC if g.periodic else BoundaryCondition.ANTIPERIODIC
            res_bc = bc if bc in (BoundaryCondition.DIRICHLET, BoundaryCondition.NEUMANN) else side
            pt = SpectralPoint(g.lam, bc, int(s), o.u, o.v,
                               residual=_defining_residual(p, g.lam, res_bc, g.periodic),
                               periodic_side=g.periodic,
                               extended_precision=g.extended_precision)
            pt = classify(pt, p)
            if sections is not None and pt.spectral_class in (
                    SpectralClass.PD, SpectralClass.PN, SpectralClass.AD, SpectralClass.AN):
                sc = pt.spectral_class.symmetry_classes[0]
                pt = replace(pt, self_orth=sections.self_orth(sc, g.lam))
            points.append(pt)

        total = sum(pt.multiplicity for pt in points)
        if bc is BoundaryCondition.DIRICHLET:
            count = self.d_winding
        elif bc is BoundaryCondition.NEUMANN:
            count = self.n_winding
        elif bc is BoundaryCondition.DOUBLE_PERIODIC:
            count = self.spectrum(BoundaryCondition.PERIODIC).winding \
                + self.spectrum(BoundaryCondition.ANTIPERIODIC).winding
        else:
            count = winding(defining_function(p, bc), self.region)
        if total != count:
            raise LocalizationError(
                f"{bc.value}: multiplicities sum to {total} but the contour winding is {count}",
                self.region)
        points.sort(key=lambda pt: (pt.lam.real, pt.lam.imag, pt.spectral_class.value))
        return Spectrum(tuple(points), bc, self.region, count)


def _locate_even(p: PotentialParams, bc: BoundaryCondition, rect: Rectangle,
                 with_self_orth: bool) -> Spectrum:
    return EvenSpectra.compute(p, rect, with_self_orth=with_self_orth).spectrum(bc)


def _locate_general(p: PotentialParams, bc: BoundaryCondition, rect: Rectangle) -> Spectrum:
    if bc is BoundaryCondition.DOUBLE_PERIODIC:
        P = _locate_general(p, BoundaryCondition.PERIODIC, rect)
        A = _locate_general(p, BoundaryCondition.ANTIPERIODIC, P.region)
        pts = sorted(P.points + A.points, key=lambda pt: (pt.lam.real, pt.lam.imag))
        pts = [replace(pt, bc=bc) for pt in pts]
        return Spectrum(tuple(pts), bc, A.region, P.winding + A.winding)
    search = _search(p, bc, rect)
    points = []
    for r in search.roots:
        side = {BoundaryCondition.PERIODIC: True, BoundaryCondition.ANTIPERIODIC: False}.get(bc)
        points.append(SpectralPoint(r.value, bc, r.multiplicity,
                                    r.multiplicity if bc is BoundaryCondition.DIRICHLET else 0,
                                    r.multiplicity if bc is BoundaryCondition.NEUMANN else 0,
                                    residual=_defining_residual(p, r.value, bc, side),
                                    periodic_side=side))
    return Spectrum(tuple(points), bc, search.region, search.winding)


def locate_eigenvalues(p: PotentialParams, bc, region: Rectangle | None = None, *,
                       re_max: float | None = None, with_self_orth: bool = True) -> Spectrum:
    """All eigenvalues of one problem inside ``region`` with their orders.

    ``region`` defaults to :func:`default_region` with ``re_max``.  Its
    edges may move outward slightly to keep the contour off roots; the
    rectangle actually used is returned with the result.
    """
    bc = BoundaryCondition.parse(bc)
    if region is None:
        if re_max is None:
            raise ValueError("give a region or re_max")
        region = default_region(p, re_max)
    if p.is_even:
        return _locate_even(p, bc, region, with_self_orth)
    return _locate_general(p, bc, region)


# --------------------------------------------------------- cross validation

_UNIONS = {
    BoundaryCondition.DIRICHLET: (SymmetryClass.PD, SymmetryClass.AD),
    BoundaryCondition.NEUMANN: (SymmetryClass.PN, SymmetryClass.AN),
    BoundaryCondition.PERIODIC: (SymmetryClass.PD, SymmetryClass.PN),
    BoundaryCondition.ANTIPERIODIC: (SymmetryClass.AD, SymmetryClass.AN),
}


@dataclass(frozen=True)
class Match:
    shooting: complex
    recurrence: complex

    @property
    def deviation(self) -> float:
        return abs(self.shooting - self.recurrence)


@dataclass(frozen=True)
class BoundaryMatch:
    bc: BoundaryCondition
    families: tuple
    matches: tuple
    orphans_shooting: tuple
    orphans_recurrence: tuple

    @property
    def max_deviation(self) -> float:
        return max((m.deviation for m in self.matches), default=0.0)

    @property
    def ok(self) -> bool:
        return not self.orphans_shooting and not self.orphans_recurrence


@dataclass(frozen=True)
class CrossValidationReport:
    a: complex
    region: Rectangle
    tolerance: float
    boundaries: tuple
    pa_separation: float
    pa_tolerance: float = 1e-8
    spectra: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def ok(self) -> bool:
        return all(b.ok for b in self.boundaries) and self.pa_separation > self.pa_tolerance

    @property
    def orphans(self) -> list:
        out = []
        for b in self.boundaries:
            out += [(b.bc.value, "shooting", z) for z in b.orphans_shooting]
            out += [(b.bc.value, "recurrence", z) for z in b.orphans_recurrence]
        return out


def _assign(shoot: np.ndarray, rec: np.ndarray, tol: float):
    if shoot.size == 0 or rec.size == 0:
        return [], list(range(shoot.size)), list(range(rec.size))
    cost = np.abs(shoot[:, None] - rec[None, :])
    rows, cols = linear_sum_assignment(cost)
    pairs = [(i, j) for i, j in zip(rows, cols) if cost[i, j] <= tol]
    mi = {i for i, _ in pairs}
    mj = {j for _, j in pairs}
    return (pairs, [i for i in range(shoot.size) if i not in mi],
            [j for j in range(rec.size) if j not in mj])


def cross_validate(p: PotentialParams, region: Rectangle | None = None, *,
                   re_max: float | None = None,
                   families: Sequence = tuple(SymmetryClass),
                   first_n: int | None = None, tol: float = MATCH_TOL,
                   raise_on_failure: bool = True) -> CrossValidationReport:
    """Shooting spectra against unions of finite-section family spectra.

    Checks D = PD u AD, N = PN u AN, P = PD u PN and A = AD u AN for every
    boundary condition whose two families are listed, and that no periodic
    eigenvalue is also antiperiodic.  With ``first_n`` only the first n
    eigenvalues of each side (by real part) must match; a few extra section
    eigenvalues are admitted as partners so that ties in Re do not matter.
    """
    if not p.is_even:
        raise PreconditionError("the family unions hold for even potentials (b == a)")
    families = {SymmetryClass(f) for f in families}
    if region is None:
        if re_max is None:
            raise ValueError("give a region or re_max")
        region = default_region(p, re_max)
    sections = _SectionCache(p.a, region.re_max + 20.0)
    even = EvenSpectra.compute(p, region, with_self_orth=False)
    results, spectra = [], {}
    for bc, fams in _UNIONS.items():
        if not set(fams) <= families:
            continue
        spec = even.spectrum(bc)
        spectra[bc] = spec
        used = spec.region
        shoot = sort_spectrum(spec.expanded())
        rec = sort_spectrum(np.concatenate([sections.spectrum(f) for f in fams]))
        margin = 2 * tol
        inside = np.array([used.contains(z) for z in rec], dtype=bool)
        if first_n is not None:
            shoot_a = shoot[:first_n]
            rec_pool = rec[inside][:first_n + 4]
            pairs, orph_s, _ = _assign(shoot_a, rec_pool, tol)
            rec_b = rec[inside][:first_n]
            pairs_b, _, orph_r = _assign(shoot, rec_b, tol)
            matches = tuple(Match(complex(shoot_a[i]), complex(rec_pool[j])) for i, j in pairs)
            o_s = tuple(complex(shoot_a[i]) for i in orph_s)
            o_r = tuple(complex(rec_b[j]) for j in orph_r)
        else:
            pool = rec[np.array([used.contains(z, margin) for z in rec], dtype=bool)]
            pairs, orph_s, orph_r = _assign(shoot, pool, tol)
            matches = tuple(Match(complex(shoot[i]), complex(pool[j])) for i, j in pairs)
            o_s = tuple(complex(shoot[i]) for i in orph_s)
            # section eigenvalues within 2 tol of the edge may sit on either side
            o_r = tuple(complex(pool[j]) for j in orph_r if used.contains(pool[j], -margin))
        results.append(BoundaryMatch(bc, fams, matches, o_s, o_r))

    sep = math.inf
    P, A = spectra.get(BoundaryCondition.PERIODIC), spectra.get(BoundaryCondition.ANTIPERIODIC)
    if P is not None and A is not None and len(P) and len(A):
        sep = float(np.min(np.abs(P.values[:, None] - A.values[None, :])))
    report = CrossValidationReport(complex(p.a), region, tol, tuple(results), sep,
                                   spectra=spectra)
    if raise_on_failure and not report.ok:
        raise CrossValidationError(
            f"cross-validation failed for a={p.a}: {len(report.orphans)} orphan(s), "
            f"P/A separation {sep:.3e}", report.orphans, report)
    return report


# ----------------------------------------------------- associated functions

@dataclass(frozen=True)
class AssociatedFunctionReport:
    lam: complex
    solution: str          # "theta" or "phi"
    values: tuple          # (d/dlambda y(pi), d/dlambda y'(pi))
    tolerance: float

    @property
    def max_deviation(self) -> float:
        return max(abs(v) for v in self.values)

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tolerance


def associated_function_check(p: PotentialParams, point: SpectralPoint, *,
                              tol: float = ASSOCIATED_TOL) -> AssociatedFunctionReport:
    """Check that the lambda-derivative of the eigenfunction is an associated function.

    For a Neumann-type multiple eigenvalue (v >= 2) the eigenfunction is
    theta and d theta / d lambda must satisfy both its periodic (or
    antiperiodic) and Neumann conditions at pi; with zero initial data these
    reduce to d theta(pi)/d lambda = d theta'(pi)/d lambda = 0.  The
    Dirichlet-type case (u >= 2) is the same statement for phi.
    """
    if point.multiplicity < 2:
        raise PreconditionError(f"lambda={point.lam} is simple (s={point.multiplicity})")
    if point.dirichlet_order and point.neumann_order:
        raise PreconditionError("geometric multiplicity 2: no associated function is forced")
    vals = fundamental_values(p, np.array([point.lam]), 1)[0, 1]
    if point.neumann_order >= 2:
        return AssociatedFunctionReport(point.lam, "theta", (complex(vals[0]), complex(vals[1])), tol)
    if point.dirichlet_order >= 2:
        return AssociatedFunctionReport(point.lam, "phi", (complex(vals[2]), complex(vals[3])), tol)
    raise PreconditionError("neither u nor v is at least 2 at this point")
