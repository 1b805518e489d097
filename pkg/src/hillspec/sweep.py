"""Eigenvalue trajectories in the a-plane and the first collisions per family.

Collisions are searched per symmetry family: an eigenvalue of P is PD or
PN, and for a != 0 a PD and a PN eigenvalue never coincide (that would
need geometric multiplicity 2), although they can come within 1e-15 of
each other.  Gaps are therefore taken inside one family only, and an
operator (P, A, D, N) is represented by its two families.

Along a ray the merit is the smallest pairwise gap of the family's finite
section inside the lambda window.  Each interior minimum of the merit is
refined on the ray to ``tol`` and then continued off the ray by complex
Newton on h(a) = (lambda_1 - lambda_2)^2, which is analytic at a simple
exceptional point even though the eigenvalues themselves are not.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from ._contour import Rectangle
from ._validation import check_int, check_positive
from .errors import HillSpecError, PreconditionError
from .monodromy import PotentialParams
from .recurrence import (
    SymmetryClass,
    build_tridiagonal,
    coefficient_sequence,
    self_orthogonality,
    truncation_order,
)
from .spectra import (
    BoundaryCondition,
    SpectralClass,
    SpectralPoint,
    associated_function_check,
    multiplicity,
)

DEFAULT_WINDOW = Rectangle(-10.0, 120.0, -60.0, 60.0)
# collisions are declared on h = gap^2: at a defective pair the computed gap
# itself is limited to about sqrt(eps * |T|)
COLLISION_H = 1e-10
SELF_ORTH_TOL = 1e-6
ASSOCIATED_TOL = 1e-7

OPERATOR_FAMILIES = {
    "P": (SymmetryClass.PD, SymmetryClass.PN),
    "A": (SymmetryClass.AD, SymmetryClass.AN),
    "D": (SymmetryClass.PD, SymmetryClass.AD),
    "N": (SymmetryClass.PN, SymmetryClass.AN),
}


def families_of(target) -> tuple[SymmetryClass, ...]:
    """Families behind a SymmetryClass, an operator letter, or a combination.

    ``'PN'`` is the family; ``'P'`` is the operator (PD, PN); ``'P+N'``
    joins operators; an iterable mixes any of these.
    """
    if isinstance(target, SymmetryClass):
        return (target,)
    if isinstance(target, str):
        key = target.strip().upper()
        if "+" in key or "/" in key:
            parts = key.replace("/", "+").split("+")
            return families_of(parts)
        if key in OPERATOR_FAMILIES:
            return OPERATOR_FAMILIES[key]
        return (SymmetryClass(key),)
    out: list[SymmetryClass] = []
    for item in target:
        for f in families_of(item):
            if f not in out:
                out.append(f)
    return tuple(out)


# ------------------------------------------------------------------- paths

@dataclass(frozen=True)
class Ray:
    """a(t) = (r0 + t (r1 - r0)) e^{i angle}, t in [0, 1]."""

    angle: float
    r0: float
    r1: float

    def __call__(self, t):
        r = self.r0 + np.asarray(t, dtype=float) * (self.r1 - self.r0)
        return r * np.exp(1j * self.angle)


@dataclass(frozen=True)
class Segment:
    """a(t) = a0 + t (a1 - a0), t in [0, 1]."""

    a0: complex
    a1: complex

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.a0 + t * (self.a1 - self.a0)


@dataclass(frozen=True)
class SweepGrid:
    path: object
    steps: int
    family: SymmetryClass
    lambda_window: Rectangle = DEFAULT_WINDOW

    def __post_init__(self):
        check_int(self.steps, "steps", minimum=2)
        object.__setattr__(self, "family", SymmetryClass(self.family))
        w = self.lambda_window
        if not (w.width > 0 and w.height > 0):
            raise ValueError("lambda window is empty")

    @property
    def ts(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.steps)


def section_eigenvalues(family, a, window: Rectangle = DEFAULT_WINDOW,
                        N: int | None = None) -> np.ndarray:
    """All eigenvalues of one family's section; ``window`` only fixes the truncation."""
    cls = SymmetryClass(family)
    a = complex(a)
    if N is None:
        N = truncation_order(a, window.re_max)
    T = build_tridiagonal(cls, a, N).to_dense()
    return np.linalg.eigvals(T)


def _in_window(w: np.ndarray, window: Rectangle) -> np.ndarray:
    return w[(w.real >= window.re_min) & (w.real <= window.re_max)
             & (w.imag >= window.im_min) & (w.imag <= window.im_max)]


def min_gap(family, a, window: Rectangle = DEFAULT_WINDOW) -> tuple[float, complex]:
    """Smallest pairwise gap inside the window and the midpoint of that pair."""
    w = _in_window(section_eigenvalues(family, a, window), window)
    if w.size < 2:
        return math.inf, complex("nan")
    d = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(int(np.argmin(d)), d.shape)
    return float(d[i, j]), complex(0.5 * (w[i] + w[j]))


def operator_gap(target, a, window: Rectangle = DEFAULT_WINDOW) -> float:
    """Smallest within-family gap over the families of ``target``."""
    return min(min_gap(f, a, window)[0] for f in families_of(target))


# ------------------------------------------------------------ trajectories

@dataclass(frozen=True)
class Trajectory:
    family: SymmetryClass
    index: int
    t: np.ndarray
    a: np.ndarray
    lam: np.ndarray


@dataclass(frozen=True)
class TrajectoryResult:
    grid: SweepGrid
    trajectories: tuple
    candidates: tuple        # (t, a) where matching stayed ambiguous

    def to_csv(self) -> str:
        return trajectories_to_csv(self.trajectories)


def trajectories_to_csv(trajectories: Iterable[Trajectory]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "re_a", "im_a", "family", "index", "re_lambda", "im_lambda"])
    for tr in trajectories:
        for t, a, lam in zip(tr.t, tr.a, tr.lam):
            writer.writerow([f"{t:.12g}", f"{a.real:.15g}", f"{a.imag:.15g}", tr.family.value,
                             tr.index, f"{lam.real:.15g}", f"{lam.imag:.15g}"])
    return buf.getvalue()


def _match(prev: np.ndarray, new: np.ndarray) -> tuple[np.ndarray, float]:
    cost = np.abs(prev[:, None] - new[None, :])
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(prev.size, dtype=int)
    order[rows] = cols
    return new[order], float(np.max(cost[rows, cols], initial=0.0))


def _ambiguous(vals: np.ndarray, motion: float) -> bool:
    if vals.size < 2:
        return False
    d = np.abs(vals[:, None] - vals[None, :])
    np.fill_diagonal(d, np.inf)
    return float(np.min(d)) <= 3.0 * motion


def track_trajectories(grid: SweepGrid, *, max_refine: int = 10) -> TrajectoryResult:
    """Label the window eigenvalues at t = 0 and follow them along the path.

    Consecutive spectra are matched by minimal total displacement.  A step
    is halved while the smallest gap is within 3x the largest displacement;
    if that persists after ``max_refine`` halvings the point is reported as
    a collision candidate.
    """
    win = grid.lambda_window
    N = truncation_order(complex(np.max(np.abs(grid.path(grid.ts)))), win.re_max)
    spec = lambda t: section_eigenvalues(grid.family, complex(grid.path(t)), win, N)
    w0 = _in_window(spec(0.0), win)
    w0 = w0[np.lexsort((w0.imag, w0.real))]
    ts, values, candidates = [0.0], [w0], []

    def advance(ta, prev, tb, depth):
        cur, motion = _match(prev, spec(tb))
        if _ambiguous(cur, motion) and motion > 0:
            if depth < max_refine:
                tm = 0.5 * (ta + tb)
                mid = advance(ta, prev, tm, depth + 1)
                return advance(tm, mid, tb, depth + 1)
            candidates.append((tb, complex(grid.path(tb))))
        return cur

    prev = w0
    for ta, tb in zip(grid.ts[:-1], grid.ts[1:]):
        prev = advance(ta, prev, tb, 0)
        ts.append(float(tb))
        values.append(prev)
    V = np.array(values)
    t_arr = np.array(ts)
    a_arr = np.asarray(grid.path(t_arr), dtype=complex)
    trajs = tuple(Trajectory(grid.family, k, t_arr, a_arr, V[:, k]) for k in range(V.shape[1]))
    return TrajectoryResult(grid, trajs, tuple(candidates))


# -------------------------------------------------------------- collisions

@dataclass(frozen=True)
class CollisionEvent:
    a_value: complex
    lambda_value: complex
    family: SymmetryClass
    gap_before: float
    refinement_tolerance: float
    ray_angle: float
    ray_radius: float
    h_residual: float
    s: int | None = None
    u: int | None = None
    v: int | None = None
    self_orth: float | None = None
    associated_deviation: float | None = None
    doubled_truncation_shift: float | None = None
    verified: bool = False
    notes: tuple = ()

    @property
    def modulus(self) -> float:
        return abs(self.a_value)

    def to_dict(self) -> dict:
        c = lambda z: [float(z.real), float(z.imag)]
        return {
            "family": self.family.value, "a": c(self.a_value), "abs_a": self.modulus,
            "lambda": c(self.lambda_value), "gap_before": self.gap_before,
            "refinement_tolerance": self.refinement_tolerance, "ray_angle": self.ray_angle,
            "ray_radius": self.ray_radius, "h_residual": self.h_residual,
            "s": self.s, "u": self.u, "v": self.v, "self_orth": self.self_orth,
            "associated_deviation": self.associated_deviation,
            "doubled_truncation_shift": self.doubled_truncation_shift,
            "verified": self.verified, "notes": list(self.notes),
        }


def _pair_h(family, a: complex, N: int, center: complex):
    w = np.linalg.eigvals(build_tridiagonal(family, a, N).to_dense())
    i, j = np.argsort(np.abs(w - center))[:2]
    return complex((w[i] - w[j]) ** 2), complex(0.5 * (w[i] + w[j]))


def refine_exceptional_point(family, a0: complex, lam0: complex, *, N: int | None = None,
                             max_iter: int = 60) -> tuple[complex, complex, float]:
    """Complex Newton on h(a) = (lambda_1 - lambda_2)^2 for the pair nearest ``lam0``."""
    cls = SymmetryClass(family)
    a, m = complex(a0), complex(lam0)
    if N is None:
        N = truncation_order(a, max(DEFAULT_WINDOW.re_max, abs(m) + 20))
    h = math.inf
    for _ in range(max_iter):
        h, m = _pair_h(cls, a, N, m)
        d = 1e-5 * max(1.0, abs(a))
        hp, _ = _pair_h(cls, a + d, N, m)
        hm, _ = _pair_h(cls, a - d, N, m)
        dh = (hp - hm) / (2 * d)
        if dh == 0:
            break
        step = h / dh
        a -= step
        if abs(step) <= 1e-14 * max(1.0, abs(a)):
            h, m = _pair_h(cls, a, N, m)
            break
    return a, m, abs(h)


def _side(cls: SymmetryClass) -> BoundaryCondition:
    return BoundaryCondition.PERIODIC if cls.periodic else BoundaryCondition.ANTIPERIODIC


def verify_collision(family, a: complex, lam: complex, *, window: Rectangle = DEFAULT_WINDOW
                     ) -> dict:
    """Independent checks of a refined collision.

    Winding multiplicity on the shooting side, self-orthogonality of the
    section eigenvector, the associated-function conditions and the shift of
    the exceptional point under a doubled truncation.
    """
    cls = SymmetryClass(family)
    p = PotentialParams(a)
    N = truncation_order(a, window.re_max)
    out: dict = {}
    a2, lam2, _ = refine_exceptional_point(cls, a, lam, N=2 * N)
    out["doubled_truncation_shift"] = abs(a2 - a)
    others = []
    for f in OPERATOR_FAMILIES["P" if cls.periodic else "A"]:
        others.extend(section_eigenvalues(f, a, window, N))
    others = [z for z in others if abs(z - lam) > 1e-3]
    m = multiplicity(p, lam, _side(cls), neighbors=others)
    out.update(s=m.s, u=m.u, v=m.v)
    op = build_tridiagonal(cls, a, N)
    w = np.linalg.eigvals(op.to_dense())
    nearest = complex(w[int(np.argmin(np.abs(w - lam)))])
    try:
        seq = coefficient_sequence(op, nearest, tol=1e-7)
        out["self_orth"] = abs(self_orthogonality(seq))
    except HillSpecError as exc:
        out["self_orth"] = None
        out.setdefault("notes", []).append(f"self-orthogonality unavailable: {exc}")
    if m.s >= 2 and (m.u >= 2 or m.v >= 2) and not (m.u and m.v):
        bc = _side(cls)
        pt = SpectralPoint(lam, bc, m.s, m.u, m.v, SpectralClass(("P" if cls.periodic else "A")
                                                                 + ("D" if m.u else "N")))
        rep = associated_function_check(p, pt, tol=ASSOCIATED_TOL)
        out["associated_deviation"] = rep.max_deviation
    else:
        out["associated_deviation"] = None
    return out


def scan_ray(family, angle: float, r_max: float, *, steps: int = 240,
             r_min: float = 0.0, window: Rectangle = DEFAULT_WINDOW):
    """Merit (min within-family gap) along one ray: (radii, gaps, pair midpoints)."""
    cls = SymmetryClass(family)
    rs = np.linspace(r_min, r_max, steps + 1)[1:] if r_min == 0 else np.linspace(r_min, r_max, steps)
    gaps, mids = [], []
    for r in rs:
        g, m = min_gap(cls, r * np.exp(1j * angle), window)
        gaps.append(g)
        mids.append(m)
    return rs, np.array(gaps), np.array(mids)


def _ray_collisions(cls: SymmetryClass, angle: float, r_max: float, steps: int,
                    window: Rectangle, tol: float) -> list[CollisionEvent]:
    rs, gaps, mids = scan_ray(cls, angle, r_max, steps=steps, window=window)
    events = []
    dr = rs[1] - rs[0]
    for k in range(1, len(rs) - 1):
        if not (gaps[k] <= gaps[k - 1] and gaps[k] <= gaps[k + 1]):
            continue
        merit = lambda r: min_gap(cls, r * np.exp(1j * angle), window)[0]
        res = minimize_scalar(merit, bounds=(rs[k] - dr, rs[k] + dr), method="bounded",
                              options={"xatol": tol})
        r_star = float(res.x)
        g_star, m_star = min_gap(cls, r_star * np.exp(1j * angle), window)
        a_ep, lam_ep, h = refine_exceptional_point(cls, r_star * np.exp(1j * angle), m_star)
        if h > COLLISION_H * max(1.0, abs(lam_ep)) or abs(a_ep) > r_max * (1 + 1e-9):
            continue
        if not window.contains(lam_ep):
            continue
        events.append(CollisionEvent(a_ep, lam_ep, cls, float(g_star), tol, float(angle),
                                     r_star, float(h)))
    return events


def _dedupe(events: Sequence[CollisionEvent]) -> list[CollisionEvent]:
    out: list[CollisionEvent] = []
    for e in sorted(events, key=lambda e: (e.modulus, e.ray_angle)):
        if any(o.family is e.family and abs(o.a_value - e.a_value) <= 1e-6 * max(1.0, e.modulus)
               and abs(o.lambda_value - e.lambda_value) <= 1e-4 for o in out):
            continue
        out.append(e)
    return out


def find_degeneracies(target, ray_angles: Sequence[float], r_max: float, *,
                      steps: int = 240, window: Rectangle = DEFAULT_WINDOW,
                      tol: float = 1e-6, verify: bool = True, threads: int = 1
                      ) -> list[CollisionEvent]:
    """All collisions seeded from the given rays, sorted by |a|."""
    r_max = check_positive(r_max, "r_max")
    angles = [float(t) for t in ray_angles]
    if not angles:
        raise PreconditionError("at least one ray angle is required")
    work = [(cls, ang) for ang in angles for cls in families_of(target)]
    run = lambda job: _ray_collisions(job[0], job[1], r_max, steps, window, tol)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(run, work))
    else:
        batches = [run(job) for job in work]
    events = _dedupe([e for batch in batches for e in batch])
    if verify:
        events = [_verified(e, window) for e in events]
    return events


def _verified(e: CollisionEvent, window: Rectangle) -> CollisionEvent:
    info = verify_collision(e.family, e.a_value, e.lambda_value, window=window)
    notes = tuple(info.pop("notes", ()))
    ok = (info["s"] >= 2
          and info["self_orth"] is not None and info["self_orth"] <= SELF_ORTH_TOL
          and info["associated_deviation"] is not None
          and info["associated_deviation"] <= ASSOCIATED_TOL)
    return CollisionEvent(e.a_value, e.lambda_value, e.family, e.gap_before,
                          e.refinement_tolerance, e.ray_angle, e.ray_radius, e.h_residual,
                          verified=ok, notes=notes, **info)


def find_minimal_degeneracy(target, ray_angles: Sequence[float], r_max: float, **kwargs
                            ) -> CollisionEvent | None:
    """The collision of smallest |a| seeded from the rays, or None below ``r_max``."""
    events = find_degeneracies(target, ray_angles, r_max, **kwargs)
    return events[0] if events else None
