"""Argument-principle root isolation for batched analytic functions.

An analytic function here is any callable ``func(z, nderiv)`` taking a 1-D
complex array and returning an array of shape ``(nderiv + 1, len(z))`` with
the function and its first ``nderiv`` derivatives.  Evaluations are costly
and have a large fixed overhead per call, so every stage below gathers the
points of all pending boxes into a single call.

Box coordinates live on a dyadic lattice so that the edges of child boxes
reuse the samples of their parents exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import LocalizationError

LATTICE = 1.0 / 64
_COARSE = 0.5
_MAX_ARG_STEP = math.pi / 4
_MIN_SEGMENT = 2.0 ** -14
_GL_NODES = (32, 64)
_CUT_FRACTIONS = (0.5, 0.375, 0.625, 0.4375, 0.5625, 0.3125, 0.6875, 0.25, 0.75)


def _snap_down(x: float) -> float:
    return math.floor(x / LATTICE) * LATTICE


def _snap_up(x: float) -> float:
    return math.ceil(x / LATTICE) * LATTICE


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError(f"empty rectangle {self}")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    @property
    def half_diagonal(self) -> float:
        return 0.5 * math.hypot(self.width, self.height)

    def contains(self, z, slack: float = 0.0) -> bool:
        return (self.re_min - slack <= z.real <= self.re_max + slack
                and self.im_min - slack <= z.imag <= self.im_max + slack)

    def snapped(self) -> "Rectangle":
        """Smallest lattice-aligned rectangle containing this one."""
        return Rectangle(_snap_down(self.re_min), _snap_up(self.re_max),
                         _snap_down(self.im_min), _snap_up(self.im_max))

    def as_tuple(self):
        return (self.re_min, self.re_max, self.im_min, self.im_max)


class _Cache:
    """Memoised first-order samples ``(f, f')`` keyed by the exact point."""

    def __init__(self, func):
        self.func = func
        self.store: dict[complex, tuple[complex, complex]] = {}
        self.calls = 0

    def fill(self, points) -> None:
        missing = list(dict.fromkeys(z for z in points if z not in self.store))
        if not missing:
            return
        z = np.array(missing, dtype=complex)
        out = self.func(z, 1)
        self.calls += 1
        for zi, f, df in zip(missing, out[0], out[1]):
            self.store[zi] = (complex(f), complex(df))

    def value(self, z: complex) -> complex:
        return self.store[z][0]

    def newton_distance(self, z: complex) -> float:
        f, df = self.store[z]
        if f == 0:
            return 0.0
        return abs(f / df) if df != 0 else math.inf


@dataclass(eq=False)
class _Edge:
    """Axis-parallel segment from its lower to its upper end."""

    points: list
    resolved: bool = False
    close: bool = False   # a root lies within _MIN_SEGMENT of the edge
    turn: float = 0.0     # total change of arg f, in units of 2 pi


def _edge_points(z0: complex, z1: complex) -> list:
    horizontal = z0.imag == z1.imag
    lo, hi = (z0.real, z1.real) if horizontal else (z0.imag, z1.imag)
    k0, k1 = math.floor(lo / _COARSE) + 1, math.ceil(hi / _COARSE) - 1
    inner = [k * _COARSE for k in range(k0, k1 + 1) if lo < k * _COARSE < hi]
    ts = [lo] + inner + [hi]
    if horizontal:
        return [complex(t, z0.imag) for t in ts]
    return [complex(z0.real, t) for t in ts]


class _Tracker:
    def __init__(self, cache: _Cache):
        self.cache = cache
        self.edges: dict[tuple, _Edge] = {}

    def _edge(self, z0: complex, z1: complex) -> _Edge:
        key = (z0, z1)
        if key not in self.edges:
            self.edges[key] = _Edge(_edge_points(z0, z1))
        return self.edges[key]

    def box_edges(self, r: Rectangle):
        """The four canonical edges of ``r`` with their ccw orientation signs.

        Order: bottom, right, top, left.
        """
        a = complex(r.re_min, r.im_min)
        b = complex(r.re_max, r.im_min)
        c = complex(r.re_max, r.im_max)
        d = complex(r.re_min, r.im_max)
        return [(self._edge(a, b), 1), (self._edge(b, c), 1),
                (self._edge(d, c), -1), (self._edge(a, d), -1)]

    def resolve(self, edges) -> None:
        pending = [e for e in dict.fromkeys(edges) if not e.resolved]
        cache = self.cache
        while pending:
            cache.fill(z for e in pending for z in e.points)
            still = []
            for e in pending:
                pts = e.points
                refined = [pts[0]]
                changed = False
                for z0, z1 in zip(pts[:-1], pts[1:]):
                    seg = abs(z1 - z0)
                    f0, f1 = cache.value(z0), cache.value(z1)
                    if f0 == 0 or f1 == 0:
                        bad = True
                    else:
                        step = abs(np.angle(f1 / f0))
                        near = min(cache.newton_distance(z0), cache.newton_distance(z1))
                        bad = step > _MAX_ARG_STEP or near < seg
                    if bad:
                        if seg <= _MIN_SEGMENT:
                            e.close = True
                        else:
                            need = step / _MAX_ARG_STEP if f0 != 0 and f1 != 0 else 2.0
                            if f0 != 0 and f1 != 0 and near > 0:
                                need = min(max(need, 2.0 * seg / near), 16.0)
                            # power-of-two split keeps the points dyadic
                            n = 2 ** min(4, max(1, math.ceil(math.log2(max(need, 2.0)))))
                            refined.extend(z0 + (z1 - z0) * (i / n) for i in range(1, n))
                            changed = True
                    refined.append(z1)
                e.points = refined
                if changed and not e.close:
                    still.append(e)
                else:
                    e.resolved = True
                    if not e.close:
                        vals = np.array([cache.value(z) for z in e.points])
                        e.turn = float(np.sum(np.angle(vals[1:] / vals[:-1]))) / (2 * math.pi)
            pending = still


def _winding_of(edges) -> float | None:
    if any(e.close for e, _ in edges):
        return None
    return sum(sign * e.turn for e, sign in edges)


def _count(total: float | None, box: Rectangle) -> int:
    if total is None:
        raise LocalizationError("a root lies on the contour", box)
    count = round(total)
    if abs(total - count) > 1e-3 or count < 0:
        raise LocalizationError(f"non-integer winding {total:.6f}", box)
    return count


def winding(func, rect: Rectangle) -> int:
    """Number of roots of ``func`` inside the lattice-snapped ``rect``."""
    rect = rect.snapped()
    tracker = _Tracker(_Cache(func))
    edges = tracker.box_edges(rect)
    tracker.resolve([e for e, _ in edges])
    return _count(_winding_of(edges), rect)


def _clearance(cache: _Cache, points) -> float:
    """Newton-step estimate of the distance from ``points`` to the nearest root."""
    points = list(points)
    scale = max(abs(cache.value(z)) for z in points)
    # at a multiple root f and f' are both rounding noise, so f/f' says nothing
    floor = 1e-13 * scale
    return min(0.0 if abs(cache.value(z)) <= floor else cache.newton_distance(z) for z in points)


def _nudged_region(tracker: _Tracker, rect: Rectangle, clearance: float, attempts: int = 8):
    """Move edges outward by lattice steps until roots keep ``clearance`` away."""
    rect = rect.snapped()
    step = max(LATTICE, _snap_up(clearance))
    for _ in range(attempts):
        edges = tracker.box_edges(rect)
        tracker.resolve([e for e, _ in edges])
        bounds = list(rect.as_tuple())
        moved = False
        for i, (e, _) in enumerate(edges):
            if e.close or _clearance(tracker.cache, e.points) < clearance:
                j, sgn = [(2, -1), (1, 1), (3, 1), (0, -1)][i]
                bounds[j] += sgn * step
                moved = True
        if not moved:
            return rect, edges
        rect = Rectangle(*bounds)
        step *= 2
    raise LocalizationError("could not move the contour away from a root", rect)


def _gauss_edges(rect: Rectangle, n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    zs, dzs = [], []
    c = (complex(rect.re_min, rect.im_min), complex(rect.re_max, rect.im_min),
         complex(rect.re_max, rect.im_max), complex(rect.re_min, rect.im_max))
    for i in range(4):
        z0, z1 = c[i], c[(i + 1) % 4]
        half = 0.5 * (z1 - z0)
        zs.append(z0 + half * (t + 1.0))
        dzs.append(half * w)
    return np.concatenate(zs), np.concatenate(dzs)


def _roots_from_power_sums(s: np.ndarray) -> np.ndarray:
    n = len(s) - 1
    e = [1.0 + 0j]
    for k in range(1, n + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * s[i] for i in range(1, k + 1))
        e.append(acc / k)
    coeffs = [(-1) ** k * e[k] for k in range(n + 1)]
    return np.roots(coeffs) if n > 1 else np.array([-coeffs[1]])


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    residual: float


def polish(func, seeds, mult, iterations: int = 25):
    """Batched Newton on f^(m-1) for each seed of cluster size m."""
    z = np.array(seeds, dtype=complex)
    mult = np.asarray(mult, dtype=int)
    if z.size == 0:
        return z, np.zeros(0)
    order = int(mult.max())
    active = np.ones(z.size, dtype=bool)
    for _ in range(iterations):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        d = func(z[idx], order)
        cols = np.arange(idx.size)
        g = d[mult[idx] - 1, cols]
        dg = d[mult[idx], cols]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dg != 0, g / dg, 0)
        step = np.where(np.isfinite(step), step, 0)
        z[idx] -= step
        done = np.abs(step) <= 4e-15 * np.maximum(1.0, np.abs(z[idx]))
        active[idx[done]] = False
    res = np.abs(func(z, 0)[0])
    return z, res


def _clusters(points: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, p in enumerate(points):
        for g in groups:
            if min(abs(p - points[j]) for j in g) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _moment_sums(func, boxes):
    """Scaled power sums of the roots in each ``(box, count)`` at two quadrature sizes."""
    chunks = []
    for box, _ in boxes:
        for n in _GL_NODES:
            chunks.append(_gauss_edges(box, n))
    z = np.concatenate([c[0] for c in chunks])
    dz = np.concatenate([c[1] for c in chunks])
    out = func(z, 1)
    ratio = out[1] / out[0] * dz / (2j * math.pi)
    results, lo = [], 0
    for box, count in boxes:
        c, rho = box.center, box.half_diagonal
        sums = []
        for n in _GL_NODES:
            hi = lo + 4 * n
            u = (z[lo:hi] - c) / rho
            sums.append(np.array([np.sum(u ** p * ratio[lo:hi]) for p in range(count + 1)]))
            lo = hi
        results.append(sums)
    return results


def _probe_points(z0: complex, z1: complex) -> list:
    """Coarse edge points plus eight dyadic subdivisions of a short cut."""
    pts = _edge_points(z0, z1) + [z0 + (z1 - z0) * (i / 8) for i in range(1, 8)]
    return list(dict.fromkeys(pts))


def _cut_options(tracker: _Tracker, boxes):
    """Lattice cuts for every box, best first, keeping them away from roots."""
    cands = []
    for box in boxes:
        vertical = box.width >= box.height
        lo, span = (box.re_min, box.width) if vertical else (box.im_min, box.height)
        opts = []
        for frac in _CUT_FRACTIONS:
            x = lo + _snap_down(frac * span)
            if not (lo < x < lo + span) or any(x == o for o, _ in opts):
                continue
            if vertical:
                seg = (complex(x, box.im_min), complex(x, box.im_max))
            else:
                seg = (complex(box.re_min, x), complex(box.re_max, x))
            opts.append((x, seg))
        if not opts:
            raise LocalizationError("box too small to split on the lattice", box)
        cands.append((box, vertical, span, opts))
    tracker.cache.fill(z for _, _, _, opts in cands for _, seg in opts for z in _probe_points(*seg))
    out = []
    for box, vertical, span, opts in cands:
        scored = [(_clearance(tracker.cache, _probe_points(*seg)), i, x)
                  for i, (x, seg) in enumerate(opts)]
        # first cut in preference order that is clear enough, then the rest by clearance
        good = [t for t in scored if t[0] >= 0.05 * span][:1]
        rest = sorted((t for t in scored if t not in good), key=lambda t: (-t[0], t[1]))
        pairs = []
        for _, _, x in good + rest:
            if vertical:
                pairs.append((replace(box, re_max=x), replace(box, re_min=x)))
            else:
                pairs.append((replace(box, im_max=x), replace(box, im_min=x)))
        out.append(pairs)
    return out


def _child_counts(tracker: _Tracker, left: Rectangle, right: Rectangle):
    le, re_ = tracker.box_edges(left), tracker.box_edges(right)
    tracker.resolve([e for e, _ in le + re_])
    return _count(_winding_of(le), left), _count(_winding_of(re_), right)


def _accept(items, box: Rectangle, count: int, residual_tol: float) -> bool:
    rho = box.half_diagonal
    slack = 1e-9 * max(1.0, abs(box.center))
    if sum(m for _, m, _, _ in items) != count:
        return False
    for zi, _, ri, s0 in items:
        if not (box.contains(zi, slack) and ri <= residual_tol and abs(zi - s0) <= 0.25 * rho):
            return False
    vals = [zi for zi, _, _, _ in items]
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) <= 1e-12 * max(1.0, abs(vals[i])):
                return False
    return True


@dataclass(frozen=True)
class RootSearch:
    roots: list
    region: Rectangle
    winding: int
    calls: int


def find_roots(func, rect: Rectangle, *, residual_tol: float = 1e-9,
               cluster_tol: float = 1e-5, max_cluster: int = 3,
               max_side: float = 8.0, clearance: float | None = None,
               max_levels: int = 40) -> RootSearch:
    """All roots of ``func`` inside ``rect`` with multiplicities.

    The outer contour is snapped to the lattice and moved outward off any
    nearby root.  Boxes are then split until each holds at most
    ``max_cluster`` roots and is small enough for contour-moment quadrature;
    seeds from the moments are polished by Newton.  A cluster is accepted as
    a multiple root only if Newton on the derivative lands on a point where
    ``func`` itself is below ``residual_tol``; otherwise the box is split.
    """
    cache = _Cache(func)
    tracker = _Tracker(cache)
    if clearance is None:
        clearance = min(0.02, 0.01 * min(rect.width, rect.height))
    region, edges = _nudged_region(tracker, rect, clearance)
    total = _count(_winding_of(edges), region)

    roots: list[Root] = []
    level = [(region, total)]
    settled: list = []
    for _ in range(max_levels):
        level = [(b, c) for b, c in level if c > 0]
        if not level and not settled:
            break
        todo = []
        small = [(b, c) for b, c in level
                 if c <= max_cluster and max(b.width, b.height) <= max_side]
        if small:
            for key, (s32, s64) in zip(small, _moment_sums(func, small)):
                box, count = key
                scale = max(1.0, float(np.max(np.abs(s64))))
                converged = np.max(np.abs(s64 - s32)) <= 1e-8 * scale and abs(s64[0] - count) <= 1e-6
                # a lone root near an edge slows the quadrature; Newton and _accept still decide
                if not converged and not (count == 1 and abs(s64[0] - 1) <= 0.25):
                    todo.append(key)
                    continue
                seeds = box.center + box.half_diagonal * _roots_from_power_sums(s64)
                groups = _clusters(seeds, cluster_tol * box.half_diagonal)
                settled.append((key, [(np.mean(seeds[g]), len(g)) for g in groups]))
        todo.extend((b, c) for b, c in level if (b, c) not in small)
        if not todo and settled:
            # one batched polish for every box whose moments converged
            seeds = [s for _, items in settled for s, _ in items]
            mult = [m for _, items in settled for _, m in items]
            z, res = polish(func, seeds, mult)
            i = 0
            for key, items in settled:
                polished = []
                for s0, m in items:
                    polished.append((complex(z[i]), m, float(res[i]), s0))
                    i += 1
                if _accept(polished, *key, residual_tol):
                    roots.extend(Root(zi, int(mi), ri) for zi, mi, ri, _ in polished)
                else:
                    todo.append(key)
            settled = []
        if not todo:
            level = []
            continue
        for b, _ in todo:
            if max(b.width, b.height) <= 4 * LATTICE:
                raise LocalizationError("root isolation reached the lattice resolution", b)
        options = _cut_options(tracker, [b for b, _ in todo])
        # resolve the preferred cuts of all boxes in one batch
        tracker.resolve([e for opts in options for half in opts[0] for e, _ in tracker.box_edges(half)])
        level = []
        for (box, count), opts in zip(todo, options):
            for left, right in opts:
                try:
                    cl, cr = _child_counts(tracker, left, right)
                except LocalizationError:
                    continue
                break
            else:
                raise LocalizationError("every lattice cut passes through a root", box)
            if cl + cr != count:
                raise LocalizationError(f"winding mismatch {cl}+{cr} != {count} after split", box)
            level.extend([(left, cl), (right, cr)])
    else:
        raise LocalizationError("subdivision limit reached", region)

    found = sum(r.multiplicity for r in roots)
    if found != total:
        raise LocalizationError(f"found {found} roots, contour winding is {total}", region)
    roots.sort(key=lambda r: (r.value.real, r.value.imag))
    return RootSearch(roots, region, total, cache.calls)


def track_rows(rows_at, n: int = 32, max_rounds: int = 16):
    """Windings of several functions sampled together along a closed curve.

    ``rows_at(t)`` evaluates the functions at curve parameters ``t`` in
    [0, 1) and returns an ``(m, len(t))`` complex array.  Returns the total
    windings (not rounded, NaN if refinement stalled) and the final samples.
    """
    t = np.arange(n) / n
    f = rows_at(t)
    for _ in range(max_rounds):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.angle(np.roll(f, -1, axis=1) / f)
        bad = np.nonzero(np.any(~(np.abs(step) <= _MAX_ARG_STEP), axis=0))[0]
        if bad.size == 0:
            break
        nxt = np.where(bad + 1 < t.size, t[(bad + 1) % t.size], 1.0)
        mids = 0.5 * (t[bad] + nxt)
        t = np.insert(t, bad + 1, mids)
        f = np.insert(f, bad + 1, rows_at(mids), axis=1)
    else:
        return np.full(f.shape[0], math.nan), f
    totals = np.sum(np.angle(np.roll(f, -1, axis=1) / f), axis=1) / (2 * math.pi)
    return totals, f


def integer_windings(totals) -> list[int]:
    """Round windings to integers; -1 marks an unresolved or non-integer value."""
    out = []
    for t in totals:
        if not np.isfinite(t):
            out.append(-1)
            continue
        c = round(float(t))
        out.append(c if abs(t - c) <= 1e-3 else -1)
    return out
