"""Finite sections of the Fourier-coefficient recurrences for q(x) = 2a cos 2x.

Each eigenfunction of P(a), A(a), D(a), N(a) lies in one of four parity
classes, and its Fourier coefficients satisfy a three-term recurrence:

    PN   a0/sqrt(2) + sum a_k cos 2kx       centres (2k)^2,   k >= 0
    PD   sum b_k sin 2kx                    centres (2k)^2,   k >= 1
    AD   sum c_k sin (2k-1)x                centres (2k-1)^2, k >= 1
    AN   sum d_k cos (2k-1)x                centres (2k-1)^2, k >= 1

The recurrences are the eigenproblems of complex-symmetric tridiagonal
matrices; truncating at N terms gives the finite sections handled here.
Positions in the arrays are 0-based, ``SymmetryClass.first_index`` maps
them back to Fourier indices.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

import numpy as np

from ._validation import as_complex, check_int
from .errors import (
    ConvergenceError,
    DegenerateLeadingCoefficientError,
    DivisionGuardError,
    InvalidTruncationError,
    NoEigenvectorError,
)

SQRT2 = math.sqrt(2.0)
RESIDUAL_TOL = 1e-10
SORT_FUZZ = 1e-12


class SymmetryClass(str, Enum):
    PN = "PN"
    PD = "PD"
    AD = "AD"
    AN = "AN"

    @property
    def first_index(self) -> int:
        return 0 if self is SymmetryClass.PN else 1

    @property
    def periodic(self) -> bool:
        return self in (SymmetryClass.PN, SymmetryClass.PD)

    @property
    def dirichlet(self) -> bool:
        return self in (SymmetryClass.PD, SymmetryClass.AD)

    def center(self, k: int) -> int:
        """Unperturbed eigenvalue attached to Fourier index ``k``."""
        return (2 * k) ** 2 if self.periodic else (2 * k - 1) ** 2

    def centers(self, n: int) -> np.ndarray:
        k = np.arange(self.first_index, self.first_index + n)
        return (2 * k) ** 2 if self.periodic else (2 * k - 1) ** 2


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    diagonal: np.ndarray
    offdiagonal: np.ndarray
    symmetry_class: SymmetryClass
    truncation_order: int
    param_a: complex

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diagonal)
                + np.diag(self.offdiagonal, 1)
                + np.diag(self.offdiagonal, -1))

    @functools.cached_property
    def norm(self) -> float:
        return float(np.linalg.norm(self.to_dense(), 2))

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[:-1] += self.offdiagonal * v[1:]
        out[1:] += self.offdiagonal * v[:-1]
        return out


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    values: np.ndarray
    symmetry_class: SymmetryClass
    lam: complex
    operator: TridiagonalOperator

    @property
    def indices(self) -> np.ndarray:
        first = self.symmetry_class.first_index
        return np.arange(first, first + len(self.values))

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    @property
    def residual(self) -> float:
        """max_k |(T v)_k - lambda v_k| over all rows of the finite section."""
        r = self.operator.apply(self.values) - self.lam * self.values
        return float(np.max(np.abs(r)))

    def coefficient(self, k: int) -> complex:
        """Coefficient with Fourier index ``k`` (zero outside the section)."""
        j = k - self.symmetry_class.first_index
        if 0 <= j < len(self.values):
            return complex(self.values[j])
        return 0j


@dataclass(frozen=True)
class TailBoundReport:
    indices: tuple
    distance: float
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def truncation_order(a, re_max: float) -> int:
    """Section size adequate for eigenvalues with real part up to ``re_max``."""
    a = as_complex(a, "a")
    re = max(float(re_max), 0.0)
    return max(32, 2 * math.ceil(math.sqrt(re)) + math.ceil(4 * math.sqrt(abs(a))) + 16)


def build_tridiagonal(symmetry_class, a, N: int) -> TridiagonalOperator:
    cls = SymmetryClass(symmetry_class)
    a = as_complex(a, "a")
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise TypeError("truncation order N must be an integer")
    if N < 2:
        raise InvalidTruncationError(f"truncation order must be >= 2, got {N}")
    N = int(N)
    diag = cls.centers(N).astype(complex)
    off = np.full(N - 1, a, dtype=complex)
    if cls is SymmetryClass.PN:
        off[0] = SQRT2 * a
    elif cls is SymmetryClass.AN:
        # 2a cos2x cos x = a(cos x + cos 3x): the cos x mode feeds back on itself
        diag[0] += a
    elif cls is SymmetryClass.AD:
        # 2a cos2x sin x = a(sin 3x - sin x)
        diag[0] -= a
    return TridiagonalOperator(diag, off, cls, N, a)


def sort_spectrum(values, fuzz: float = SORT_FUZZ) -> np.ndarray:
    """Sort lexicographically by (Re, Im); real parts within ``fuzz`` tie."""
    values = np.asarray(values, dtype=complex)

    def cmp(x, y):
        if abs(x.real - y.real) > fuzz * max(1.0, abs(x.real), abs(y.real)):
            return -1 if x.real < y.real else 1
        if x.imag == y.imag:
            return 0
        return -1 if x.imag < y.imag else 1

    return np.array(sorted(values, key=functools.cmp_to_key(cmp)), dtype=complex)


def _eig(op: TridiagonalOperator):
    try:
        w, V = np.linalg.eig(op.to_dense())
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigen-solver failed: {exc}") from exc
    return w, V


def truncated_spectrum(op: TridiagonalOperator) -> np.ndarray:
    """All eigenvalues of the finite section, residual-checked and sorted."""
    w, V = _eig(op)
    T = op.to_dense()
    limit = RESIDUAL_TOL * max(1.0, op.norm)
    res = np.linalg.norm(T @ V - V * w, axis=0) / np.linalg.norm(V, axis=0)
    bad = np.nonzero(res > limit)[0]
    if bad.size:
        i = int(bad[0])
        raise ConvergenceError(
            f"eigenpair {i} has residual {res[i]:.3e} > {limit:.3e}", index=i)
    return sort_spectrum(w)


def _backward_ratios(op: TridiagonalOperator, lam: complex, start: int) -> np.ndarray:
    """r_k = v_k / v_{k-1} for k >= start, from the bottom of the section."""
    d, e = op.diagonal, op.offdiagonal
    N = op.truncation_order
    r = np.zeros(N, dtype=complex)
    nxt = 0j
    for k in range(N - 1, start - 1, -1):
        tail = e[k] * nxt if k < N - 1 else 0j
        nxt = e[k - 1] / (lam - d[k] - tail)
        r[k] = nxt
    return r


def coefficient_sequence(op: TridiagonalOperator, lam, *, tol: float = 1e-9) -> CoefficientSequence:
    """Normalised eigenvector of the finite section at eigenvalue ``lam``.

    The phase is fixed so that the entry of largest modulus is real and
    positive; for real ``a`` the whole vector is then real.  Past the last
    turning index (|lam - centre_k| > 2|a| from there on) the tail is rebuilt
    from backward continued-fraction ratios, which keeps the tiny trailing
    coefficients accurate relative to their own size.
    """
    lam = as_complex(lam, "lambda")
    T = op.to_dense()
    N = op.truncation_order
    _, s, Vh = np.linalg.svd(T - lam * np.eye(N))
    limit = tol * max(1.0, op.norm)
    if s[-1] > limit:
        raise NoEigenvectorError(
            f"lambda={lam} is not an eigenvalue of the {op.symmetry_class.value} "
            f"section (smallest singular value {s[-1]:.3e} > {limit:.3e})")
    v = Vh[-1].conj()

    a_abs = abs(op.param_a)
    if a_abs > 0:
        far = np.abs(lam - op.symmetry_class.centers(N)) > 3.0 * a_abs
        peak = int(np.argmax(np.abs(v)))
        start = None
        for k in range(N - 1, peak, -1):
            if not far[k]:
                break
            start = k
        if start is not None and start >= 1:
            r = _backward_ratios(op, lam, start)
            for k in range(start, N):
                v[k] = v[k - 1] * r[k]

    v = v / np.linalg.norm(v)
    peak = int(np.argmax(np.abs(v)))
    v = v * (abs(v[peak]) / v[peak])
    if a_abs > 0 and abs(v[0]) < 1e-12:
        raise DegenerateLeadingCoefficientError(
            f"leading coefficient {abs(v[0]):.3e} vanished for a={op.param_a}, lambda={lam}")
    return CoefficientSequence(v, op.symmetry_class, lam, op)


def self_orthogonality(seq: CoefficientSequence) -> complex:
    """sum_k c_k^2 without conjugation; vanishes at a multiple eigenvalue."""
    return complex(np.sum(seq.values ** 2))


IndexSet = Union[int, Iterable[int]]


def tail_bound_check(seq: CoefficientSequence, a, indices: IndexSet) -> TailBoundReport:
    """Evaluate sum_{k in I} |c_k|^2 <= 4|a|^2 / d(lambda, I)^2 on ``seq``.

    ``indices`` is either an explicit collection of Fourier indices or an
    integer ``m`` meaning the infinite tail {m, m+1, ...}.  Coefficients
    beyond the finite section count as zero.
    """
    a = as_complex(a, "a")
    cls = seq.symmetry_class
    first = cls.first_index
    N = len(seq.values)
    if isinstance(indices, (int, np.integer)):
        m = max(int(indices), first)
        # centres grow monotonically: the minimum distance is attained by
        # the first few indices past the turning point
        kmax = max(m, first + N) + 8
        ks = range(m, kmax + 1)
        chosen = tuple(range(m, first + N))
    else:
        ks = sorted({check_int(k, "index", minimum=first) for k in indices})
        chosen = tuple(ks)
    if not ks:
        raise ValueError("index set is empty")
    dist = min(abs(seq.lam - cls.center(k)) for k in ks)
    if dist == 0:
        raise DivisionGuardError("d(lambda, I) = 0: lambda coincides with an index centre")
    lhs = float(sum(abs(seq.coefficient(k)) ** 2 for k in chosen))
    rhs = 4.0 * abs(a) ** 2 / dist ** 2
    return TailBoundReport(chosen, float(dist), lhs, rhs)


def family_spectrum(symmetry_class, a, re_max: float, *, N: int | None = None) -> np.ndarray:
    """Finite-section eigenvalues of one family with Re(lambda) <= re_max."""
    if N is None:
        N = truncation_order(a, re_max)
    w = truncated_spectrum(build_tridiagonal(symmetry_class, a, N))
    return w[w.real <= re_max]
