"""Fundamental solutions of -y'' + q(x) y = lambda y on [0, pi].

theta and phi start from (theta, theta') = (1, 0) and (phi, phi') = (0, 1).
Their values at pi determine every spectrum considered here; e.g. the Hill
discriminant is F = phi'(pi) + theta(pi).

Two fixed-grid integrators are provided, both vectorised over a batch of
lambda values:

* ``taylor`` (default): order-24 Taylor series in x on each macro step.  The
  equation is linear and q has closed-form Taylor coefficients, so the
  series coefficients follow from a convolution recurrence.
* ``gbs``: Gragg-Bulirsch-Stoer extrapolation (modified midpoint, step
  sequence 2, 4, ..., 16).  Slower; kept as an independent cross-check.

lambda-derivatives are carried as normalised coefficients
Y_k = (1/k!) d^k y / d lambda^k which obey

    Y_k'' = (q - lambda) Y_k - Y_{k-1},   Y_k(0) = Y_k'(0) = 0  (k >= 1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._extended import fundamental_values_ext, precision
from ._validation import as_complex, as_complex_array, check_int
from .errors import PreconditionError, StiffnessError

MAX_ORDER = 3
METHODS = ("taylor", "gbs")
_SEQUENCE = (2, 4, 6, 8, 10, 12, 14, 16)
_TAYLOR_ORDER = 24
_REL_TOL = 1e-12
_TAYLOR_TOL = 1e-15
_MAX_MACRO_STEPS = 4096


@dataclass(frozen=True)
class PotentialParams:
    """q(x) = a e^{-2ix} + b e^{2ix}; ``b`` defaults to ``a`` (q = 2a cos 2x)."""

    a: complex
    b: complex | None = None

    def __post_init__(self):
        a = as_complex(self.a, "a")
        b = a if self.b is None else as_complex(self.b, "b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def symmetric(cls, a) -> "PotentialParams":
        return cls(a, a)

    @property
    def is_even(self) -> bool:
        return self.a == self.b

    @property
    def effective_a(self) -> complex:
        """A value c with c*c = a*b; P, A and L spectra depend only on ab."""
        return cmath.sqrt(self.a * self.b)

    def q(self, x):
        return self.a * np.exp(-2j * x) + self.b * np.exp(2j * x)


@dataclass(frozen=True)
class Monodromy:
    lam: complex
    theta_pi: complex
    theta_prime_pi: complex
    phi_pi: complex
    phi_prime_pi: complex
    derivative_order: int
    derivatives: np.ndarray  # (order+1, 4): d^k/dlambda^k of (theta, theta', phi, phi')

    @property
    def discriminant(self) -> complex:
        return self.phi_prime_pi + self.theta_pi

    @property
    def wronskian(self) -> complex:
        return self.theta_pi * self.phi_prime_pi - self.phi_pi * self.theta_prime_pi

    def discriminant_derivative(self, k: int = 1) -> complex:
        return complex(self.derivatives[k, 3] + self.derivatives[k, 0])


def _frequency(lam: np.ndarray, p: PotentialParams) -> float:
    return math.sqrt(float(np.max(np.abs(lam), initial=0.0)) + 2.0 * (abs(p.a) + abs(p.b)) + 1.0)


def _macro_steps(lam: np.ndarray, p: PotentialParams, method: str) -> int:
    w = _frequency(lam, p)
    if method == "taylor":
        # q itself oscillates at frequency 2
        return max(8, math.ceil(math.pi * (w + 2.0) / 1.5))
    return max(8, math.ceil(math.pi * w / 0.8))


def _integrate_taylor(p: PotentialParams, lam: np.ndarray, order: int, macro: int):
    K = _TAYLOR_ORDER
    B, m = lam.size, order + 1
    C = np.zeros((K + 1, B, 2, m), dtype=complex)
    Y = np.zeros((B, 2, m), dtype=complex)
    P = np.zeros((B, 2, m), dtype=complex)
    Y[:, 0, 0] = 1.0
    P[:, 1, 0] = 1.0
    lam_b = lam[:, None, None]
    j = np.arange(K + 1)
    fact = np.array([math.factorial(i) for i in range(K + 1)], dtype=float)
    H = math.pi / macro
    hp = H ** j
    dhp = np.concatenate([[0.0], j[1:] * H ** (j[1:] - 1)])
    den = np.array([(k + 2) * (k + 1) for k in range(K - 1)], dtype=float)
    up, down = (2j) ** j / fact, (-2j) ** j / fact
    err = 0.0
    for step in range(macro):
        x0 = step * H
        qc = p.a * cmath.exp(-2j * x0) * down + p.b * cmath.exp(2j * x0) * up
        C[0] = Y
        C[1] = P
        for k in range(K - 1):
            acc = np.tensordot(qc[k::-1], C[:k + 1], axes=1) - lam_b * C[k]
            if m > 1:
                acc[..., 1:] -= C[k][..., :-1]
            C[k + 2] = acc / den[k]
        Y = np.tensordot(hp, C, axes=1)
        P = np.tensordot(dhp, C, axes=1)
        tail = np.abs(C[K]) * hp[K] + np.abs(C[K - 1]) * hp[K - 1]
        scale = np.maximum(1.0, np.maximum(np.abs(Y), np.abs(P)))
        err = max(err, float(np.max(tail / scale)))
    return Y, P, err


def _integrate_gbs(p: PotentialParams, lam: np.ndarray, order: int, macro: int):
    B, m = lam.size, order + 1
    Y = np.zeros((B, 2, m), dtype=complex)
    P = np.zeros((B, 2, m), dtype=complex)
    Y[:, 0, 0] = 1.0
    P[:, 1, 0] = 1.0
    shift = -lam[:, None, None]
    a, b = p.a, p.b

    def accel(x, y):
        r = (a * cmath.exp(-2j * x) + b * cmath.exp(2j * x) + shift) * y
        if m > 1:
            r[..., 1:] -= y[..., :-1]
        return r

    H = math.pi / macro
    err = 0.0
    for step in range(macro):
        x0 = step * H
        table_y, table_p = [], []
        for j, n in enumerate(_SEQUENCE):
            h = H / n
            y0, p0 = Y, P
            y1 = y0 + h * p0
            p1 = p0 + h * accel(x0, y0)
            for i in range(1, n):
                y0, y1 = y1, y0 + 2.0 * h * p1
                p0, p1 = p1, p0 + 2.0 * h * accel(x0 + i * h, y0)
            row_y = [0.5 * (y1 + y0 + h * p1)]
            row_p = [0.5 * (p1 + p0 + h * accel(x0 + H, y1))]
            for k in range(1, j + 1):
                c = (n / _SEQUENCE[j - k]) ** 2 - 1.0
                row_y.append(row_y[k - 1] + (row_y[k - 1] - table_y[j - 1][k - 1]) / c)
                row_p.append(row_p[k - 1] + (row_p[k - 1] - table_p[j - 1][k - 1]) / c)
            table_y.append(row_y)
            table_p.append(row_p)
        Y, P = table_y[-1][-1], table_p[-1][-1]
        delta = np.maximum(np.abs(Y - table_y[-1][-2]), np.abs(P - table_p[-1][-2]))
        scale = np.maximum(1.0, np.maximum(np.abs(Y), np.abs(P)))
        err = max(err, float(np.max(delta / scale)))
    return Y, P, err


def fundamental_values(p: PotentialParams, lam, order: int = 1, *, method: str = "taylor") -> np.ndarray:
    """Batch evaluation of theta, theta', phi, phi' at pi and their lambda-derivatives.

    Returns an array of shape ``lam.shape + (order + 1, 4)`` holding the true
    derivatives d^k/dlambda^k (not Taylor coefficients) of
    (theta(pi), theta'(pi), phi(pi), phi'(pi)).
    """
    order = check_int(order, "order", minimum=0, maximum=MAX_ORDER)
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    lam = as_complex_array(lam, "lambda")
    shape = lam.shape
    flat = lam.ravel()
    if flat.size == 0:
        return np.zeros(shape + (order + 1, 4), dtype=complex)
    macro = _macro_steps(flat, p, method)
    integrate, tol = ((_integrate_taylor, _TAYLOR_TOL) if method == "taylor"
                      else (_integrate_gbs, _REL_TOL))
    while True:
        Y, P, err = integrate(p, flat, order, macro)
        if err <= tol:
            break
        if 2 * macro > _MAX_MACRO_STEPS:
            raise StiffnessError(
                f"local error estimate {err:.2e} above {tol:.0e} with {macro} macro steps")
        macro *= 2
    fact = np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
    out = np.empty((flat.size, order + 1, 4), dtype=complex)
    out[:, :, 0] = Y[:, 0, :] * fact
    out[:, :, 1] = P[:, 0, :] * fact
    out[:, :, 2] = Y[:, 1, :] * fact
    out[:, :, 3] = P[:, 1, :] * fact
    return out.reshape(shape + (order + 1, 4))


def integrate_monodromy(p: PotentialParams, lam, order: int = 0, *, method: str = "taylor") -> Monodromy:
    lam = as_complex(lam, "lambda")
    vals = fundamental_values(p, np.array([lam]), order, method=method)[0]
    return Monodromy(lam, *(complex(v) for v in vals[0]),
                     derivative_order=order, derivatives=vals)


def hill_discriminant(p: PotentialParams, lam):
    """F(lambda) = phi'(pi, lambda) + theta(pi, lambda); scalar in, scalar out."""
    vals = fundamental_values(p, lam, 0)
    F = vals[..., 0, 3] + vals[..., 0, 0]
    return complex(F) if np.ndim(F) == 0 else F


def hill_discriminant_ext(p: PotentialParams, lam, bits: int = 160):
    """F(lambda) at ``bits`` of precision as a gmpy2 ``mpc``.

    Differences of large discriminants lose their digits once rounded to
    double; subtract these values before converting.
    """
    th, _, _, php = fundamental_values_ext(p.a, p.b, as_complex(lam, "lambda"), bits)
    with precision(bits):
        return th + php


@dataclass(frozen=True)
class IdentityReport:
    lhs: np.ndarray
    rhs: np.ndarray
    max_deviation: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tolerance


def discriminant_identity_check(p: PotentialParams, lam, tol: float = 1e-8) -> IdentityReport:
    """Check F^2 - 4 = 4 phi(pi) theta'(pi), valid for even potentials."""
    if not p.is_even:
        raise PreconditionError("the factorisation F^2-4 = 4 phi theta' needs b == a")
    vals = fundamental_values(p, lam, 0)[..., 0, :]
    F = vals[..., 3] + vals[..., 0]
    lhs = F * F - 4.0
    rhs = 4.0 * vals[..., 2] * vals[..., 1]
    dev = float(np.max(np.abs(lhs - rhs)))
    return IdentityReport(lhs, rhs, dev, tol)
