"""Extended-precision shooting for the few cases double precision cannot resolve.

Even potentials have PD/PN (and AD/AN) eigenvalue pairs whose splitting
falls below one ulp of lambda once Re(lambda) is large.  Deciding whether
such a pair is one eigenvalue or two needs theta'(pi) and phi(pi) with
relative accuracy far below 1e-16, which this module provides with the same
Taylor-series integrator as the double-precision path, carried out in
gmpy2 multiprecision arithmetic one lambda at a time.
"""

from __future__ import annotations

import math

import gmpy2
from gmpy2 import mpc, mpfr

DEFAULT_BITS = 160


def relative_resolution(bits: int = DEFAULT_BITS) -> float:
    """Relative accuracy assumed for values produced at ``bits`` of precision."""
    return 2.0 ** (-(bits - 40))


def precision(bits: int = DEFAULT_BITS):
    """Context manager setting the working precision of gmpy2 arithmetic."""
    return gmpy2.context(gmpy2.get_context(), precision=bits)


def _order_for(bits: int) -> int:
    # with h*w <= 1.5 the truncated term is about 1.5^K / K!
    k = 10
    while k * math.log2(1.5) - math.lgamma(k + 1) / math.log(2) > -(bits + 8):
        k += 2
    return k


def fundamental_values_ext(a, b, lam, bits: int = DEFAULT_BITS):
    """(theta, theta', phi, phi') at pi as gmpy2 ``mpc`` values."""
    with precision(bits):
        a, b, lam = mpc(a), mpc(b), mpc(lam)
        w = math.sqrt(abs(complex(lam)) + 2.0 * (abs(complex(a)) + abs(complex(b))) + 1.0)
        K = _order_for(bits)
        macro = max(8, math.ceil(math.pi * (w + 2.0) / 1.5))
        pi = gmpy2.const_pi()
        H = pi / macro
        two_i = mpc(0, 2)
        fact = [mpfr(math.factorial(j)) for j in range(K + 1)]
        up = [two_i ** j / fact[j] for j in range(K + 1)]
        down = [(-two_i) ** j / fact[j] for j in range(K + 1)]
        hp = [H ** j for j in range(K + 1)]
        state = [[mpc(1), mpc(0)], [mpc(0), mpc(1)]]
        for step in range(macro):
            x0 = H * step
            ep = gmpy2.exp(two_i * x0)
            em = 1 / ep
            qc = [a * em * down[j] + b * ep * up[j] for j in range(K + 1)]
            qc[0] -= lam
            new = []
            for y0, y1 in state:
                c = [y0, y1]
                for k in range(K - 1):
                    acc = mpc(0)
                    for j in range(k + 1):
                        acc += qc[j] * c[k - j]
                    c.append(acc / ((k + 2) * (k + 1)))
                y = mpc(0)
                dy = mpc(0)
                for k in range(K + 1):
                    y += c[k] * hp[k]
                    if k:
                        dy += k * c[k] * hp[k - 1]
                new.append([y, dy])
            state = new
        (th, thp), (ph, php) = state
        return th, thp, ph, php


def secant_root(g, z0, z1, tol, max_iter: int = 40):
    """Secant iteration for a scalar function of one complex variable."""
    f0, f1 = g(z0), g(z1)
    for _ in range(max_iter):
        if f1 == f0:
            break
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        z0, f0 = z1, f1
        z1, f1 = z2, g(z2)
        if abs(z1 - z0) <= tol:
            break
    return z1, f1
