"""Bessel-family special functions and Bessel zeros.

Thin validated layer over scipy.special restricted to what the rest of the
library needs: J_n, Y_n, the Hankel function H1_n = J_n + i Y_n, the modified
Bessel functions K_0, K_1, first-kind zeros, and derivative helpers via the
two-term recurrence.  All functions are pure and thread-safe.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

MAX_ORDER = 200
MAX_ZERO_ORDER = 60
MAX_ZERO_INDEX = 20

_ZERO_SCAN_STEP = 0.5
_ZERO_BISECT_TOL = 1e-13


@dataclass(frozen=True)
class BesselZero:
    """The ``index``-th positive zero of J_``order``."""

    order: int
    index: int
    value: float


def _check_order(order: int) -> int:
    n = int(order)
    if n != order or n < 0:
        raise ValueError(f"order must be a nonnegative integer, got {order!r}")
    if n > MAX_ORDER:
        raise ValueError(f"order {n} exceeds supported maximum {MAX_ORDER}")
    return n


def bessel_j(order: int, x):
    """Bessel function of the first kind J_order(x), x >= 0."""
    n = _check_order(order)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("bessel_j requires finite x >= 0")
    out = _sp.jv(n, x)
    return out if out.ndim else float(out)


def bessel_y(order: int, x):
    """Bessel function of the second kind Y_order(x), x > 0 (singular at 0)."""
    n = _check_order(order)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise ValueError("bessel_y requires finite x > 0")
    out = _sp.yv(n, x)
    return out if out.ndim else float(out)


def hankel1(order: int, x):
    """First-kind Hankel function, built as J + iY so the identity is exact."""
    return bessel_j(order, x) + 1j * bessel_y(order, x)


def mod_bessel_k(order: int, x):
    """Modified Bessel function K_order(x) for order in {0, 1}, x > 0."""
    if order not in (0, 1):
        raise ValueError(f"mod_bessel_k supports orders 0 and 1, got {order!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise ValueError("mod_bessel_k requires finite x > 0")
    out = _sp.kv(order, x)
    return out if out.ndim else float(out)


def bessel_jp(order: int, x):
    """dJ_order/dx via the recurrence (J_{n-1} - J_{n+1})/2, with J_{-1} = -J_1."""
    n = _check_order(order)
    lower = -bessel_j(1, x) if n == 0 else bessel_j(n - 1, x)
    upper = _sp.jv(n + 1, np.asarray(x, dtype=float))  # order n+1 allowed internally
    return 0.5 * (lower - upper)


def bessel_yp(order: int, x):
    """dY_order/dx via the recurrence, with Y_{-1} = -Y_1."""
    n = _check_order(order)
    lower = -bessel_y(1, x) if n == 0 else bessel_y(n - 1, x)
    upper = _sp.yv(n + 1, np.asarray(x, dtype=float))
    return 0.5 * (lower - upper)


def hankel1p(order: int, x):
    """dH1_order/dx via the recurrence."""
    return bessel_jp(order, x) + 1j * bessel_yp(order, x)


def _scan_upper(order: int, index: int) -> float:
    # j_{n,m} < n + (m + 1) * pi + 2 n^{1/3} covers the supported range
    return order + (index + 1) * np.pi + 2.0 * order ** (1.0 / 3.0) + 2.0


@lru_cache(maxsize=None)
def _zeros_upto(order: int, index: int) -> tuple[float, ...]:
    """First ``index`` positive zeros of J_order by bracketing + bisection."""
    zeros: list[float] = []
    f = lambda t: _sp.jv(order, t)
    x0 = _ZERO_SCAN_STEP * 0.5  # skip the trivial zero of J_n (n >= 1) at 0
    f0 = f(x0)
    upper = _scan_upper(order, index)
    while len(zeros) < index and x0 < upper:
        x1 = x0 + _ZERO_SCAN_STEP
        f1 = f(x1)
        if f0 == 0.0:  # grid hit a zero exactly; nudge
            zeros.append(x0)
            f0 = f(x0 + 1e-9)
        elif f0 * f1 < 0.0:
            a, b, fa = x0, x1, f0
            while b - a > _ZERO_BISECT_TOL:
                m = 0.5 * (a + b)
                fm = f(m)
                if fm == 0.0:
                    a = b = m
                elif fa * fm < 0.0:
                    b = m
                else:
                    a, fa = m, fm
            zeros.append(0.5 * (a + b))
        x0, f0 = x1, f1
    if len(zeros) < index:
        raise RuntimeError(f"zero scan exhausted for order={order}, index={index}")
    return tuple(zeros)


def bessel_j_zero(order: int, index: int) -> float:
    """The ``index``-th positive zero of J_order (index >= 1)."""
    n = _check_order(order)
    if n > MAX_ZERO_ORDER:
        raise ValueError(f"zero order {n} exceeds supported maximum {MAX_ZERO_ORDER}")
    m = int(index)
    if m != index or m < 1 or m > MAX_ZERO_INDEX:
        raise ValueError(f"zero index must be in [1, {MAX_ZERO_INDEX}], got {index!r}")
    return _zeros_upto(n, m)[m - 1]


def bessel_zeros_below(order: int, bound: float) -> list[BesselZero]:
    """All positive zeros of J_order below ``bound``, as BesselZero records."""
    out: list[BesselZero] = []
    m = 1
    while m <= MAX_ZERO_INDEX:
        z = bessel_j_zero(order, m)
        if z >= bound:
            break
        out.append(BesselZero(order=order, index=m, value=z))
        m += 1
    return out
