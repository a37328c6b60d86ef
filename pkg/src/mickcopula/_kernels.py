"""Compiled inner loops for the greedy window solver.

A move on rows ``i < k`` and columns ``j < l`` adds ``x`` to ``p[i, j]`` and
``p[k, l]`` and subtracts it from ``p[i, l]`` and ``p[k, j]``.  For
``k = i + 1, l = j + 1`` it is the plain window move; wider rectangles are
sums of window moves.  Either way the move solves

    log((a + x)(d + x) / ((b - x)(c - x))) = target

for the unique root keeping all four cells positive.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def window_root(a, b, c, d, log_k):
    """Admissible root of ``(a+x)(d+x) - K (b-x)(c-x) = 0`` with ``K = exp(log_k)``.

    Returns ``nan`` if the window has no admissible root (a zero on both
    sides of the required move).
    """
    # divide through by the larger of 1 and K so neither coefficient overflows;
    # the discriminant is expanded into nonnegative terms, which avoids the
    # cancellation of qb^2 - 4 qa qc when K is far from 1
    if log_k > 0.0:
        s = math.exp(-log_k)
        qa = s - 1.0
        qb = (a + d) * s + (b + c)
        qc = a * d * s - b * c
        disc = s * s * (a - d) ** 2 + (b - c) ** 2 + 2.0 * s * (a + d) * (b + c) + 4.0 * s * (a * d + b * c)
    else:
        k = math.exp(log_k)
        qa = -math.expm1(log_k)
        qb = a + d + k * (b + c)
        qc = a * d - k * b * c
        disc = (a - d) ** 2 + k * k * (b - c) ** 2 + 2.0 * k * (a + d) * (b + c) + 4.0 * k * (a * d + b * c)
    if qb <= 0.0:
        return np.nan
    # f(-min(a, d)) < 0 < f(min(b, c)) pins the admissible root to C / q
    q = -0.5 * (qb + math.sqrt(disc))
    return qc / q


@njit(cache=True)
def rectangle_mass(p, i, k, j, l):
    """Sum of window masses over all unit windows inside rows i..k, cols j..l."""
    s = 0.0
    for r in range(i, k + 1):
        wr = 1.0 if (r == i or r == k) else 2.0
        for c in range(j, l + 1):
            wc = 1.0 if (c == j or c == l) else 2.0
            s += wr * wc * p[r, c]
    return s


@njit(cache=True)
def sweep(p, rows, cols, heights, widths, ratio, pseudo, floor):
    """Apply one pass of rectangle moves in the given order, in place.

    ``pseudo`` selects the Kendall target ``ratio * (window mass)``; otherwise
    the target is ``ratio * height * width``.  Returns the number of moves
    that had to be clamped to keep cells at or above ``floor``.
    """
    clamped = 0
    for t in range(rows.shape[0]):
        i = rows[t]
        j = cols[t]
        k = i + heights[t]
        l = j + widths[t]
        if pseudo:
            target = ratio * rectangle_mass(p, i, k, j, l)
        else:
            target = ratio * heights[t] * widths[t]
        a = p[i, j]
        b = p[i, l]
        c = p[k, j]
        d = p[k, l]
        x = window_root(a, b, c, d, target)
        lo = floor - min(a, d)
        hi = min(b, c) - floor
        if not (x == x) or lo > hi:
            clamped += 1
            continue
        if x < lo:
            x = lo
            clamped += 1
        elif x > hi:
            x = hi
            clamped += 1
        p[i, j] = a + x
        p[k, l] = d + x
        p[i, l] = b - x
        p[k, j] = c - x
    return clamped


@njit(cache=True)
def residuals(p, ratio, pseudo):
    """Largest equation residual and largest ratio deviation over unit windows.

    The equation residual is ``|log odds - target|`` in log-odds units; the
    ratio deviation divides it by the window mass in the Kendall case.
    """
    n = p.shape[0]
    eq = 0.0
    dev = 0.0
    for i in range(n - 1):
        for j in range(n - 1):
            a = p[i, j]
            b = p[i, j + 1]
            c = p[i + 1, j]
            d = p[i + 1, j + 1]
            if a <= 0.0 or b <= 0.0 or c <= 0.0 or d <= 0.0:
                return np.inf, np.inf
            num = a * d
            den = b * c
            if num > 0.0 and den > 0.0 and num < 1e300 and den < 1e300:
                # one log of the ratio keeps relative accuracy for tiny windows
                lo = math.log(num / den)
            else:
                lo = math.log(a) + math.log(d) - math.log(b) - math.log(c)
            if pseudo:
                eta = a + b + c + d
                e = abs(lo - ratio * eta)
                r = e / eta
            else:
                e = abs(lo - ratio)
                r = e
            if e > eq:
                eq = e
            if r > dev:
                dev = r
    return eq, dev
