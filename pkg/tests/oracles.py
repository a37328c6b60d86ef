"""Reference computations used only by the tests.

They share no code with the solver: MICK comes from Newton's method on
``I(P) - (r/2) tau(P)`` in window coordinates, MICS from Sinkhorn scaling of
its closed-form kernel, and tau from exact rational arithmetic.
"""

from fractions import Fraction

import numpy as np


def sinkhorn_copula(q, iters=5000, tol=1e-15):
    """Scale a positive matrix to row and column sums 1/n."""
    p = np.array(q, dtype=float)
    n = p.shape[0]
    for _ in range(iters):
        p /= p.sum(axis=1, keepdims=True) * n
        p /= p.sum(axis=0, keepdims=True) * n
        if np.abs(p.sum(axis=1) - 1 / n).max() < tol:
            break
    return p


def random_copula(rng, n, floor=0.0):
    return sinkhorn_copula(rng.random((n, n)) + floor)


def mics_closed_form(n, ratio):
    """MICS with log odds ratio ``ratio`` in every window, by log-domain Sinkhorn."""
    x = (np.arange(1, n + 1) - 0.5) / n - 0.5
    g = ratio * n**2 * np.outer(x, x)
    la = np.zeros(n)
    lb = np.zeros(n)
    t = -np.log(n)
    for _ in range(5000):
        m = g + lb[None, :]
        la = t - (m.max(axis=1) + np.log(np.exp(m - m.max(axis=1, keepdims=True)).sum(axis=1)))
        m = g + la[:, None]
        lb_new = t - (m.max(axis=0) + np.log(np.exp(m - m.max(axis=0, keepdims=True)).sum(axis=0)))
        if np.abs(lb_new - lb).max() < 1e-15:
            lb = lb_new
            break
        lb = lb_new
    return np.exp(g + la[:, None] + lb[None, :])


def _diff(n):
    a = np.zeros((n, n - 1))
    a[np.arange(n - 1), np.arange(n - 1)] = 1
    a[np.arange(1, n), np.arange(n - 1)] = -1
    return a


def _xi(n):
    return np.tril(np.full((n, n), 2.0), -1) + np.eye(n)


def mick_newton(n, ratio, iters=100):
    """Stationary point of ``I - (r/2) tau`` by damped Newton from the uniform copula."""
    a = _diff(n)
    aa = np.kron(a, a)
    xi = _xi(n)
    w = 0.5 * (np.kron(xi, xi.T) + np.kron(xi.T, xi))
    u = np.full(n * n, 1.0 / n**2)

    def f(p):
        return np.sum(p * np.log(p)) - 0.5 * ratio * (1 - p @ w @ p)

    c = np.zeros((n - 1) ** 2)
    p = u.copy()
    for _ in range(iters):
        grad = aa.T @ (np.log(p) + 1 + ratio * (w @ p))
        hess = aa.T @ (aa / p[:, None]) + ratio * aa.T @ w @ aa
        step = np.linalg.solve(hess, -grad)
        t = 1.0
        f0 = f(p)
        while True:
            q = u + aa @ (c + t * step)
            if (q > 0).all() and f(q) <= f0 + 1e-4 * t * grad @ step:
                break
            t *= 0.5
            if t < 1e-12:
                raise RuntimeError("line search failed")
        c = c + t * step
        p = u + aa @ c
        if np.abs(grad).max() < 1e-13:
            break
    return p.reshape(n, n)


def exact_tau(rows):
    """``1 - tr(Xi P Xi P^T)`` in rational arithmetic."""
    n = len(rows)
    xi = [[Fraction(1) if i == j else Fraction(2) if i > j else Fraction(0) for j in range(n)] for i in range(n)]

    def mul(x, y):
        return [[sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    pt = [list(r) for r in zip(*rows)]
    m = mul(mul(mul(xi, rows), xi), pt)
    return 1 - sum(m[i][i] for i in range(n))


def exact_rho(rows):
    n = len(rows)
    h = [Fraction(2 * (n - i) + 1, 2 * n) for i in range(1, n + 1)]
    return 12 * (sum(h[i] * rows[i][j] * h[j] for i in range(n) for j in range(n)) - Fraction(1, 4))


def kendall_tau_a_pairs(x, y):
    """O(N^2) tau-a: (concordant - discordant) / C(N, 2)."""
    n = len(x)
    s = 0
    for i in range(n):
        for j in range(i + 1, n):
            s += np.sign(x[i] - x[j]) * np.sign(y[i] - y[j])
    return s / (n * (n - 1) / 2)
