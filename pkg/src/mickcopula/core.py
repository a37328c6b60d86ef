"""Checkerboard copulas, rank correlations, information and the T-basis.

A checkerboard copula on an ``n x n`` grid is stored as the matrix of cell
masses ``P`` with ``P.sum(axis=0) == P.sum(axis=1) == 1/n``.  Indices are
0-based throughout: window ``(i, j)`` is the 2x2 block with rows ``i, i+1``
and columns ``j, j+1``.
"""

from __future__ import annotations

import csv
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

__all__ = [
    "CheckerboardCopula",
    "CopulaValidationError",
    "BasisCoordinates",
    "StructuralMatrices",
    "LocalOdds",
    "uniform",
    "comonotone",
    "anti_comonotone",
    "kendall_tau",
    "spearman_rho",
    "information",
    "to_coordinates",
    "to_copula",
    "transfer_matrix",
    "mass_transfer",
    "local_odds",
    "window_arrays",
    "read_copula_csv",
    "write_copula_csv",
]

#: Tolerance on row/column sums for copulas built in memory.
INTERNAL_TOL = 1e-12
#: Tolerance on row/column sums for copulas read from files.
FILE_TOL = 1e-9
#: Entries below this are treated as exact zeros in ``p log p``.
ZERO_FLOOR = 1e-300
#: Largest grid for which the n^2 x n^2 matrix W is materialized.
MAX_DENSE_W = 32


class CopulaValidationError(ValueError):
    """Raised when a matrix is not a valid checkerboard copula."""


class CheckerboardCopula:
    """Immutable ``n x n`` checkerboard copula.

    Parameters
    ----------
    p : array_like, shape (n, n)
        Cell probabilities.  Every entry must be nonnegative and every row
        and column must sum to ``1/n``.
    tol : float, optional
        Absolute tolerance on the row and column sums.

    Raises
    ------
    CopulaValidationError
        If the matrix is not square, has negative entries or wrong margins.
    """

    def __init__(self, p, tol: float = INTERNAL_TOL):
        arr = np.array(p, dtype=float, copy=True)
        _validate(arr, tol)
        arr.setflags(write=False)
        self._p = arr

    @property
    def p(self) -> np.ndarray:
        """Read-only view of the cell probabilities."""
        return self._p

    @property
    def n(self) -> int:
        return self._p.shape[0]

    @property
    def T(self) -> "CheckerboardCopula":
        return CheckerboardCopula(self._p.T)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._p
        return self._p.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, CheckerboardCopula):
            return NotImplemented
        return self._p.shape == other._p.shape and bool(np.array_equal(self._p, other._p))

    def __hash__(self):
        return hash(self._p.tobytes())

    def __repr__(self):
        return f"CheckerboardCopula(n={self.n})"


def _validate(arr: np.ndarray, tol: float) -> None:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise CopulaValidationError(f"expected a square matrix, got shape {arr.shape}")
    n = arr.shape[0]
    if n < 2:
        raise CopulaValidationError("grid size must be at least 2")
    if not np.all(np.isfinite(arr)):
        raise CopulaValidationError("matrix contains non-finite entries")
    if arr.min() < 0:
        i, j = np.unravel_index(np.argmin(arr), arr.shape)
        raise CopulaValidationError(f"negative entry {arr[i, j]:.3e} at ({i}, {j})")
    target = 1.0 / n
    rows = np.abs(arr.sum(axis=1) - target)
    cols = np.abs(arr.sum(axis=0) - target)
    if rows.max() > tol:
        k = int(np.argmax(rows))
        raise CopulaValidationError(f"row {k} sums to {arr[k].sum():.15g}, expected {target:.15g}")
    if cols.max() > tol:
        k = int(np.argmax(cols))
        raise CopulaValidationError(f"column {k} sums to {arr[:, k].sum():.15g}, expected {target:.15g}")


def as_copula(P, tol: float = INTERNAL_TOL) -> CheckerboardCopula:
    """Return ``P`` unchanged if already a copula, else validate and wrap it."""
    if isinstance(P, CheckerboardCopula):
        return P
    return CheckerboardCopula(P, tol=tol)


def _check_n(n: int) -> int:
    if int(n) != n or n < 2:
        raise ValueError(f"grid size must be an integer >= 2, got {n!r}")
    return int(n)


def uniform(n: int) -> CheckerboardCopula:
    """Independence copula: every cell holds ``1/n**2``."""
    n = _check_n(n)
    return CheckerboardCopula(np.full((n, n), 1.0 / n**2))


def comonotone(n: int) -> CheckerboardCopula:
    """Upper Frechet bound: ``Diag(1/n, ..., 1/n)``."""
    n = _check_n(n)
    return CheckerboardCopula(np.eye(n) / n)


def anti_comonotone(n: int) -> CheckerboardCopula:
    """Lower Frechet bound: mass ``1/n`` on the anti-diagonal."""
    n = _check_n(n)
    return CheckerboardCopula(np.fliplr(np.eye(n)) / n)


class StructuralMatrices:
    """Constant matrices attached to an ``n x n`` grid.

    ``xi`` holds 1 on the diagonal, 2 below it and 0 above; ``omega`` is the
    Spearman weight matrix; ``v = xi - J``; ``a`` is the ``n x (n-1)``
    first-difference matrix with left inverse ``a_dagger``; ``m`` is the
    ``(n-1) x (n-1)`` skew Toeplitz matrix with -1 above and +1 below the
    diagonal, and ``x = a_dagger.T @ m @ a_dagger``.  The ``n^2 x n^2`` matrix
    ``w`` is only built on request and only for ``n <= 32``.
    """

    def __init__(self, n: int):
        self.n = _check_n(n)

    @cached_property
    def xi(self) -> np.ndarray:
        n = self.n
        return np.tril(np.full((n, n), 2.0), -1) + np.eye(n)

    @cached_property
    def omega(self) -> np.ndarray:
        n = self.n
        h = (n - np.arange(1, n + 1) + 0.5) / n
        return np.outer(h, h)

    @cached_property
    def v(self) -> np.ndarray:
        return self.xi - np.ones((self.n, self.n))

    @cached_property
    def w(self) -> np.ndarray:
        if self.n > MAX_DENSE_W:
            raise ValueError(f"W has n^4 entries; refusing to build it for n={self.n} > {MAX_DENSE_W}")
        xi = self.xi
        return 0.5 * (np.kron(xi, xi.T) + np.kron(xi.T, xi))

    @cached_property
    def a(self) -> np.ndarray:
        return _difference_matrix(self.n)

    @cached_property
    def a_dagger(self) -> np.ndarray:
        n = self.n
        i = np.arange(1, n)[:, None]
        j = np.arange(1, n + 1)[None, :]
        return np.where(j <= i, n - i, -i) / n

    @cached_property
    def m(self) -> np.ndarray:
        k = self.n - 1
        return np.eye(k, k=-1) - np.eye(k, k=1)

    @cached_property
    def x(self) -> np.ndarray:
        return self.a_dagger.T @ self.m @ self.a_dagger

    def w_apply(self, p: np.ndarray) -> np.ndarray:
        """Return ``W vec(P)`` reshaped to ``n x n`` without building ``W``."""
        xi = self.xi
        return 0.5 * (xi @ p @ xi + xi.T @ p @ xi.T)


def _difference_matrix(n: int) -> np.ndarray:
    a = np.zeros((n, n - 1))
    idx = np.arange(n - 1)
    a[idx, idx] = 1.0
    a[idx + 1, idx] = -1.0
    return a


def _xi(n: int) -> np.ndarray:
    return np.tril(np.full((n, n), 2.0), -1) + np.eye(n)


def kendall_tau(P, method: str = "trace") -> float:
    """Kendall's tau of a checkerboard copula.

    ``method="trace"`` evaluates ``1 - tr(Xi P Xi P^T)`` in O(n^3).  The
    alternative forms ``"w"`` (``1 - p^T W p``, needs ``n <= 32``) and
    ``"vv"`` (``p^T (V kron V) p``) exist for cross-checking.
    """
    p = as_copula(P).p
    n = p.shape[0]
    if method == "trace":
        xi = _xi(n)
        return float(1.0 - np.einsum("ij,ji->", xi @ p @ xi, p.T))
    if method == "w":
        vec = p.ravel()
        return float(1.0 - vec @ StructuralMatrices(n).w @ vec)
    if method == "vv":
        v = _xi(n) - 1.0
        # (V kron V) vec(P) = vec(V P V^T) for row-major vec
        return float(np.sum(p * (v @ p @ v.T)))
    raise ValueError(f"unknown method {method!r}")


def spearman_rho(P) -> float:
    """Spearman's rho, ``12 (tr(Omega P) - 1/4)``."""
    p = as_copula(P).p
    n = p.shape[0]
    h = (n - np.arange(1, n + 1) + 0.5) / n
    return float(12.0 * (h @ p @ h - 0.25))


def information(P) -> float:
    """``sum p log p`` with the convention ``0 log 0 = 0``."""
    p = as_copula(P).p
    q = p[p > ZERO_FLOOR]
    return float(np.sum(q * np.log(q)))


class BasisCoordinates(NamedTuple):
    """Coefficients of ``P - U`` in the window basis ``{T^{ij}}``.

    ``c[i, j]`` equals the cumulative mass ``C(i+1, j+1)`` minus
    ``(i+1)(j+1)/n^2``, so the coordinates are a centered discrete CDF.
    """

    n: int
    c: np.ndarray


def to_coordinates(P) -> BasisCoordinates:
    p = as_copula(P).p
    n = p.shape[0]
    ad = StructuralMatrices(n).a_dagger
    return BasisCoordinates(n, ad @ (p - 1.0 / n**2) @ ad.T)


def to_copula(coords: BasisCoordinates, tol: float = INTERNAL_TOL) -> CheckerboardCopula:
    """Inverse of :func:`to_coordinates`.

    Raises
    ------
    CopulaValidationError
        If some resulting cell is negative; the message names the cell.
    """
    n, c = coords
    c = np.asarray(c, dtype=float)
    if c.shape != (n - 1, n - 1):
        raise ValueError(f"coordinates for n={n} must have shape {(n - 1, n - 1)}, got {c.shape}")
    a = _difference_matrix(n)
    p = 1.0 / n**2 + a @ c @ a.T
    return CheckerboardCopula(_snap_negative_zeros(p), tol=tol)


def _snap_negative_zeros(p: np.ndarray, atol: float = 1e-15) -> np.ndarray:
    # rounding can leave -1e-17 where the exact value is 0
    return np.where((p < 0) & (p > -atol), 0.0, p)


def transfer_matrix(n: int, i: int, j: int) -> np.ndarray:
    """The window matrix ``T^{ij}``: +1 on the diagonal pair, -1 on the anti-diagonal."""
    n = _check_n(n)
    if not (0 <= i < n - 1 and 0 <= j < n - 1):
        raise IndexError(f"window ({i}, {j}) outside 0..{n - 2}")
    t = np.zeros((n, n))
    t[i, j] = t[i + 1, j + 1] = 1.0
    t[i, j + 1] = t[i + 1, j] = -1.0
    return t


def mass_transfer(P, i: int, j: int, eps: float) -> CheckerboardCopula:
    """Move ``eps`` of mass from the anti-diagonal to the diagonal of window (i, j).

    Margins are unchanged.  Raises ``CopulaValidationError`` if an entry of
    the window would become negative.
    """
    p = np.array(as_copula(P).p)
    n = p.shape[0]
    if not (0 <= i < n - 1 and 0 <= j < n - 1):
        raise IndexError(f"window ({i}, {j}) outside 0..{n - 2}")
    for (r, s), sign in (((i, j), 1), ((i + 1, j + 1), 1), ((i, j + 1), -1), ((i + 1, j), -1)):
        p[r, s] += sign * eps
        if p[r, s] < 0:
            raise CopulaValidationError(f"transfer of {eps:.3e} makes entry ({r}, {s}) negative: {p[r, s]:.3e}")
    return CheckerboardCopula(p)


class LocalOdds(NamedTuple):
    log_odds: float
    pseudo_log_odds: float
    eta: float


def local_odds(P, i: int, j: int) -> LocalOdds:
    """Log odds ratio, pseudo log odds ratio and mass of window (i, j).

    The log quantities are ``nan`` when a window entry is zero.
    """
    p = as_copula(P).p
    n = p.shape[0]
    if not (0 <= i < n - 1 and 0 <= j < n - 1):
        raise IndexError(f"window ({i}, {j}) outside 0..{n - 2}")
    a, b, c, d = p[i, j], p[i, j + 1], p[i + 1, j], p[i + 1, j + 1]
    eta = float(a + b + c + d)
    if min(a, b, c, d) <= 0:
        return LocalOdds(float("nan"), float("nan"), eta)
    lo = float(np.log(a) + np.log(d) - np.log(b) - np.log(c))
    return LocalOdds(lo, lo / eta, eta)


def window_arrays(P) -> dict[str, np.ndarray]:
    """Per-window arrays of shape ``(n-1, n-1)``.

    Keys: ``log_odds``, ``eta``, ``pseudo_log_odds`` and ``minor`` (the
    2x2 determinant ``p_ij p_{i+1,j+1} - p_{i+1,j} p_{i,j+1}``).  Log
    quantities are ``nan`` on windows containing a zero.
    """
    p = as_copula(P).p
    a, b, c, d = p[:-1, :-1], p[:-1, 1:], p[1:, :-1], p[1:, 1:]
    eta = a + b + c + d
    positive = (a > 0) & (b > 0) & (c > 0) & (d > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(positive, np.log(a) + np.log(d) - np.log(b) - np.log(c), np.nan)
    return {"log_odds": lo, "eta": eta, "pseudo_log_odds": lo / eta, "minor": a * d - b * c}


def read_copula_csv(path) -> CheckerboardCopula:
    """Read a headerless ``n x n`` CSV of probabilities, validated at 1e-9."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    try:
        arr = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise CopulaValidationError(f"{path}: {exc}") from None
    return CheckerboardCopula(arr, tol=FILE_TOL)


def write_copula_csv(path, P) -> None:
    p = as_copula(P).p
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        for row in p:
            writer.writerow([repr(float(x)) for x in row])
