"""Checks on the structure of minimum-information checkerboard copulas.

At an interior stationary point of the Kendall problem the cell masses
satisfy

    log p_ij + 1 + lam * (W p)_ij - alpha_j - beta_i = 0,

which is what :func:`stationarity_fit` tests.  The local second-order
condition is positive definiteness of ``D1 + lam * D2`` on the window
coordinates, with ``D1 = (A kron A)^T Diag(1/p) (A kron A)`` and
``D2 = -M kron M``; the generalized Rayleigh quotient of ``(D2, D1)`` is
bounded by 1/2 in magnitude, so ``|lam| < 2`` is sufficient.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.linalg

from .core import CopulaValidationError, StructuralMatrices, as_copula, window_arrays

__all__ = [
    "StationarityFit",
    "DefinitenessReport",
    "TP2Report",
    "RatioReport",
    "UNIQUENESS_THRESHOLD",
    "TP2_TOL",
    "stationarity_fit",
    "hessian_definiteness",
    "tp2_check",
    "tp3_min_minor",
    "ratio_constancy",
    "mics_theta",
    "uniqueness_advisory",
    "write_window_csv",
]

#: ``|lam|`` below this guarantees a unique stationary point.
UNIQUENESS_THRESHOLD = 2.0
#: Absolute floor for 2x2 minors; minors are O(1/n^4).
TP2_TOL = 1e-12
#: Largest grid for the dense (n-1)^2 eigensolve.
MAX_HESSIAN_N = 30


def _positive(p: np.ndarray) -> None:
    bad = np.argwhere(p <= 0)
    if bad.size:
        i, j = bad[0]
        raise CopulaValidationError(
            f"entry ({i}, {j}) is {p[i, j]:.3e}; this check needs strictly positive entries "
            f"({len(bad)} non-positive cells)"
        )


@dataclass(frozen=True)
class StationarityFit:
    """Least-squares multipliers of the stationarity equation.

    ``alpha`` is gauge-fixed to sum to zero.  ``identified`` is False when
    the ``Wp`` column lies in the span of the row and column indicators,
    in which case ``lam`` is reported as nan.
    """

    lam: float
    alpha: np.ndarray
    beta: np.ndarray
    residual_norm: float
    identified: bool = True

    def to_dict(self) -> dict:
        return {
            "lambda": None if np.isnan(self.lam) else float(self.lam),
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "residual_norm": float(self.residual_norm),
            "identified": self.identified,
        }


def stationarity_fit(P) -> StationarityFit:
    """Fit ``lam``, ``alpha`` and ``beta`` to a copula by least squares.

    Parameters
    ----------
    P : CheckerboardCopula or array_like
        Strictly positive copula.

    Returns
    -------
    StationarityFit
        ``residual_norm`` is the root mean square of the n^2 equation
        residuals at the fitted multipliers.
    """
    p = as_copula(P).p
    _positive(p)
    n = p.shape[0]
    wp = StructuralMatrices(n).w_apply(p)
    rows, cols = np.indices((n, n))
    k = np.arange(n * n)
    design = np.zeros((n * n + 1, 1 + 2 * n))
    design[k, 0] = wp.ravel()
    design[k, 1 + cols.ravel()] = -1.0
    design[k, 1 + n + rows.ravel()] = -1.0
    # gauge row: sum(alpha) = 0
    design[n * n, 1:1 + n] = 1.0
    rhs = np.concatenate([-(np.log(p) + 1.0).ravel(), [0.0]])

    sol, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=None)
    identified = rank == design.shape[1]
    if not identified:
        # lam is free; fit the additive part alone
        sub, *_ = np.linalg.lstsq(design[:, 1:], rhs, rcond=None)
        sol = np.concatenate([[np.nan], sub])
        fitted = design[:n * n, 1:] @ sub
    else:
        fitted = design[:n * n] @ sol
    resid = fitted - rhs[:n * n]
    return StationarityFit(
        lam=float(sol[0]),
        alpha=sol[1:1 + n].copy(),
        beta=sol[1 + n:].copy(),
        residual_norm=float(np.sqrt(np.mean(resid ** 2))),
        identified=bool(identified),
    )


@dataclass(frozen=True)
class DefinitenessReport:
    """Second-order check of the Kendall problem at a copula.

    ``quotient_max`` is the largest ``|v^T D2 v / v^T D1 v|``;
    ``gershgorin_bound`` is the block Gershgorin radius, which dominates it.
    """

    lambda_used: float
    min_eigenvalue: float
    positive_definite: bool
    gershgorin_bound: float
    quotient_max: float
    quotient_min: float

    def to_dict(self) -> dict:
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v)) for k, v in self.__dict__.items()}


def _hessian_blocks(p: np.ndarray):
    n = p.shape[0]
    s = StructuralMatrices(n)
    aa = np.kron(s.a, s.a)
    d1 = aa.T @ (aa / p.ravel()[:, None])
    d2 = -np.kron(s.m, s.m)
    return d1, d2, s


def hessian_definiteness(P, lam: float) -> DefinitenessReport:
    """Definiteness of ``D1 + lam * D2`` and the Rayleigh-quotient bound.

    Parameters
    ----------
    P : CheckerboardCopula or array_like
        Strictly positive copula with ``n <= 30``.
    lam : float
        Multiplier of the Kendall constraint.
    """
    p = as_copula(P).p
    n = p.shape[0]
    if n < 2 or n > MAX_HESSIAN_N:
        raise ValueError(f"hessian_definiteness needs 2 <= n <= {MAX_HESSIAN_N}, got n={n}")
    _positive(p)
    d1, d2, s = _hessian_blocks(p)
    # symmetrize away rounding before the symmetric eigensolvers
    d1 = 0.5 * (d1 + d1.T)
    min_eig = float(scipy.linalg.eigvalsh(d1 + lam * d2)[0])
    gen = scipy.linalg.eigh(d2, d1, eigvals_only=True)

    x = s.x
    # ||B_ij||_F = |X_ij| * sqrt(p_i. (X o X) p_j.^T)
    frob = np.abs(x) * np.sqrt(np.maximum(p @ (x * x) @ p.T, 0.0))
    np.fill_diagonal(frob, 0.0)
    bound = float(frob.sum(axis=1).max())

    return DefinitenessReport(
        lambda_used=float(lam),
        min_eigenvalue=min_eig,
        positive_definite=bool(min_eig > 0),
        gershgorin_bound=bound,
        quotient_max=float(np.abs(gen).max()),
        quotient_min=float(gen.min()),
    )


@dataclass(frozen=True)
class TP2Report:
    """Smallest 2x2 minor found and where (0-based rows, cols)."""

    mode: str
    min_minor: float
    location: tuple[int, int, int, int]
    holds: bool
    violations: int
    tolerance: float = TP2_TOL

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["location"] = list(map(int, self.location))
        d["min_minor"] = float(self.min_minor)
        return d


def tp2_check(P, mode: Literal["adjacent", "all-pairs"] = "adjacent", tol: float = TP2_TOL) -> TP2Report:
    """Check total positivity of order two.

    ``adjacent`` looks at the (n-1)^2 contiguous minors, which is enough
    for strictly positive matrices.  ``all-pairs`` looks at every
    ``i < k, j < l`` minor and is the one to use when there are zeros.
    """
    p = as_copula(P).p
    n = p.shape[0]
    if mode == "adjacent":
        minors = p[:-1, :-1] * p[1:, 1:] - p[1:, :-1] * p[:-1, 1:]
        flat = int(np.argmin(minors))
        i, j = divmod(flat, n - 1)
        loc = (i, i + 1, j, j + 1)
        m = minors
    elif mode == "all-pairs":
        # m[i, k, j, l] = p_ij p_kl - p_il p_kj
        m = np.einsum("ij,kl->ikjl", p, p) - np.einsum("il,kj->ikjl", p, p)
        iu = np.triu(np.ones((n, n), dtype=bool), 1)
        mask = iu[:, :, None, None] & iu[None, None, :, :]
        m = np.where(mask, m, np.inf)
        loc = tuple(int(v) for v in np.unravel_index(int(np.argmin(m)), m.shape))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    lowest = float(m.min())
    return TP2Report(mode, lowest, loc, lowest >= -tol, int((m < -tol).sum()), tol)


def tp3_min_minor(P) -> float:
    """Smallest contiguous 3x3 minor.  Used for spot checks on small grids."""
    p = as_copula(P).p
    n = p.shape[0]
    if n < 3:
        raise ValueError("3x3 minors need n >= 3")
    return float(min(np.linalg.det(p[i:i + 3, j:j + 3]) for i in range(n - 2) for j in range(n - 2)))


@dataclass(frozen=True)
class RatioReport:
    """Summary of window log odds (``plain``) or pseudo log odds (``pseudo``)."""

    kind: str
    mean: float
    max_deviation: float
    target: float
    table: dict = field(repr=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mean": self.mean, "max_deviation": self.max_deviation, "target": self.target}


def ratio_constancy(P, kind: Literal["pseudo", "plain"] = "pseudo", target: float | None = None) -> RatioReport:
    """How far the window ratios are from a common value.

    ``max_deviation`` is measured against ``target`` if given, else against
    the mean over windows.  ``table`` holds the arrays of
    :func:`~mickcopula.core.window_arrays`.
    """
    if kind not in ("pseudo", "plain"):
        raise ValueError(f"kind must be 'pseudo' or 'plain', got {kind!r}")
    p = as_copula(P).p
    _positive(p)
    table = window_arrays(p)
    vals = table["pseudo_log_odds" if kind == "pseudo" else "log_odds"]
    mean = float(vals.mean())
    ref = mean if target is None else float(target)
    return RatioReport(kind, mean, float(np.abs(vals - ref).max()), ref, table)


def mics_theta(P) -> float:
    """Spearman multiplier ``theta = n^2 * (mean log odds) / 12``."""
    p = as_copula(P).p
    return p.shape[0] ** 2 * ratio_constancy(p, "plain").mean / 12.0


def uniqueness_advisory(lam: float) -> str:
    """Plain-language note on whether ``lam`` is inside the proven regime."""
    if np.isnan(lam):
        return "multiplier not identified"
    if abs(lam) < UNIQUENESS_THRESHOLD:
        return f"|lambda| = {abs(lam):.4g} < 2: stationary point is the unique optimum"
    return f"|lambda| = {abs(lam):.4g} >= 2: outside the regime where uniqueness is proven"


def write_window_csv(path, P) -> None:
    """Write the per-window table with columns i, j, log_odds, eta, pseudo_log_odds, minor."""
    table = window_arrays(P)
    m = table["eta"].shape[0]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "log_odds", "eta", "pseudo_log_odds", "minor"])
        for i in range(m):
            for j in range(m):
                w.writerow([i, j] + [repr(float(table[k][i, j])) for k in ("log_odds", "eta", "pseudo_log_odds", "minor")])
