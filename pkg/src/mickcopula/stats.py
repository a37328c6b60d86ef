"""Sampling, rank statistics and empirical tail dependence.

Points live on the unit square with ``u`` indexed by rows of the copula
matrix and ``v`` by columns.  Pseudo-observations use the ``rank / (N + 1)``
convention by default; ``(rank - 0.5) / N`` is available as ``"mid-rank"``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.stats

from .core import CheckerboardCopula, FILE_TOL, as_copula

__all__ = [
    "PseudoObservations",
    "DependenceSummary",
    "RANK_CONVENTIONS",
    "sample",
    "pseudo_observations",
    "empirical_tau",
    "empirical_rho",
    "tail_dependence",
    "summarize",
    "simulate_summary",
    "empirical_checkerboard",
    "read_points",
    "write_points",
]

RANK_CONVENTIONS = ("weibull", "mid-rank")


@dataclass(frozen=True)
class PseudoObservations:
    """Paired points in the open unit square."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.ndim != 1 or u.shape != v.shape:
            raise ValueError(f"u and v must be 1-d of equal length, got {u.shape} and {v.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def __len__(self) -> int:
        return self.u.shape[0]

    @property
    def length(self) -> int:
        return len(self)


@dataclass(frozen=True)
class DependenceSummary:
    tau: float
    rho: float
    lower_tail_5: float
    upper_tail_5: float
    lower_tail_1: float
    upper_tail_1: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(asdict(self).values())

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}


def sample(P, count: int, seed: int | None = None) -> PseudoObservations:
    """Draw ``count`` points from a checkerboard copula.

    A cell is chosen by inverting the cumulative cell masses (row-major)
    with one uniform, then the point is placed uniformly inside the cell
    with two more.  The generator is numpy's PCG64 seeded with ``seed``, so
    equal seeds give bit-identical output.
    """
    p = as_copula(P).p
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    n = p.shape[0]
    rng = np.random.Generator(np.random.PCG64(seed))
    cdf = np.cumsum(p.ravel())
    cdf /= cdf[-1]
    cell = np.searchsorted(cdf, rng.random(count), side="right")
    cell = np.minimum(cell, n * n - 1)
    i, j = np.divmod(cell, n)
    u = (i + rng.random(count)) / n
    v = (j + rng.random(count)) / n
    return PseudoObservations(u, v)


def pseudo_observations(x, y, convention: Literal["weibull", "mid-rank"] = "weibull") -> PseudoObservations:
    """Rank-transform two paired samples to the unit square.

    ``"weibull"`` gives ``rank / (N + 1)``; ``"mid-rank"`` gives
    ``(rank - 0.5) / N``.  Ties get average ranks.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d of equal length")
    if x.shape[0] < 2:
        raise ValueError("need at least two observations")
    if np.isnan(x).any() or np.isnan(y).any():
        raise ValueError("missing values in input")
    n = x.shape[0]
    rx = scipy.stats.rankdata(x)
    ry = scipy.stats.rankdata(y)
    if convention == "weibull":
        return PseudoObservations(rx / (n + 1), ry / (n + 1))
    if convention == "mid-rank":
        return PseudoObservations((rx - 0.5) / n, (ry - 0.5) / n)
    raise ValueError(f"unknown rank convention {convention!r}")


def _tie_pairs(a: np.ndarray) -> int:
    _, counts = np.unique(a, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def empirical_tau(obs: PseudoObservations) -> float:
    """Kendall's tau-a: (concordant - discordant) / C(N, 2), ties count as neither.

    Computed from scipy's O(N log N) tau-b by undoing the tie correction.
    """
    n = len(obs)
    if n < 2:
        raise ValueError("Kendall's tau needs at least two points")
    n0 = n * (n - 1) // 2
    tx = _tie_pairs(obs.u)
    ty = _tie_pairs(obs.v)
    if tx == n0 or ty == n0:
        return 0.0
    tau_b = float(scipy.stats.kendalltau(obs.u, obs.v, variant="b").statistic)
    if tx == 0 and ty == 0:
        return tau_b
    return tau_b * math.sqrt(float(n0 - tx) * float(n0 - ty)) / n0


def empirical_rho(obs: PseudoObservations) -> float:
    """Spearman's rho as the linear correlation of the ranks."""
    if len(obs) < 2:
        raise ValueError("Spearman's rho needs at least two points")
    return float(scipy.stats.spearmanr(obs.u, obs.v).statistic)


def tail_dependence(obs: PseudoObservations, u_percent: float) -> tuple[float, float]:
    """Empirical lower and upper tail dependence at level ``u_percent``.

    ``lower = #(u < q and v < q) / #(u < q)`` with ``q = u_percent / 100``;
    ``upper`` uses ``> 1 - q``.  Inequalities are strict.
    """
    if not 0 < u_percent < 50:
        raise ValueError(f"u_percent must be in (0, 50), got {u_percent}")
    q = u_percent / 100.0
    low = obs.u < q
    high = obs.u > 1.0 - q
    if not low.any() or not high.any():
        raise ValueError(f"no points in the {u_percent}% conditioning band (N={len(obs)})")
    lower = np.count_nonzero(low & (obs.v < q)) / np.count_nonzero(low)
    upper = np.count_nonzero(high & (obs.v > 1.0 - q)) / np.count_nonzero(high)
    return float(lower), float(upper)


def summarize(obs: PseudoObservations) -> DependenceSummary:
    """tau, rho and the 5% and 1% tail dependences."""
    l5, u5 = tail_dependence(obs, 5)
    l1, u1 = tail_dependence(obs, 1)
    return DependenceSummary(empirical_tau(obs), empirical_rho(obs), l5, u5, l1, u1)


def simulate_summary(P, count: int, replications: int, seed: int | None = None) -> DependenceSummary:
    """Average :func:`summarize` over independent samples of size ``count``.

    Each replicate is re-ranked before its tail statistics are taken, as
    the observed data are.  Replicate ``k`` uses the ``k``-th child of
    ``SeedSequence(seed)``.
    """
    if replications < 1:
        raise ValueError("replications must be positive")
    P = as_copula(P)
    children = np.random.SeedSequence(seed).spawn(replications)
    rows = []
    for child in children:
        pts = sample(P, count, seed=int(child.generate_state(1, np.uint64)[0]))
        rows.append(summarize(pseudo_observations(pts.u, pts.v)).as_tuple())
    return DependenceSummary(*np.mean(rows, axis=0).tolist())


def empirical_checkerboard(obs: PseudoObservations, n: int, max_iter: int = 500, tol: float = 1e-10) -> CheckerboardCopula:
    """Histogram the points on an ``n x n`` grid and rescale to a copula.

    Iterative proportional fitting restores row and column sums of ``1/n``.
    Raises ``RuntimeError`` if it does not get there within ``max_iter``
    sweeps, which happens when a whole row or column is empty.
    """
    if len(obs) < n * n:
        raise ValueError(f"need at least n^2 = {n * n} points, got {len(obs)}")
    i = np.clip((obs.u * n).astype(int), 0, n - 1)
    j = np.clip((obs.v * n).astype(int), 0, n - 1)
    counts = np.zeros((n, n))
    np.add.at(counts, (i, j), 1.0)
    p = counts / counts.sum()
    target = 1.0 / n
    for _ in range(max_iter):
        rows = p.sum(axis=1)
        if (rows == 0).any():
            break
        p *= (target / rows)[:, None]
        cols = p.sum(axis=0)
        if (cols == 0).any():
            break
        p *= (target / cols)[None, :]
        if np.abs(p.sum(axis=1) - target).max() < tol:
            return CheckerboardCopula(p, tol=FILE_TOL)
    raise RuntimeError(f"proportional fitting did not reach {tol:g} in {max_iter} sweeps")


def write_points(path, obs: PseudoObservations) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v"])
        for a, b in zip(obs.u, obs.v):
            w.writerow([repr(float(a)), repr(float(b))])


def read_points(path) -> PseudoObservations:
    """Read a two-column ``u,v`` CSV with header."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["u", "v"]:
            raise ValueError(f"{path}: expected header 'u,v', got {header}")
        try:
            pts = [(float(r[0]), float(r[1])) for r in reader if r]
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}: {exc}") from None
    arr = np.array(pts, dtype=float).reshape(-1, 2)
    return PseudoObservations(arr[:, 0], arr[:, 1])
