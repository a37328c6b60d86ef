"""Greedy computation of MICK and MICS and calibration of their ratio parameter.

Both copulas are built from the uniform copula by repeatedly picking a 2x2
submatrix and moving mass along its diagonal until the submatrix reaches a
prescribed dependence:

* MICK (fixed Kendall's tau): every window has pseudo log odds ratio ``r``,
  i.e. ``log odds = r * (window mass)``.
* MICS (fixed Spearman's rho): every window has log odds ratio ``r'``.

Each move is an exact line minimization of ``I(P) - (r/2) tau(P)`` (resp.
``I(P) - (r' n^2/12) rho(P)``) along a margin-preserving direction, because
Kendall's tau is linear along every such direction.  The default schedule
therefore also moves mass on wider 2x2 submatrices (rows ``i, i+h``, columns
``j, j+w`` for ``h, w`` powers of two) before the unit windows; this removes
the slow large-scale modes that make window-only sweeps take 1e5 passes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _kernels
from .core import (
    CheckerboardCopula,
    as_copula,
    information,
    kendall_tau,
    spearman_rho,
    to_copula,
    uniform,
    BasisCoordinates,
    StructuralMatrices,
    _check_n,
    _xi,
)

__all__ = [
    "SolverConfig",
    "SolveReport",
    "CalibrationResult",
    "CalibrationError",
    "InfeasibleTargetError",
    "window_delta",
    "solve_mick",
    "solve_mics",
    "calibrate",
    "reflect_columns",
    "brute_force_mick",
]

SweepOrder = Literal["row-major", "random-permutation"]

#: Cells are kept at or above this value while solving.
ENTRY_FLOOR = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`solve_mick` and :func:`solve_mics`.

    ``ratio`` is the pseudo log odds ratio for MICK and the log odds ratio
    for MICS.  ``tol`` bounds the largest window residual in log-odds units.
    With ``multiscale=False`` only unit windows are visited, exactly as in
    the plain greedy algorithm; expect far more sweeps.
    """

    ratio: float = 0.0
    max_sweeps: int = 10_000
    tol: float = 1e-10
    sweep_order: SweepOrder = "row-major"
    seed: int | None = None
    multiscale: bool = True
    polish_patience: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.sweep_order not in ("row-major", "random-permutation"):
            raise ValueError(f"unknown sweep order {self.sweep_order!r}")
        if not math.isfinite(self.ratio):
            raise ValueError("ratio must be finite")


@dataclass(frozen=True)
class SolveReport:
    copula: CheckerboardCopula
    family: str
    ratio: float
    converged: bool
    sweeps_used: int
    final_residual: float
    ratio_deviation: float
    tau: float
    rho: float
    information: float
    clamped: int = 0
    history: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n": self.copula.n,
            "ratio": self.ratio,
            "converged": self.converged,
            "sweeps_used": self.sweeps_used,
            "final_residual": self.final_residual,
            "ratio_deviation": self.ratio_deviation,
            "tau": self.tau,
            "rho": self.rho,
            "information": self.information,
            "clamped": self.clamped,
        }

    def to_text(self) -> str:
        return "\n".join(f"{k} = {v}" for k, v in self.to_dict().items())

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class CalibrationResult:
    ratio: float
    achieved_correlation: float
    target: float
    iterations: int
    measure: str
    family: str
    report: SolveReport | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "measure": self.measure,
            "target": self.target,
            "ratio": self.ratio,
            "achieved_correlation": self.achieved_correlation,
            "iterations": self.iterations,
        }


class CalibrationError(ValueError):
    """Calibration failed: a solve did not converge or bracketing failed."""


class InfeasibleTargetError(CalibrationError):
    """Target correlation outside the range attainable on the grid."""


def window_delta(a: float, b: float, c: float, d: float, ratio: float,
                 kind: Literal["pseudo", "plain"] = "pseudo") -> float:
    """Mass ``delta`` to move onto the diagonal of the window ``[[a, b], [c, d]]``.

    Solves ``log((a+delta)(d+delta) / ((b-delta)(c-delta))) = t`` with
    ``t = ratio * (a+b+c+d)`` for ``kind="pseudo"`` and ``t = ratio`` for
    ``kind="plain"``.  The returned root lies in ``(-min(a, d), min(b, c))``.

    Raises
    ------
    ValueError
        If no root keeps the four entries nonnegative.
    """
    if min(a, b, c, d) < 0:
        raise ValueError(f"negative window entry in {(a, b, c, d)}")
    eta = a + b + c + d
    if kind == "pseudo":
        if eta <= 0:
            raise ValueError("window mass must be positive for the pseudo ratio")
        target = ratio * eta
    elif kind == "plain":
        target = ratio
    else:
        raise ValueError(f"unknown kind {kind!r}")
    x = float(_kernels.window_root(float(a), float(b), float(c), float(d), float(target)))
    lo, hi = -min(a, d), min(b, c)
    if not math.isfinite(x) or lo == hi or not (lo <= x <= hi):
        raise ValueError(f"no admissible root for window {(a, b, c, d)} at target {target}")
    return x


def _scales(n: int, multiscale: bool) -> list[int]:
    if not multiscale:
        return [1]
    out, s = [], 1
    while s < n:
        out.append(s)
        s *= 2
    return out[::-1]


def _schedule(n: int, multiscale: bool):
    """Blocks of rectangle moves, coarse to fine, each in row-major order."""
    blocks = []
    for h in _scales(n, multiscale):
        for w in _scales(n, multiscale):
            ii, jj = np.meshgrid(np.arange(n - h), np.arange(n - w), indexing="ij")
            m = ii.size
            blocks.append((ii.ravel().astype(np.int64), jj.ravel().astype(np.int64),
                           np.full(m, h, dtype=np.int64), np.full(m, w, dtype=np.int64)))
    return blocks


def _flatten(blocks, rng=None):
    if rng is not None:
        blocks = [tuple(arr[perm] for arr in blk)
                  for blk in blocks for perm in [rng.permutation(blk[0].size)]]
    return tuple(np.concatenate(parts) for parts in zip(*blocks))


def _solve(n: int, cfg: SolverConfig, pseudo: bool) -> SolveReport:
    n = _check_n(n)
    family = "mick" if pseudo else "mics"
    if cfg.ratio < 0:
        flipped = _solve(n, _replace_ratio(cfg, -cfg.ratio), pseudo)
        P = reflect_columns(flipped.copula)
        return SolveReport(P, family, cfg.ratio, flipped.converged, flipped.sweeps_used,
                           flipped.final_residual, flipped.ratio_deviation,
                           kendall_tau(P), spearman_rho(P), information(P),
                           flipped.clamped, flipped.history)

    p = np.full((n, n), 1.0 / n**2)
    ratio = float(cfg.ratio)
    rng = np.random.default_rng(cfg.seed) if cfg.sweep_order == "random-permutation" else None
    coarse = _schedule(n, cfg.multiscale)
    fine = _schedule(n, False)
    fixed_coarse = _flatten(coarse) if rng is None else None
    fixed_fine = _flatten(fine) if rng is None else None

    history = []
    clamped = 0
    eq, dev = _kernels.residuals(p, ratio, pseudo)
    sweeps = 0
    while eq > cfg.tol and sweeps < cfg.max_sweeps:
        order = fixed_coarse if rng is None else _flatten(coarse, rng)
        clamped += _kernels.sweep(p, *order, ratio, pseudo, ENTRY_FLOOR)
        sweeps += 1
        eq, dev = _kernels.residuals(p, ratio, pseudo)
        history.append(eq)
    converged = eq <= cfg.tol

    # Coarse moves leave absolute rounding noise on the tiny off-diagonal
    # cells; unit-window passes clean it up so the per-window ratio, not
    # just the log odds, settles.
    if converged and pseudo and dev > cfg.tol:
        best, stale = dev, 0
        while dev > cfg.tol and sweeps < cfg.max_sweeps and stale < cfg.polish_patience:
            order = fixed_fine if rng is None else _flatten(fine, rng)
            clamped += _kernels.sweep(p, *order, ratio, pseudo, ENTRY_FLOOR)
            sweeps += 1
            eq, dev = _kernels.residuals(p, ratio, pseudo)
            history.append(eq)
            if dev < 0.99 * best:
                best, stale = dev, 0
            else:
                stale += 1
        converged = eq <= cfg.tol

    P = CheckerboardCopula(p)
    return SolveReport(P, family, ratio, bool(converged), sweeps, float(eq), float(dev),
                       kendall_tau(P), spearman_rho(P), information(P), int(clamped),
                       tuple(history))


def _replace_ratio(cfg: SolverConfig, ratio: float) -> SolverConfig:
    return SolverConfig(ratio, cfg.max_sweeps, cfg.tol, cfg.sweep_order, cfg.seed,
                        cfg.multiscale, cfg.polish_patience)


def _as_config(cfg) -> SolverConfig:
    if isinstance(cfg, SolverConfig):
        return cfg
    return SolverConfig(ratio=float(cfg))


def solve_mick(n: int, cfg: SolverConfig | float) -> SolveReport:
    """Minimum-information copula with constant pseudo log odds ratio ``cfg.ratio``.

    A bare number is accepted in place of a config.  Negative ratios are
    solved at ``|ratio|`` and mirrored by :func:`reflect_columns`.

    Examples
    --------
    >>> rep = solve_mick(30, 3.0)
    >>> round(rep.tau, 3), round(rep.rho, 3)
    (0.513, 0.709)
    """
    return _solve(n, _as_config(cfg), pseudo=True)


def solve_mics(n: int, cfg: SolverConfig | float) -> SolveReport:
    """Minimum-information copula with constant log odds ratio ``cfg.ratio``.

    The result is the exponential-family copula ``A_i B_j exp(theta h_ij)``
    with ``theta = n^2 * ratio / 12``.
    """
    return _solve(n, _as_config(cfg), pseudo=False)


def reflect_columns(P) -> CheckerboardCopula:
    """Reverse the column order; negates Kendall's tau and Spearman's rho."""
    return CheckerboardCopula(as_copula(P).p[:, ::-1])


def calibrate(n: int, target: float, measure: Literal["kendall", "spearman"] = "kendall",
              family: Literal["mick", "mics"] = "mick", tol: float = 1e-4,
              config: SolverConfig | None = None, max_iterations: int = 200) -> CalibrationResult:
    """Find the ratio whose solved copula has the requested rank correlation.

    The upper end of the bracket starts at 1 for MICK and at ``12 / n**2``
    (unit multiplier of ``h^T P h``) for MICS, and doubles until the measure
    passes ``target``; the bracket is then bisected until the achieved value
    is within ``tol``.  Negative targets are handled by symmetry.

    Raises
    ------
    InfeasibleTargetError
        If ``target`` is outside the range attainable on an ``n x n`` grid.
    CalibrationError
        If a solve along the way fails to converge.
    """
    n = _check_n(n)
    if measure not in ("kendall", "spearman"):
        raise ValueError(f"unknown measure {measure!r}")
    if family not in ("mick", "mics"):
        raise ValueError(f"unknown family {family!r}")
    bound = 1 - 1 / n if measure == "kendall" else 1 - 1 / n**2
    if not abs(target) < bound:
        raise InfeasibleTargetError(f"|target| must be below {bound:.6g} for n={n}, got {target}")
    base = config or SolverConfig()
    solve = solve_mick if family == "mick" else solve_mics
    sign = -1.0 if target < 0 else 1.0
    goal = abs(target)

    def evaluate(r):
        rep = solve(n, _replace_ratio(base, r))
        if not rep.converged:
            raise CalibrationError(f"solver did not converge at ratio {r} "
                                   f"(residual {rep.final_residual:.3e} after {rep.sweeps_used} sweeps)")
        return rep, rep.tau if measure == "kendall" else rep.rho

    iterations = 0
    rep, value = evaluate(0.0)
    if abs(value - goal) <= tol:
        return _finish(0.0, rep, target, sign, 0, measure, family)
    lo, hi = 0.0, (1.0 if family == "mick" else 12.0 / n**2)
    while True:
        iterations += 1
        rep, value = evaluate(hi)
        if abs(value - goal) <= tol:
            return _finish(hi, rep, target, sign, iterations, measure, family)
        if value > goal:
            break
        lo, hi = hi, 2 * hi
        if hi > 2.0**20 or iterations >= max_iterations:
            raise CalibrationError(f"could not bracket target {target}; reached ratio {hi}")
    while iterations < max_iterations:
        iterations += 1
        mid = 0.5 * (lo + hi)
        rep, value = evaluate(mid)
        if abs(value - goal) <= tol:
            return _finish(mid, rep, target, sign, iterations, measure, family)
        if value < goal:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(f"bisection did not reach tolerance {tol} in {max_iterations} steps")


def _finish(r, rep, target, sign, iterations, measure, family):
    if sign < 0:
        P = reflect_columns(rep.copula)
        rep = SolveReport(P, rep.family, -r, rep.converged, rep.sweeps_used, rep.final_residual,
                          rep.ratio_deviation, kendall_tau(P), spearman_rho(P), rep.information,
                          rep.clamped, rep.history)
    achieved = rep.tau if measure == "kendall" else rep.rho
    return CalibrationResult(sign * r, achieved, target, iterations, measure, family, rep)


def brute_force_mick(n: int, mu: float, grid_resolution: int = 200) -> CheckerboardCopula:
    """Exhaustive search for the minimum-information copula with Kendall's tau ``mu``.

    Only for ``n`` in {2, 3}.  All basis coordinates but the last are swept
    over a uniform grid of their Frechet ranges; since tau is linear along
    a single window direction, the last coordinate is then solved so that
    tau equals ``mu`` exactly.  Infeasible points are dropped and the
    least-information survivor is returned.  Independent of the greedy
    solver by construction.
    """
    n = _check_n(n)
    if n > 3:
        raise ValueError("brute force search is limited to n <= 3")
    k = (n - 1) ** 2
    I, J = np.meshgrid(np.arange(1, n), np.arange(1, n), indexing="ij")
    lo = np.maximum(0.0, (I + J - n) / n) - I * J / n**2
    hi = np.minimum(I, J) / n - I * J / n**2
    lo, hi = lo.ravel(), hi.ravel()

    a = np.zeros((n, n - 1))
    a[np.arange(n - 1), np.arange(n - 1)] = 1.0
    a[np.arange(1, n), np.arange(n - 1)] = -1.0
    basis = np.stack([np.outer(a[:, r], a[:, s]) for r in range(n - 1) for s in range(n - 1)])
    xi = _xi(n)
    last = basis[-1]
    wi = n - 2  # the last window sits at rows/cols n-2, n-1

    axes = [np.linspace(lo[t], hi[t], grid_resolution) for t in range(k - 1)]
    best_info, best_p = np.inf, None
    head = axes[0] if axes else np.zeros(1)
    tail_grid = np.stack(np.meshgrid(*axes[1:], indexing="ij"), -1).reshape(-1, k - 2) if k > 2 else np.zeros((1, 0))
    for c0 in head:
        if k > 1:
            coords = np.column_stack([np.full(len(tail_grid), c0), tail_grid])
            p0 = 1.0 / n**2 + np.einsum("bt,tij->bij", coords, basis[:-1])
        else:
            p0 = np.full((1, n, n), 1.0 / n**2)
        tau0 = 1.0 - np.einsum("bij,bij->b", xi @ p0 @ xi, p0)
        eta = p0[:, wi:, wi:].sum(axis=(1, 2))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (mu - tau0) / (2.0 * eta)
        p = p0 + t[:, None, None] * last
        ok = np.isfinite(t) & (p.min(axis=(1, 2)) >= -1e-15)
        if not ok.any():
            continue
        p = np.clip(p[ok], 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            info = np.where(p > 0, p * np.log(p), 0.0).sum(axis=(1, 2))
        b = int(np.argmin(info))
        if info[b] < best_info:
            best_info, best_p = info[b], p[b]
    if best_p is None:
        raise ValueError(f"no grid point with tau = {mu} is feasible for n={n}")
    return CheckerboardCopula(_rebalance(best_p))


def _rebalance(p: np.ndarray) -> np.ndarray:
    # project back onto exact margins after clipping rounding noise
    n = p.shape[0]
    ad = StructuralMatrices(n).a_dagger
    return np.asarray(to_copula(BasisCoordinates(n, ad @ p @ ad.T)).p)
