"""
Solving and auditing a minimum-information copula
=================================================

Solve the 30 x 30 copula with the least information among those with
Kendall's tau 0.5, then check the optimality conditions it should satisfy.
Run with ``python notebooks/01_solve_and_audit.py``.
"""

# %%
import numpy as np

import mickcopula as mc
from mickcopula.diagnostics import (
    hessian_definiteness,
    ratio_constancy,
    stationarity_fit,
    tp2_check,
    uniqueness_advisory,
)

# %% [markdown]
# Calibration searches for the pseudo log odds ratio whose solution has the
# requested tau.  The answer sits a little under 2.9.

# %%
res = mc.calibrate(30, 0.5, measure="kendall", family="mick")
P = res.report.copula
print(f"ratio = {res.ratio:.4f}, tau = {mc.kendall_tau(P):.6f}, rho = {mc.spearman_rho(P):.4f}")
print(f"information = {mc.information(P):.4f}  (uniform: {-2 * np.log(30):.4f})")

# %% [markdown]
# At the optimum every 2 x 2 window has the same pseudo log odds ratio.

# %%
rep = ratio_constancy(P, "pseudo")
print(f"pseudo ratio mean {rep.mean:.6f}, max deviation {rep.max_deviation:.2e}")
print(f"plain log odds vary: {ratio_constancy(P, 'plain').max_deviation:.3f}")

# %% [markdown]
# The fitted Lagrange multiplier comes out equal to the ratio.

# %%
fit = stationarity_fit(P)
print(f"lambda = {fit.lam:.6f}, residual = {fit.residual_norm:.2e}")
print(uniqueness_advisory(fit.lam))

# %%
tp2 = tp2_check(P)
print(f"TP2 holds: {tp2.holds} (smallest minor {tp2.min_minor:.3e})")

# %% [markdown]
# The Hessian check is dense, so use a coarser grid.

# %%
small = mc.solve_mick(8, 1.5).copula
for lam in (0.0, 1.5, 1.99):
    h = hessian_definiteness(small, lam)
    print(f"lambda {lam:4.2f}: min eigenvalue {h.min_eigenvalue:.3e}, "
          f"quotient in [{h.quotient_min:.3f}, {h.quotient_max:.3f}], Gershgorin {h.gershgorin_bound:.3f}")
