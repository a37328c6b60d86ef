"""Build the synthetic price fixture bundled with the package.

The raw index feed behind the published summary statistics cannot be
redistributed, so this script builds a stand-in: two price series of 1636
business days whose 1635 daily log-returns, rank-transformed with
``rank / (N + 1)``, give

    tau 0.802, rho 0.939, 5% tails 67/81 and 61/81, 1% tails 13/16 and 15/16.

Ranks start from a Gaussian copula and are refined by random swaps of
y-ranks under an annealed penalty.  Returns are then heavy-tailed values
placed at those ranks and cumulated into prices.  The result is checked by
reading the file back through the normal ingest path.

Usage::

    python3 scripts/make_reference_fixture.py [output.csv]
"""

import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import scipy.stats

from mickcopula import ingest, stats

N = 1635
SEED = 20240521
TAU, RHO = 0.802, 0.939
# (band size, lower count, upper count) under rank / (N + 1)
BANDS = {5: (81, 67, 61), 1: (16, 13, 15)}


def measure(ry):
    # x ranks are 1..N in order, so only ry moves
    n = len(ry)
    rx = np.arange(1, n + 1)
    tau = scipy.stats.kendalltau(rx, ry).statistic
    rho = 1 - 6 * np.sum((rx - ry) ** 2) / (n * (n * n - 1))
    counts = {}
    for u, (k, _, _) in BANDS.items():
        counts[u] = (int(np.sum(ry[:k] <= k)), int(np.sum(ry[-k:] > n - k)))
    return tau, rho, counts


def penalty(ry):
    tau, rho, counts = measure(ry)
    cost = ((tau - TAU) / 1e-4) ** 2 + ((rho - RHO) / 1e-4) ** 2
    for u, (_, lo, hi) in BANDS.items():
        cost += 4 * ((counts[u][0] - lo) ** 2 + (counts[u][1] - hi) ** 2)
    return cost


def build_ranks(rng):
    r = np.sin(np.pi * TAU / 2)
    z = rng.multivariate_normal([0, 0], [[1, r], [r, 1]], size=N)
    order = np.argsort(z[:, 0])
    ry = scipy.stats.rankdata(z[order, 1]).astype(int)
    cost = penalty(ry)
    temp = 50.0
    for step in range(200_000):
        # swaps concentrated near the tails, where the counts live
        a = int(rng.integers(N))
        b = int(np.clip(a + rng.integers(-60, 61), 0, N - 1))
        if a == b:
            continue
        ry[a], ry[b] = ry[b], ry[a]
        new = penalty(ry)
        if new <= cost or rng.random() < np.exp((cost - new) / temp):
            cost = new
        else:
            ry[a], ry[b] = ry[b], ry[a]
        temp = max(temp * 0.9995, 1e-3)
        if cost < 1.0 and _exact(ry):
            return ry
    raise RuntimeError(f"no exact configuration found; last cost {cost:.3g}")


def _exact(ry):
    tau, rho, counts = measure(ry)
    ok = abs(tau - TAU) < 2e-4 and abs(rho - RHO) < 2e-4
    return ok and all(counts[u] == (lo, hi) for u, (_, lo, hi) in BANDS.items())


def business_days(start, count):
    out, d = [], start
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out


def main(out):
    rng = np.random.default_rng(SEED)
    ry = build_ranks(rng)
    # heavy-tailed return levels, spread apart so rounding cannot swap ranks
    levels_x = np.sort(0.008 * rng.standard_t(4, size=N)) + np.arange(N) * 1e-8
    levels_y = np.sort(0.009 * rng.standard_t(4, size=N)) + np.arange(N) * 1e-8
    rx = np.arange(N)
    perm = rng.permutation(N)  # calendar order of the points
    ret_x = levels_x[rx[perm]]
    ret_y = levels_y[ry[perm] - 1]
    px = 17800.0 * np.exp(np.concatenate([[0.0], np.cumsum(ret_x)]))
    py = 2060.0 * np.exp(np.concatenate([[0.0], np.cumsum(ret_y)]))
    days = business_days(date(2015, 1, 2), N + 1)

    out = Path(out)
    with out.open("w") as fh:
        fh.write("date,DJI,SP500\n")
        for d, a, b in zip(days, px, py):
            fh.write(f"{d.isoformat()},{float(a)!r},{float(b)!r}\n")

    summary = stats.summarize(ingest.to_pseudo_observations(ingest.log_returns(ingest.load_prices(out, "DJI", "SP500"))))
    print(out, summary)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src/mickcopula/data/reference_prices.csv")
