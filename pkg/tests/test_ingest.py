import math
from datetime import date

import numpy as np
import pytest

from mickcopula.ingest import (
    AlignedSeries,
    IngestError,
    align,
    load_pair,
    load_prices,
    load_reference_dataset,
    log_returns,
    to_pseudo_observations,
)
from mickcopula.stats import empirical_rho, empirical_tau, summarize


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadPrices:
    def test_drops_missing(self, tmp_path):
        path = write(tmp_path, "p.csv", "date,a,b\n2020-01-02,1,2\n2020-01-03,2,\n2020-01-06,3,4\n2020-01-07,4,5\n")
        s = load_prices(path, "a", "b")
        assert len(s) == 3
        assert s.timestamps[1] == date(2020, 1, 6)

    def test_sorts_dates(self, tmp_path):
        path = write(tmp_path, "p.csv", "date,a,b\n2020-01-06,3,4\n2020-01-02,1,2\n2020-01-03,2,3\n")
        s = load_prices(path, "a", "b")
        assert list(s.x) == [1, 2, 3]

    def test_duplicate_timestamp(self, tmp_path):
        path = write(tmp_path, "p.csv", "date,a,b\n2020-01-02,1,2\n2020-01-02,2,3\n2020-01-03,2,3\n")
        with pytest.raises(IngestError, match="2020-01-02"):
            load_prices(path, "a", "b")

    def test_bad_number(self, tmp_path):
        path = write(tmp_path, "p.csv", "date,a,b\n2020-01-02,1,x\n2020-01-03,2,3\n2020-01-06,2,3\n")
        with pytest.raises(IngestError, match="'x'"):
            load_prices(path, "a", "b")

    def test_bad_date(self, tmp_path):
        path = write(tmp_path, "p.csv", "date,a,b\n02/01/2020,1,2\n")
        with pytest.raises(IngestError, match="timestamp"):
            load_prices(path, "a", "b")

    def test_missing_column(self, tmp_path):
        path = write(tmp_path, "p.csv", "date,a\n2020-01-02,1\n")
        with pytest.raises(IngestError, match="'b'"):
            load_prices(path, "a", "b")

    def test_too_few_rows(self, tmp_path):
        path = write(tmp_path, "p.csv", "date,a,b\n2020-01-02,1,2\n2020-01-03,2,3\n")
        with pytest.raises(IngestError, match="usable rows"):
            load_prices(path, "a", "b")

    def test_custom_timestamp_column(self, tmp_path):
        path = write(tmp_path, "p.csv", "day,a,b\n2020-01-02,1,2\n2020-01-03,2,3\n2020-01-06,2,3\n")
        assert len(load_prices(path, "a", "b", timestamp_column="day")) == 3


class TestAlignment:
    def test_inner_join_of_two_files(self, tmp_path):
        a = write(tmp_path, "a.csv", "date,close\n2020-01-02,1\n2020-01-03,2\n2020-01-06,3\n2020-01-07,4\n")
        b = write(tmp_path, "b.csv", "date,close\n2020-01-03,20\n2020-01-06,30\n2020-01-07,40\n2020-01-08,50\n")
        s = load_pair(a, "close", b, "close")
        assert s.timestamps == (date(2020, 1, 3), date(2020, 1, 6), date(2020, 1, 7))
        assert list(s.y) == [20, 30, 40]

    def test_align_series(self):
        d = [date(2020, 1, k) for k in (2, 3, 6, 7)]
        a = AlignedSeries(tuple(d), np.array([1.0, 2, 3, 4]), np.zeros(4))
        b = AlignedSeries(tuple(d[1:]), np.array([5.0, 6, 7]), np.zeros(3))
        s = align(a, b)
        assert list(s.x) == [2, 3, 4] and list(s.y) == [5, 6, 7]

    def test_invariant_enforced(self):
        with pytest.raises(IngestError):
            AlignedSeries((date(2020, 1, 3), date(2020, 1, 2)), np.zeros(2), np.zeros(2))


def series(x, y=None):
    n = len(x)
    ts = tuple(date.fromordinal(date(2020, 1, 1).toordinal() + k) for k in range(n))
    return AlignedSeries(ts, np.asarray(x, float), np.asarray(y if y is not None else x, float))


class TestReturns:
    def test_constant(self):
        assert np.all(log_returns(series([5, 5, 5, 5])).x == 0)

    def test_e(self):
        assert log_returns(series([1, math.e, math.e])).x[0] == pytest.approx(1.0)

    def test_doubling(self):
        r = log_returns(series([1, 2, 4, 8]))
        assert np.allclose(r.x, math.log(2)) and len(r) == 3

    def test_nonpositive(self):
        with pytest.raises(IngestError, match="nonpositive"):
            log_returns(series([1, 0, 2]))


class TestPseudo:
    def test_increasing_mid_rank(self):
        obs = to_pseudo_observations(series([1, 2, 3, 4]), convention="mid-rank")
        assert np.allclose(obs.u, [0.125, 0.375, 0.625, 0.875])

    def test_reversal(self):
        a = to_pseudo_observations(series([3, 1, 4, 1.5, 9]))
        b = to_pseudo_observations(series([9, 1.5, 4, 1, 3]))
        assert np.allclose(a.u, b.u[::-1])

    def test_monotone_invariance(self, rng):
        x, y = rng.standard_normal((2, 200))
        a = to_pseudo_observations(series(x, y))
        b = to_pseudo_observations(series(np.exp(3 * x) + 1, y**3))
        assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)
        assert empirical_tau(a) == empirical_tau(b)
        assert empirical_rho(a) == empirical_rho(b)


class TestReferenceDataset:
    def test_length(self):
        s = load_reference_dataset()
        assert len(s) == 1636
        assert len(log_returns(s)) == 1635

    def test_observed_summary(self):
        obs = to_pseudo_observations(log_returns(load_reference_dataset()))
        s = summarize(obs)
        assert s.tau == pytest.approx(0.802, abs=5e-4)
        assert s.rho == pytest.approx(0.939, abs=5e-4)
        assert (s.lower_tail_5, s.upper_tail_5) == (67 / 81, 61 / 81)
        assert (s.lower_tail_1, s.upper_tail_1) == (13 / 16, 15 / 16)

    def test_deterministic(self):
        a = to_pseudo_observations(log_returns(load_reference_dataset()))
        b = to_pseudo_observations(log_returns(load_reference_dataset()))
        assert a.u.tobytes() == b.u.tobytes() and a.v.tobytes() == b.v.tobytes()
