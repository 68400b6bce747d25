import numpy as np
import pytest

from ridge_lab.core.diagnostics import (Estimate, ScalingRow, ScalingTable,
                                        acf, batch_means_se, esjd, iact,
                                        ks_distance, mean_se, scaling_fit,
                                        split_discrepancy)


def test_estimate_unpacks():
	value, se = Estimate(1.5, 0.25)
	assert (value, se) == (1.5, 0.25)
	assert not Estimate(1.0, 0.0).flagged()
	assert Estimate(1.0, 0.0, ("low ess",)).flagged()


def test_mean_se():
	est = mean_se([1.0, 2.0, 3.0, 4.0])
	assert est.value == pytest.approx(2.5)
	assert est.se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
	with pytest.raises(ValueError):
		mean_se([])


def test_esjd_constant_and_alternating():
	assert esjd(np.ones((10, 2))) == 0.0
	states = np.array([0.0, 2.0, 0.0, 2.0])
	assert esjd(states) == pytest.approx(4.0)


def test_esjd_selector():
	states = np.array([[0.0, 0.0], [1.0, 3.0]])
	assert esjd(states, [0]) == pytest.approx(1.0)
	assert esjd(states, [1]) == pytest.approx(9.0)
	with pytest.raises(ValueError):
		esjd(np.zeros((1, 2)))


def test_acf_of_ar1():
	rng = np.random.default_rng(3)
	n = 100_000
	phi = 0.8
	x = np.empty(n)
	x[0] = 0.0
	noise = rng.standard_normal(n)
	for i in range(1, n):
		x[i] = phi * x[i - 1] + noise[i]
	rho = acf(x, 3)
	assert rho[0] == pytest.approx(1.0)
	assert rho[1] == pytest.approx(phi, abs=0.02)
	assert rho[2] == pytest.approx(phi**2, abs=0.03)
	# AR(1) IACT is (1 + phi) / (1 - phi)
	assert iact(x).tau == pytest.approx(9.0, rel=0.2)


def test_acf_needs_long_series():
	with pytest.raises(ValueError):
		acf(np.arange(20.0), 5)


def test_iact_degenerate_and_white_noise():
	assert iact(np.ones(100)).degenerate
	white = np.random.default_rng(4).standard_normal(20000)
	res = iact(white)
	assert res.tau == pytest.approx(1.0, abs=0.15)
	assert res.converged


def test_ks_distance():
	same = ks_distance([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
	assert same.statistic == 0.0
	apart = ks_distance(np.zeros(50), np.ones(50))
	assert apart.statistic == pytest.approx(1.0)
	assert apart.pvalue < 1e-6


def test_scaling_fit_exact_power_law():
	eps = np.array([0.01, 0.02, 0.05, 0.1])
	fit = scaling_fit(zip(eps, 3.0 * eps**1.5))
	assert fit.slope == pytest.approx(1.5)
	assert fit.half_width == pytest.approx(0.0, abs=1e-9)
	assert fit.n_points == 4


def test_scaling_table_modes():
	table = ScalingTable()
	for e in (0.1, 0.05, 0.025):
		table.add(ScalingRow(e, "esjd", e**2))
		table.add(ScalingRow(e, "accept", 0.5))
	assert table.modes() == ["accept", "esjd"]
	assert [r.epsilon for r in table.select("esjd")] == [0.025, 0.05, 0.1]
	assert table.fit("esjd").slope == pytest.approx(2.0)
	assert table.fit("accept").slope == pytest.approx(0.0, abs=1e-12)
	with pytest.raises(ValueError):
		scaling_fit(table)


def test_scaling_fit_rejects_bad_input():
	with pytest.raises(ValueError):
		scaling_fit([(0.1, 1.0), (0.2, 2.0)])
	with pytest.raises(ValueError):
		scaling_fit([(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)])


def test_batch_means_and_split():
	x = np.random.default_rng(5).standard_normal(10000)
	est = batch_means_se(x)
	assert est.se == pytest.approx(0.01, rel=0.35)
	assert abs(split_discrepancy(x)) < 5.0
