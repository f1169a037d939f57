import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import kstest

from grantcontest import ClaytonCopula, ParameterError, QualityDistribution


@pytest.fixture(scope="module")
def dist():
    return QualityDistribution()


@pytest.fixture(scope="module")
def copula():
    return ClaytonCopula(theta=10.0)


class TestQualityDistribution:
    def test_cdf_endpoints(self, dist):
        assert dist.cdf(0.25) == 0.0
        assert dist.cdf(1.0) == 1.0

    def test_cdf_clamps_outside_support(self, dist):
        assert dist.cdf(0.0) == 0.0
        assert dist.cdf(-3.0) == 0.0
        assert dist.cdf(1.5) == 1.0

    def test_cdf_median(self, dist):
        # solve 1 - (16/9)(1-v)^2 = 1/2 by hand: v = 1 - 3/(4 sqrt(2))
        assert dist.cdf(0.46967) == pytest.approx(0.5, abs=1e-4)

    def test_cdf_strictly_increasing_on_support(self, dist):
        v = np.linspace(0.25, 1.0, 500)
        assert np.all(np.diff(dist.cdf(v)) > 0)

    def test_quantile_endpoints(self, dist):
        assert dist.quantile(0.0) == 0.25
        assert dist.quantile(1.0) == 1.0

    def test_quantile_median(self, dist):
        assert dist.quantile(0.5) == pytest.approx(0.46967, abs=1e-5)

    def test_quantile_domain_error(self, dist):
        with pytest.raises(ParameterError):
            dist.quantile(-0.01)
        with pytest.raises(ParameterError):
            dist.quantile(1.01)

    def test_round_trip_identity(self, dist):
        v = np.linspace(0.25, 1.0, 1000)
        assert np.max(np.abs(dist.quantile(dist.cdf(v)) - v)) <= 1e-12
        u = np.linspace(0.0, 1.0, 1000)
        assert np.max(np.abs(dist.cdf(dist.quantile(u)) - u)) <= 1e-12

    def test_density_nonnegative_and_integrates_to_one(self, dist):
        v = np.linspace(0.25, 1.0, 200)
        assert np.all(dist.density(v) >= 0)
        assert dist.density(0.2) == 0.0
        assert dist.density(1.1) == 0.0
        total, err = quad(dist.density, 0.25, 1.0, epsabs=1e-12)
        assert abs(total - 1.0) <= 1e-9

    def test_support_is_fixed(self):
        with pytest.raises(ParameterError):
            QualityDistribution(lower=0.0, upper=1.0)


class TestClaytonCopula:
    def test_theta_must_be_positive(self):
        with pytest.raises(ParameterError):
            ClaytonCopula(theta=0.0)
        with pytest.raises(ParameterError):
            ClaytonCopula(theta=-2.0)

    def test_uniform_margins(self, copula):
        grid = np.linspace(0.01, 1.0, 50)
        assert np.max(np.abs(copula.cdf(grid, np.ones_like(grid)) - grid)) <= 1e-12
        assert np.max(np.abs(copula.cdf(np.ones_like(grid), grid) - grid)) <= 1e-12

    def test_boundary_values(self, copula):
        assert copula.cdf(0.5, 1.0) == 0.5
        assert copula.cdf(0.7, 0.0) == 0.0
        assert copula.cdf(0.0, 0.7) == 0.0

    def test_joint_cdf_hand_value(self, copula):
        # (2 * 2^10 - 1)^(-1/10) evaluated by hand
        assert copula.cdf(0.5, 0.5) == pytest.approx(0.4665, abs=5e-4)
        assert copula.cdf(0.5, 0.5) == pytest.approx(2047.0 ** -0.1, rel=1e-12)

    def test_conditional_cdf_hand_value(self, copula):
        assert copula.conditional_cdf(1.0, 0.8) == pytest.approx(0.8**11, abs=1e-12)

    def test_conditional_cdf_boundaries(self, copula):
        for u in (0.1, 0.5, 1.0):
            assert copula.conditional_cdf(u, 1.0) == 1.0
            assert copula.conditional_cdf(u, 0.0) == 0.0
        # singular corner defined by the analytic limit
        assert copula.conditional_cdf(0.0, 0.5) == 1.0

    def test_conditional_cdf_matches_derivative_of_joint(self, copula):
        h = 1e-6
        s_grid = np.linspace(0.05, 0.95, 19)
        fd = (copula.cdf(0.5 + h, s_grid) - copula.cdf(0.5 - h, s_grid)) / (2 * h)
        assert np.max(np.abs(fd - copula.conditional_cdf(0.5, s_grid))) <= 1e-6

    def test_conditional_cdf_nonincreasing_in_true_rank(self, copula):
        u = np.linspace(0.01, 1.0, 200)
        for s in (0.1, 0.5, 0.9):
            values = copula.conditional_cdf(u, np.full_like(u, s))
            assert np.all(np.diff(values) <= 1e-15)

    def test_conditional_quantile_hand_value(self, copula):
        assert copula.conditional_quantile(1.0, 0.5) == pytest.approx(
            0.5 ** (1.0 / 11.0), rel=1e-12
        )
        assert copula.conditional_quantile(1.0, 0.5) == pytest.approx(0.9389, abs=1e-4)

    def test_conditional_quantile_approaches_one(self, copula):
        q = 1.0 - np.logspace(-4, -12, 9)
        s = copula.conditional_quantile(np.full_like(q, 0.3), q)
        assert np.all(np.diff(s) > 0)
        assert s[-1] == pytest.approx(1.0, abs=1e-6)

    def test_conditional_round_trip_grid(self, copula):
        u = np.linspace(0.01, 1.0, 100)
        q = np.linspace(0.005, 0.995, 100)
        uu, qq = np.meshgrid(u, q)
        s = copula.conditional_quantile(uu, qq)
        assert np.max(np.abs(copula.conditional_cdf(uu, s) - qq)) <= 1e-10

    def test_conditional_quantile_domain_errors(self, copula):
        with pytest.raises(ParameterError):
            copula.conditional_quantile(0.0, 0.5)
        with pytest.raises(ParameterError):
            copula.conditional_quantile(1.2, 0.5)
        with pytest.raises(ParameterError):
            copula.conditional_quantile(0.5, 0.0)
        with pytest.raises(ParameterError):
            copula.conditional_quantile(0.5, 1.0)

    def test_sampled_margin_is_uniform(self, copula):
        rng = np.random.default_rng(1234)
        n = 100_000
        u = 1.0 - rng.uniform(size=n)  # (0, 1]
        q = np.clip(rng.uniform(size=n), 1e-12, 1.0 - 1e-12)
        s = copula.conditional_quantile(u, q)
        stat = kstest(s, "uniform").statistic
        assert stat < 1.628 / np.sqrt(n)  # 1% critical value

    def test_conditional_cdf_between_zero_and_one(self, copula):
        u = np.linspace(1e-6, 1.0, 100)
        s = np.linspace(1e-6, 1.0 - 1e-6, 100)
        uu, ss = np.meshgrid(u, s)
        values = copula.conditional_cdf(uu, ss)
        assert np.all(values >= 0.0) and np.all(values <= 1.0)

    def test_theta_is_configurable(self):
        weak = ClaytonCopula(theta=0.5)
        tight = ClaytonCopula(theta=50.0)
        # tighter coupling pushes the conditional mass closer to the true rank
        assert tight.conditional_cdf(0.9, 0.5) < weak.conditional_cdf(0.9, 0.5)
