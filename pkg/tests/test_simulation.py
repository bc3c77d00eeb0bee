import math

import numpy as np
import pytest

from disco import DomainError, PowerConfig, PowerResult, estimate_power, sample_gamma_lognormal, sample_noncentral_t
from disco.simulation import sample_normal_scale

BIG = 1_000_000


@pytest.fixture(scope="module")
def central_t():
    return sample_noncentral_t(BIG, 1, 0.0, np.random.default_rng(1)).ravel()


class TestSamplers:
    def test_central_t_mean(self, central_t):
        # t(4) has variance 2
        assert abs(central_t.mean()) < 4 * math.sqrt(2 / BIG)

    def test_central_t_variance(self, central_t):
        assert central_t.var() == pytest.approx(4 / (4 - 2), rel=0.05)

    def test_noncentral_shape_and_independence(self):
        x = sample_noncentral_t(20_000, 3, 0.5, np.random.default_rng(2))
        assert x.shape == (20_000, 3)
        corr = np.corrcoef(x, rowvar=False)
        assert np.all(np.abs(corr[np.triu_indices(3, 1)]) < 4 / math.sqrt(20_000))

    def test_noncentral_shift(self):
        # E[sqrt(4/V)] = sqrt(pi/2) for V ~ chi2(4)
        x = sample_noncentral_t(BIG, 1, 0.5, np.random.default_rng(3))
        assert x.mean() == pytest.approx(0.5 * math.sqrt(math.pi / 2), abs=4 * x.std() / math.sqrt(BIG))

    def test_gamma_mean(self):
        x = sample_gamma_lognormal(BIG, 1, 0.0, np.random.default_rng(4))
        assert np.all(x > 0)
        assert x.mean() == pytest.approx(2 / 0.1, rel=0.01)

    def test_gamma_lognormal_mean(self):
        x = sample_gamma_lognormal(BIG, 1, 0.4, np.random.default_rng(5))
        assert x.mean() == pytest.approx(20 * math.exp(0.4**2 / 2), rel=0.01)
        assert 20 * math.exp(0.08) == pytest.approx(21.665, abs=1e-3)

    def test_domain(self):
        with pytest.raises(DomainError):
            sample_gamma_lognormal(5, 1, -0.1, np.random.default_rng())
        with pytest.raises(DomainError):
            sample_normal_scale(5, 1, 0.0, np.random.default_rng())


class TestEstimatePower:
    def test_deterministic_and_thread_independent(self):
        config = PowerConfig("gamma", 0.3, dim=3, groups=3, n=10, trials=40, replicates=49, seed=123)
        a = estimate_power(config, threads=1)
        b = estimate_power(config, threads=4)
        assert a == b
        assert a.csv_row() == b.csv_row()

    def test_std_error(self):
        r = estimate_power(PowerConfig("t", 1.5, dim=2, n=10, trials=50, replicates=49, seed=4), threads=1)
        assert r.mc_std_error == pytest.approx(math.sqrt(r.rejection_rate * (1 - r.rejection_rate) / 50))
        assert r.trials == 50 and 0 <= r.rejection_rate <= 1

    def test_strong_alternative_detected(self):
        r = estimate_power(PowerConfig("normal", 5.0, dim=1, groups=2, n=30, level=0.05, trials=40, seed=8), threads=1)
        assert r.rejection_rate > 0.9

    def test_csv(self):
        r = PowerResult(0.25, 0.0433, 100, PowerConfig(trials=100))
        assert PowerResult.csv_header().split(",")[-2:] == ["rejection_rate", "mc_std_error"]
        row = r.csv_row().split(",")
        assert len(row) == len(PowerResult.csv_header().split(","))
        assert row[0] == "t" and row[-2:] == ["0.250000", "0.043300"]

    @pytest.mark.parametrize(
        "kwargs",
        [dict(alternative="cauchy"), dict(n=1), dict(groups=1), dict(dim=0), dict(level=1.0), dict(trials=0), dict(seed=-1)],
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(DomainError):
            PowerConfig(**kwargs)
