"""Monte Carlo power and level studies for the K-sample DISCO test."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .core_stats import IndexGroups
from .decomposition import make_dispersion
from .errors import DomainError
from .factorial import ModelFormula, decompose, term_structure
from .inference import TIE_RTOL, permutation_pvalue, replicate_f_ratios, worker_threads

__all__ = [
    "ALTERNATIVES",
    "PowerConfig",
    "PowerResult",
    "sample_noncentral_t",
    "sample_gamma_lognormal",
    "sample_normal_scale",
    "estimate_power",
    "trial_rng",
]

T_DF = 4
GAMMA_SHAPE = 2.0
GAMMA_RATE = 0.1


def sample_noncentral_t(n: int, p: int, delta: float, rng: np.random.Generator) -> np.ndarray:
    """(n, p) independent noncentral t(4) draws, ``(Z + delta) / sqrt(V / 4)``."""
    if n < 1 or p < 1:
        raise DomainError("n and p must be positive")
    z = rng.standard_normal((n, p))
    v = rng.chisquare(T_DF, (n, p))
    return (z + delta) / np.sqrt(v / T_DF)


def sample_gamma_lognormal(n: int, p: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Gamma(shape 2, rate 0.1) draws times independent Lognormal(0, sigma) errors."""
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    if n < 1 or p < 1:
        raise DomainError("n and p must be positive")
    g = rng.gamma(GAMMA_SHAPE, 1.0 / GAMMA_RATE, (n, p))
    if sigma == 0:
        return g
    return g * rng.lognormal(0.0, sigma, (n, p))


def sample_normal_scale(n: int, p: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """(n, p) independent N(0, sigma^2) draws."""
    if sigma <= 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    return sigma * rng.standard_normal((n, p))


# name -> (sampler, parameter value of the null member)
ALTERNATIVES = {
    "t": (sample_noncentral_t, 0.0),
    "gamma": (sample_gamma_lognormal, 0.0),
    "normal": (sample_normal_scale, 1.0),
}


@dataclass(frozen=True)
class PowerConfig:
    """One power study.

    Group 1 is drawn with ``param``; groups 2..K from the null member of
    the same family (central t, pure Gamma, or standard normal).
    """

    alternative: str = "t"
    param: float = 0.0
    dim: int = 10
    groups: int = 4
    n: int = 30
    level: float = 0.10
    replicates: int = 199
    trials: int = 1000
    seed: int = 0
    index: float = 1.0

    def __post_init__(self):
        if self.alternative not in ALTERNATIVES:
            raise DomainError(f"unknown alternative {self.alternative!r}; choose from {sorted(ALTERNATIVES)}")
        if self.n < 2 or self.groups < 2 or self.dim < 1 or self.trials < 1 or self.replicates < 1:
            raise DomainError("need n >= 2, groups >= 2, dim >= 1, trials >= 1, replicates >= 1")
        if not 0 < self.level < 1:
            raise DomainError(f"level must lie in (0, 1), got {self.level}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class PowerResult:
    rejection_rate: float
    mc_std_error: float
    trials: int
    config: PowerConfig

    @staticmethod
    def csv_header() -> str:
        names = [f.name for f in fields(PowerConfig)] + ["rejection_rate", "mc_std_error"]
        return ",".join(names)

    def csv_row(self) -> str:
        buf = io.StringIO()
        values = list(asdict(self.config).values()) + [f"{self.rejection_rate:.6f}", f"{self.mc_std_error:.6f}"]
        csv.writer(buf, lineterminator="").writerow(values)
        return buf.getvalue()


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo trial."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _one_trial(config: PowerConfig, trial: int, formula, factors, structure) -> bool:
    rng = trial_rng(config.seed, trial)
    sampler, null = ALTERNATIVES[config.alternative]
    blocks = [sampler(config.n, config.dim, config.param, rng)]
    blocks += [sampler(config.n, config.dim, null, rng) for _ in range(config.groups - 1)]
    test_seed = int(rng.integers(0, 2**64, dtype=np.uint64))
    disp = make_dispersion(np.vstack(blocks), config.index)
    table = decompose(disp, factors, formula, structure)
    reps = replicate_f_ratios(disp, structure, test_seed, config.replicates, threads=1)
    p = permutation_pvalue(table.rows[0].f_ratio, reps[:, 0], TIE_RTOL)
    return p <= config.level


def estimate_power(config: PowerConfig, threads=None) -> PowerResult:
    """Fraction of trials in which the permutation test rejects at ``config.level``."""
    groups = IndexGroups(np.repeat(np.arange(config.groups), config.n), tuple(range(1, config.groups + 1)))
    formula = ModelFormula(("y",), (("group",),))
    factors = {"group": groups}
    structure = term_structure(factors, formula)

    def run(t):
        return _one_trial(config, t, formula, factors, structure)

    threads = worker_threads(threads)
    if threads == 1:
        rejections = [run(t) for t in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rejections = list(ex.map(run, range(config.trials)))
    rate = sum(rejections) / config.trials
    return PowerResult(rate, math.sqrt(rate * (1.0 - rate) / config.trials), config.trials, config)
