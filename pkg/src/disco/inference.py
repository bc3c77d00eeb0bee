"""Permutation tests for equal distributions on distance components.

Every replicate draws its permutation from its own Philox stream, keyed by
the master seed with the replicate number in the counter. Replicates are
processed in fixed-size chunks, so results do not depend on how many
worker threads run them.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import stats

from .core_stats import IndexGroups, as_data_matrix
from .decomposition import DEFAULT_FAST_THRESHOLD, make_dispersion
from .errors import DataError, DesignError, DomainError
from .factorial import DiscoTable, ModelFormula, decompose, parse_formula, term_statistics, term_structure

__all__ = [
    "DEFAULT_REPLICATES",
    "MIN_RECOMMENDED_REPLICATES",
    "SCHEME",
    "LowReplicateWarning",
    "PermutationResult",
    "permutation_pvalue",
    "replicate_rng",
    "replicate_f_ratios",
    "worker_threads",
    "permutation_test",
    "disco_test",
    "conservative_critical_value",
    "cell_mean_residuals",
]

DEFAULT_REPLICATES = 999
MIN_RECOMMENDED_REPLICATES = 99
SCHEME = "unrestricted permutation"
TIE_RTOL = 1e-12
_CHUNK = 64
_UINT64 = 2**64


class LowReplicateWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PermutationResult:
    terms: tuple
    observed: tuple
    replicates: int
    seed: int
    p_values: tuple
    replicate_stats: np.ndarray | None = None
    scheme: str = SCHEME
    low_replicates: bool = False

    def p_value(self, term: str) -> float:
        return self.p_values[self.terms.index(term)]


def permutation_pvalue(observed: float, replicate_values, rtol: float = 0.0) -> float:
    """``(1 + #{replicate >= observed}) / (R + 1)``.

    Ties count as exceedances. With ``rtol`` > 0, replicates within
    ``rtol * |observed|`` below the observed value also count as ties.
    """
    reps = np.asarray(replicate_values, dtype=float).ravel()
    if reps.size == 0:
        raise DomainError("need at least one replicate")
    threshold = observed - rtol * abs(observed)
    return (1.0 + np.count_nonzero(reps >= threshold)) / (reps.size + 1.0)


def check_seed(seed) -> int:
    if seed is None:
        return int(np.random.SeedSequence().entropy % _UINT64)
    seed = int(seed)
    if not 0 <= seed < _UINT64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _stream_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(2, np.uint64)


def replicate_rng(seed: int, index: int, key=None) -> np.random.Generator:
    """Generator for replicate ``index`` of the stream family named by ``seed``."""
    if key is None:
        key = _stream_key(seed)
    counter = np.array([0, 0, 0, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def worker_threads(threads=None) -> int:
    """Thread count: explicit argument, else ``DISCO_THREADS``, else CPU count."""
    if threads is None:
        env = os.environ.get("DISCO_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def replicate_f_ratios(disp, structure, seed: int, replicates: int, threads: int) -> np.ndarray:
    key = _stream_key(seed)
    n = structure.n

    def run(bounds):
        lo, hi = bounds
        perms = np.stack([replicate_rng(seed, r, key).permutation(n) for r in range(lo, hi)])
        return term_statistics(disp, structure, perms)[2]

    chunks = [(lo, min(lo + _CHUNK, replicates + 1)) for lo in range(1, replicates + 1, _CHUNK)]
    if threads == 1 or len(chunks) == 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, chunks))
    return np.vstack(parts)


def permutation_test(data, factors: Mapping[str, IndexGroups], formula, alpha: float = 1.0,
                     replicates: int = DEFAULT_REPLICATES, seed=None, threads=None,
                     keep_replicates: bool = False,
                     fast_threshold: int | None = DEFAULT_FAST_THRESHOLD):
    """Distance components table with permutation p-values for each term.

    Each replicate permutes all N observation indices once and recomputes
    every term's F ratio from the same distance matrix.

    Returns
    -------
    (DiscoTable, PermutationResult)
    """
    if isinstance(formula, str):
        formula = parse_formula(formula)
    replicates = int(replicates)
    if replicates < 1:
        raise DomainError(f"replicates must be >= 1, got {replicates}")
    low = replicates < MIN_RECOMMENDED_REPLICATES
    if low:
        warnings.warn(
            f"{replicates} replicates is below the recommended minimum of {MIN_RECOMMENDED_REPLICATES}",
            LowReplicateWarning,
            stacklevel=2,
        )
    seed = check_seed(seed)
    structure = term_structure(factors, formula)
    disp = make_dispersion(data, alpha, fast_threshold)
    table = decompose(disp, factors, formula, structure)
    observed = np.array([r.f_ratio for r in table.rows])
    reps = replicate_f_ratios(disp, structure, seed, replicates, worker_threads(threads))
    pvals = tuple(permutation_pvalue(observed[j], reps[:, j], TIE_RTOL) for j in range(observed.size))
    result = PermutationResult(
        terms=structure.labels,
        observed=tuple(observed.tolist()),
        replicates=replicates,
        seed=seed,
        p_values=pvals,
        replicate_stats=reps if keep_replicates else None,
        low_replicates=low,
    )
    note = f"p-values: {SCHEME}, R={replicates}, seed={seed}"
    return table.with_p_values(pvals, note), result


def disco_test(data, formula, alpha: float = 1.0, replicates: int = DEFAULT_REPLICATES,
               seed=None, threads=None, **kwargs):
    """Permutation DISCO test on a :class:`~disco.io.DataSet`."""
    if isinstance(formula, str):
        formula = parse_formula(formula)
    y, factors = data.bind(formula)
    return permutation_test(y, factors, formula, alpha, replicates, seed, threads, **kwargs)


def conservative_critical_value(alpha0: float) -> float:
    """Squared normal quantile ``Phi^-1(1 - alpha0/2)**2``.

    For a quadratic form of centred Gaussians with unit mean, exceeding this
    value has probability at most ``alpha0`` whenever ``alpha0 <= 0.215``.
    The F ratio is asymptotically such a form under the null, so this is a
    large-sample, conservative rejection threshold. It is informational and
    never replaces the permutation p-value.
    """
    alpha0 = float(alpha0)
    if not 0.0 < alpha0 <= 0.215:
        raise DomainError(f"level must lie in (0, 0.215], got {alpha0}")
    return float(stats.norm.isf(alpha0 / 2.0) ** 2)


def cell_mean_residuals(data, groups: IndexGroups) -> np.ndarray:
    """Subtract each group's mean vector from its observations."""
    y = as_data_matrix(data)
    if y.shape[0] != groups.n:
        raise DataError(f"data has {y.shape[0]} rows, groups cover {groups.n}")
    if groups.k < 2:
        raise DesignError("factor has one level")
    sums = np.zeros((groups.k, y.shape[1]))
    np.add.at(sums, groups.codes, y)
    means = sums / groups.sizes[:, None]
    return y - means[groups.codes]
