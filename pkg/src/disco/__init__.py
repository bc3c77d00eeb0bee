"""Distance components (DISCO) analysis.

Decomposes the total dispersion of index-power Euclidean distances into
between-sample and within-sample components and tests equality of K
multivariate distributions by permutation.
"""

from .core_stats import (
    DistanceMatrix,
    IndexGroups,
    d_alpha,
    gini_mean,
    linearized_within_sums,
    pairwise_alpha_distances,
)
from .decomposition import (
    DiscoComponents,
    GiniSumMatrix,
    between_via_pairs,
    classical_anova,
    gini_sum_matrix,
    oneway_disco,
    oneway_disco_data,
)
from .errors import (
    DataError,
    DegenerateError,
    DesignError,
    DiscoError,
    DomainError,
    FormulaSyntaxError,
    ModelError,
    UnknownColumnError,
)
from .factorial import DiscoTable, ModelFormula, cross_levels, multiway_disco, parse_formula
from .inference import (
    PermutationResult,
    cell_mean_residuals,
    conservative_critical_value,
    disco_test,
    permutation_pvalue,
    permutation_test,
)
from .io import DataSet, load_csv, render_disco_table
from .simulation import (
    PowerConfig,
    PowerResult,
    estimate_power,
    sample_gamma_lognormal,
    sample_noncentral_t,
)

__version__ = "0.1.0"
