"""Expected products of random Fourier-Walsh matrices.

Library surface: hypercube primitives (subsets, monomials, parity rule),
set-family construction and chain validation, the realized and expected
chain products (exact and Monte Carlo), binary-matrix counting oracles,
operator norms, and the experiment commands behind the `walshprod` CLI.
"""

from .errors import (
    BudgetExceededError,
    ConfigError,
    DimensionMismatchError,
    TrivialIntersectionViolation,
)
from .hypercube import (
    Dataset,
    MAX_DIMENSION,
    RNG_ALGORITHM,
    SubsetMask,
    as_sign_vector,
    dataset_from_rows,
    enumerate_cube,
    expectation_of_product,
    full_cube_dataset,
    monomial_eval,
    sample_dataset,
    xor,
)
from .families import (
    BlockStructure,
    EqualityPattern,
    SetFamily,
    WeightedFamily,
    all_subsets_of_size,
    blocked_family,
    build_block_structure,
    validate_chain,
)
from .partitions import SetPartition, bell_number, falling_factorial, set_partitions
from .matrices import (
    ExpectationMatrix,
    MCEstimate,
    ProductSpec,
    chain_product,
    mc_expected_product,
    mix_seed,
    walsh_matrix,
    weighted_walsh_matrix,
)
from .exact import (
    DEFAULT_BUDGET,
    StratumKey,
    compatible_feature_partitions,
    count_nonzero_tuples,
    exact_expected_product,
    stratum_contribution,
    valid_stratum_keys,
    weighted_monomial_sum,
)
from .counting import (
    BinMatrixSpec,
    count_even_rows,
    count_with_row_parity,
    recursion_report,
)
from .linalg import NormResult, operator_norm

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ConfigError",
    "DimensionMismatchError",
    "TrivialIntersectionViolation",
    "Dataset",
    "MAX_DIMENSION",
    "RNG_ALGORITHM",
    "SubsetMask",
    "as_sign_vector",
    "dataset_from_rows",
    "enumerate_cube",
    "expectation_of_product",
    "full_cube_dataset",
    "monomial_eval",
    "sample_dataset",
    "xor",
    "BlockStructure",
    "EqualityPattern",
    "SetFamily",
    "WeightedFamily",
    "all_subsets_of_size",
    "blocked_family",
    "build_block_structure",
    "validate_chain",
    "SetPartition",
    "bell_number",
    "falling_factorial",
    "set_partitions",
    "ExpectationMatrix",
    "MCEstimate",
    "ProductSpec",
    "chain_product",
    "mc_expected_product",
    "mix_seed",
    "walsh_matrix",
    "weighted_walsh_matrix",
    "DEFAULT_BUDGET",
    "StratumKey",
    "compatible_feature_partitions",
    "count_nonzero_tuples",
    "exact_expected_product",
    "stratum_contribution",
    "valid_stratum_keys",
    "weighted_monomial_sum",
    "BinMatrixSpec",
    "count_even_rows",
    "count_with_row_parity",
    "recursion_report",
    "NormResult",
    "operator_norm",
]
