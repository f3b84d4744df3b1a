"""One-pass streaming submodular cover with offline baselines and hard instances."""

from .baselines import (
    GreedyTrace,
    OptResult,
    brute_force_kstar,
    greedy_cover,
    lazy_greedy_cover,
    random_baseline,
)
from .hard import (
    HardInstance,
    PointerInput,
    TreeSpec,
    build_base_sets,
    build_instance,
    path_witness,
    verify_gap,
)
from .oracle import (
    CallCounter,
    CoverInstance,
    OracleError,
    UtilityOracle,
    check_submodular_monotone,
    marginal_gain,
)
from .sieve import QueryResult, Sieve, SieveConfig, esc_streaming
from .utilities import (
    Graph,
    KernelConfig,
    domset_oracle,
    gaussian_kernel,
    logdet_oracle,
    logdet_reference,
    setcover_oracle,
    vcover_oracle,
)

__version__ = "0.1.0"
