"""Optimal two-qubit swap probability under PPT operations.

Library layout:

- ``linops``:   dense complex linear algebra on small matrices
- ``states``:   two-qubit density matrices, xi / xi' families, random states
- ``measures``: concurrence, negativity, purity, local purity gap
- ``channels``: Choi matrices, PPT-operation checks, the SLOCC swap channel
- ``sdpcore``:  small dense SDP solver plus an independent feasibility oracle
- ``swapopt``:  the swap SDPs (exact and epsilon-approximate) and bound curves
- ``expcli``:   command-line experiment harness (``pptswap`` entry point)
"""

from .linops import (
    kron,
    partial_trace,
    partial_transpose,
    hermitian_eig,
    trace_norm,
    trace_distance,
)
from .states import (
    DensityMatrix,
    RandomStateSpec,
    xi_state,
    xi_prime_state,
    haar_unitary,
    random_simplex_eigenvalues,
    random_density,
    pure_state,
)
from .measures import (
    MeasureVector,
    concurrence,
    negativity,
    purity,
    local_purity_gap,
    is_separable,
    measure_vector,
)
from .channels import (
    ChoiMatrix,
    KrausPair,
    swap_operator,
    kraus_to_choi,
    apply_choi,
    check_ppt_operation,
    slocc_swap_kraus,
)
from .sdpcore import (
    SdpProblem,
    SdpSolution,
    hermitian_embedding,
    solve,
    feasibility_oracle,
    bisect_max_objective,
    OracleInconclusive,
)
from .swapopt import (
    SwapResult,
    exact_swap_probability,
    approx_swap_probability,
    exact_swap_problem,
    analytic_p_xi,
    lower_bound_curve,
    upper_bound_curve,
)

__version__ = "0.1.0"

__all__ = [
    "kron",
    "partial_trace",
    "partial_transpose",
    "hermitian_eig",
    "trace_norm",
    "trace_distance",
    "DensityMatrix",
    "RandomStateSpec",
    "xi_state",
    "xi_prime_state",
    "haar_unitary",
    "random_simplex_eigenvalues",
    "random_density",
    "pure_state",
    "MeasureVector",
    "concurrence",
    "negativity",
    "purity",
    "local_purity_gap",
    "is_separable",
    "measure_vector",
    "ChoiMatrix",
    "KrausPair",
    "swap_operator",
    "kraus_to_choi",
    "apply_choi",
    "check_ppt_operation",
    "slocc_swap_kraus",
    "SdpProblem",
    "SdpSolution",
    "hermitian_embedding",
    "solve",
    "feasibility_oracle",
    "bisect_max_objective",
    "OracleInconclusive",
    "SwapResult",
    "exact_swap_probability",
    "approx_swap_probability",
    "exact_swap_problem",
    "analytic_p_xi",
    "lower_bound_curve",
    "upper_bound_curve",
    "__version__",
]
