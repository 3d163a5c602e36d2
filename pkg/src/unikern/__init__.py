"""unikern: unified spectral clustering with learned kernel-space graphs.

The similarity graph, the continuous spectral embedding, and the discrete
cluster labels are optimized jointly instead of in separate stages; a
multiple-kernel variant additionally learns a convex combination of base
kernels. A decoupled three-step baseline and full evaluation metrics are
included for comparison.
"""

from .discrete import best_rotation, discretize, labels_of, one_hot
from .embedding import (
    Laplacian,
    build_laplacian,
    init_embedding,
    ky_fan_gap,
    update_embedding,
)
from .errors import DataError, FactorizationError, SolverError
from .graph import (
    GraphState,
    alm_residual,
    pairwise_sq_dists,
    soft_threshold,
    update_graph,
    update_multiplier,
    update_split,
)
from .harness import (
    Dataset,
    Report,
    RunConfig,
    gen_blobs,
    gen_rings,
    load_csv,
    run,
    write_report,
)
from .kernels import (
    KernelBank,
    KernelMatrix,
    KernelSpec,
    build_kernel,
    combine,
    gaussian,
    linear,
    load_kernel,
    normalize_kernel,
    polynomial,
    repair_psd,
    save_kernel,
    standard_bank,
)
from .metrics import accuracy, connected_components, nmi, purity
from .numerics import spd_solve, sym_eig_smallest, thin_svd
from .solvers import (
    HyperParams,
    SolveResult,
    alignment_cost,
    kmeans,
    scmk,
    scsk,
    tsep,
    update_weights,
)

__version__ = "0.1.0"
