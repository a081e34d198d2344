"""scarkit: quantum many-body scar candidates on Rydberg-blockade lattices.

Graph-based searches (clique covers with bipartite quotients; frustrated
three-set partitions) plus PXP dynamics in the blockade-constrained space to
verify them.
"""

__version__ = "0.1.0"

from .basis import Basis, BasisSizeError, enumerate_basis
from .graph import (
    Bipartition,
    Graph,
    GraphFormatError,
    Partition3,
    enumerate_cliques,
    enumerate_maximal_independent_sets,
    load_graph,
    quotient_graph,
    save_graph,
    two_color,
)
from .lattices import (
    LatticeSpec,
    UnsupportedBoundaryError,
    build_lattice,
    canonical_type2_partition,
    parse_lattice_token,
)
from .cover import exact_covers
from .search import (
    CliqueCover,
    ConditionReport,
    TypeICandidate,
    TypeIICandidate,
    check_type2,
    find_type1,
    search_type2,
)
from .operators import (
    CollectiveOps,
    ConvergenceError,
    SparseOperator,
    apply,
    build_pxp,
    build_su2,
    combine_j_theta,
    extremal_eigenpair,
)
from .states import (
    DegenerateStateError,
    all_down,
    dimer_neel,
    fock_state,
    gs_theta,
    max_occupied,
    neel_state,
    product_state,
    y_gamma,
    z_beta,
)
from .dynamics import (
    DimCapError,
    Eigensystem,
    RevivalMetrics,
    Trajectory,
    entanglement_entropy,
    evolve,
    fidelity_series,
    full_spectrum,
    occupation_series,
    optimize_deformation,
    overlap_scatter,
    revival_metrics,
)
