"""Certified upper bounds for independence numbers of packing graphs.

Finite graphs get moment-matrix relaxations of increasing level t, solved
with a built-in interior-point SDP solver and re-verified through an
independent dual-certificate check.  Spherical codes get the zonal
two-point linear programming bound.
"""

from .bounds import (
    BoundResult,
    MomentProgram,
    VerificationReport,
    assemble_lasserre,
    indicator_solution,
    las_bound,
    lift_theta_prime_solution,
    moebius_recover_measure,
    moment_matrix,
    theta,
    theta_prime,
    three_point_bound,
    verify_dual_certificate,
)
from .errors import (
    CapExceeded,
    CertificateError,
    GraphFormatError,
    PackboundError,
    SolverFailure,
)
from .graphs import (
    AlphaResult,
    Graph,
    alpha_exact,
    generate_cap_graph,
    generate_circle_code,
    generate_code_graph,
    generate_complete,
    generate_cycle,
    generate_empty,
    generate_petersen,
    generate_random,
    load_graph,
    local_subgraph,
)
from .indep import (
    IndepSetBasis,
    UnionTable,
    build_union_table,
    enumerate_independent_sets,
)
from .sdp import (
    FeasibilityReport,
    SdpProblem,
    SdpSolution,
    check_feasibility,
    export_sdpa,
    parse_sdpa,
    solve,
)
from .sphere import (
    CertificateReport,
    DelsarteResult,
    GegenbauerEvaluator,
    delsarte_lp_bound,
    gegenbauer_eval,
    trivial_code_bound,
    verify_certificate,
)

__version__ = "0.1.0"
