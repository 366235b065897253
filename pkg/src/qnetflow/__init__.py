"""Rate regions and exact protocol simulation for k-pair quantum networks."""

from .network import (
    Network,
    NetworkError,
    Scenario,
    UNLIMITED,
    builtin_network,
    load_network,
    normalize_layers,
    parse_network,
    serialize_network,
)
from .flows import (
    CommodityFlow,
    CutCertificate,
    decompose_paths,
    max_flow_min_cut,
    max_weighted_rate,
    routing_feasible,
)
from .polytope import RatePolytope, certify, equal, from_halfspaces, from_points
from .regions import (
    AdmissiblePath,
    check_reversal_condition,
    classical_multicast_rate,
    cut_outer_bounds,
    ent_assisted_region,
    enumerate_admissible_paths,
    inner_region,
    outer_region,
    two_pair_back_exact,
    two_pair_back_protocol,
)
from .shallow import certify_routing_optimal, check_conditions
from .states import (
    DensityOperator,
    PureStateVector,
    QubitLabel,
    apply,
    cond_entropy,
    coherent_info,
    entanglement_entropy,
    entropy,
    fidelity,
    move_register,
    mutual_info,
    trace_distance,
)
from .protocols import (
    ProtocolScript,
    builtin_protocol,
    run_classical_linear_protocol,
    run_protocol,
    secret_sharing_audit,
    verify_protocol,
)
from .assistance import AssistanceInstance, eoa_regularized, merging_ledger
from .fixtures import fixture_region

__version__ = "0.1.0"
