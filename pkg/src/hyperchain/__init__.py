"""Hyperchains: catalytic networks ``X_i + X_j -> 2 X_i + X_j`` under mass action.

The usual entry points:

>>> from hyperchain import cycle_system, positive_equilibria
>>> positive_equilibria(cycle_system(3)).point
array([0.33333333, 0.33333333, 0.33333333])
"""

__version__ = "0.1.0"

from .analysis import (
    GraphProfile,
    HamiltonianSearchInconclusive,
    LinearSubgraph,
    Parity,
    TooLarge,
    enumerate_spanning_linear_subgraphs,
    find_hamiltonian_cycle,
    has_spanning_linear_subgraph,
    initial_and_terminal_nodes,
    is_acyclic,
    is_cycle_graph,
    is_hamiltonian,
    is_rooted,
    is_strongly_connected,
    linear_digraph_adjacency_checks,
    profile,
    smallest_spanning_linear_subgraph,
    strongly_connected_components,
)
from .audit import AuditReport, audit_system, draw_sample, implication_audit
from .dynamics import (
    ConjugacyScaling,
    IntegratorOptions,
    Mode,
    Termination,
    Trajectory,
    integrate,
    integrate_unscaled_relative,
    nondimensionalize,
    polyline_hausdorff,
)
from .equilibria import (
    BoundaryEquilibrium,
    EquilibriumSet,
    Kind,
    NoSpanningLinearSubgraph,
    RootedGraph,
    boundary_equilibria,
    construct_existence_rates,
    construct_uniqueness_rates,
    positive_equilibria,
)
from .generate import (
    cycle,
    cycle_system,
    example_five,
    example_six,
    hamiltonian_plus_chords,
    random_dag,
    random_hyperchain,
    random_rates,
    random_system,
)
from .graph import (
    DegenerateNetwork,
    Hyperchain,
    HyperchainError,
    HyperchainSystem,
    adjacency_matrix,
    induced_subnetwork,
    induced_system,
    new_hyperchain,
    unit_rates,
    with_rates,
)
from .io import ParseError, dumps_json, dumps_text, load, loads
from .permanence import (
    Inapplicable,
    NotHamiltonian,
    Outcome,
    PermanenceOptions,
    PermanenceVerdict,
    hamiltonian_permanence_rates,
    nonpermanence_construction,
    nonpermanence_rates,
    numeric_permanence_test,
    psi_average,
)
from .stability import (
    Stability,
    StabilityReport,
    boundary_stability,
    classify_positive_stability,
    equilibrium_eigenvalues,
    jacobian,
    property_P,
    rank_one_eigen_update,
)
