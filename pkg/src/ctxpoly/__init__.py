"""Contextuality polytopes for prepare-and-measure scenarios.

Scenario/behavior types with canonical JSON documents, noncontextuality
decisions by LP over finite ontological models, the l1 contextuality
distance, free operations and measurement simulability, block composition
of scenarios, and quantum realizations — all at desk scale.
"""

from .scenario import (
    Behavior,
    EquivalenceVector,
    PROB_TOL,
    Scenario,
    ShapeMismatchError,
    ValidationReport,
    Violation,
    make_simplest_scenario,
    uniform_behavior,
    validate_behavior,
    validate_scenario,
)
from .documents import DocumentError, load_document, save_document, to_doc
from .lp import LP_TOL, LinearProgram, LpError, LpNumericalError, LpOutcome, solve_lp
from .ncmodel import (
    CapExceededError,
    ENUMERATION_CAP,
    Inequality,
    InequalitySet,
    NcModel,
    NcVerdict,
    OnticState,
    UnsupportedScenarioError,
    enumerate_behavior_vertices,
    enumerate_ontic_states,
    evaluate_inequalities,
    is_noncontextual,
    simplest_scenario_inequalities,
    validate_nc_model,
)
from .monotone import DISTANCE_TOL, l1_distance
from .freeops import (
    FreeOperation,
    SecondaryProcedures,
    TransportResult,
    TransportedEquivalences,
    apply_free_operation,
    contextual_vertex_path,
    erase_measurements,
    secondary_procedures,
    simplest_contextual_vertices,
    simplest_permutations,
    transport_equivalences,
    validate_free_operation,
)
from .simulability import SimulationError, SimulationWitness, find_simulation, simulation_to_free_operation
from .compose import (
    CloningDecomposition,
    ProductCountsReport,
    cloning_scenario,
    compose_behaviors,
    compose_scenarios,
    lifted_simplest_inequalities,
    power_behavior,
    power_scenario,
    product_counts_check,
    split_blocks,
)
from .quantum import (
    FacetWitness,
    QuantumRealization,
    behavior_from_quantum,
    canonical_simplest_realization,
    dichotomic_povm,
    maximally_mixed_realization,
    validate_quantum_realization,
    verify_quantum_equivalences,
    witness_all_facets,
)

__version__ = "0.1.0"
