"""Behaviors generated by quantum states and POVMs.

Includes the canonical qubit realization of the simplest scenario (the four
basis/superposition states against the two rotated dichotomic measurements)
and the facet-sweep construction that exhibits a quantum violation of every
tight nontrivial inequality of any power of that scenario.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compose import compose_behaviors, lifted_simplest_inequalities
from .freeops import (
    _simplest_vertex_data,
    apply_free_operation,
    contextual_vertex_path,
    simplest_permutations,
)
from .ncmodel import CapExceededError, evaluate_inequalities, simplest_scenario_inequalities
from .scenario import (
    Behavior,
    Scenario,
    ShapeMismatchError,
    ValidationReport,
    Violation,
    make_simplest_scenario,
)

#: Tolerance for operator-level identities (Hermiticity, positivity,
#: completeness, equivalence checks).
OPERATOR_TOL = 1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class QuantumRealization:
    """States and POVMs indexed like a behavior: states[j], povms[i][k]."""

    states: np.ndarray
    povms: np.ndarray

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=complex)
        povms = np.asarray(self.povms, dtype=complex)
        if states.ndim != 3 or states.shape[1] != states.shape[2]:
            raise ShapeMismatchError("states must have shape (preps, d, d)")
        if povms.ndim != 4 or povms.shape[2] != povms.shape[3] or povms.shape[2] != states.shape[1]:
            raise ShapeMismatchError("povms must have shape (meas, outcomes, d, d)")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "povms", povms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantumRealization):
            return NotImplemented
        return np.array_equal(self.states, other.states) and np.array_equal(self.povms, other.povms)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def n_preps(self) -> int:
        return self.states.shape[0]

    @property
    def n_meas(self) -> int:
        return self.povms.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.povms.shape[1]


def _min_eigenvalue(mat: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(mat).min())


def validate_quantum_realization(q: QuantumRealization, tol: float = OPERATOR_TOL) -> ValidationReport:
    out: list[Violation] = []
    eye = np.eye(q.dim)
    for j, rho in enumerate(q.states):
        herm = float(np.abs(rho - rho.conj().T).max())
        if herm > tol:
            out.append(Violation("state-not-hermitian", herm, (j,)))
            continue
        trace_gap = abs(float(np.trace(rho).real) - 1.0)
        if trace_gap > tol:
            out.append(Violation("state-trace", trace_gap, (j,)))
        low = _min_eigenvalue(rho)
        if low < -tol:
            out.append(Violation("state-not-psd", -low, (j,)))
    for i, povm in enumerate(q.povms):
        for k, effect in enumerate(povm):
            herm = float(np.abs(effect - effect.conj().T).max())
            if herm > tol:
                out.append(Violation("effect-not-hermitian", herm, (i, k)))
                continue
            low = _min_eigenvalue(effect)
            if low < -tol:
                out.append(Violation("effect-not-psd", -low, (i, k)))
        completeness = float(np.abs(povm.sum(axis=0) - eye).max())
        if completeness > tol:
            out.append(Violation("povm-incomplete", completeness, (i,)))
    return ValidationReport(tuple(out))


def behavior_from_quantum(q: QuantumRealization) -> Behavior:
    """probs[i, j, k] = Re tr(E_k^i rho^j)."""
    report = validate_quantum_realization(q)
    if not report.ok:
        raise ValueError(f"invalid quantum realization: {report.summary()}")
    probs = np.einsum("ikab,jba->ijk", q.povms, q.states).real
    return Behavior(np.clip(probs, 0.0, 1.0))


def verify_quantum_equivalences(
    q: QuantumRealization, s: Scenario, tol: float = OPERATOR_TOL
) -> ValidationReport:
    """Check declared equivalences at the operator level: the weighted state
    mixtures must coincide as matrices, and likewise the weighted effect
    combinations, measured in Frobenius norm."""
    if q.n_preps != s.n_preps or q.n_meas != s.n_meas or q.n_outcomes != s.n_outcomes:
        raise ShapeMismatchError("realization does not match scenario counts")
    out: list[Violation] = []
    for a, equiv in enumerate(s.prep_equivs):
        gap = np.einsum("j,jab->ab", equiv.difference, q.states)
        norm = float(np.linalg.norm(gap))
        if norm > tol:
            out.append(Violation(f"state-equivalence-{a}", norm, ()))
    effects = q.povms.reshape(s.n_events, q.dim, q.dim)
    for b, equiv in enumerate(s.meas_equivs):
        gap = np.einsum("e,eab->ab", equiv.difference, effects)
        norm = float(np.linalg.norm(gap))
        if norm > tol:
            out.append(Violation(f"effect-equivalence-{b}", norm, ()))
    return ValidationReport(tuple(out))


def dichotomic_povm(observable: np.ndarray) -> np.ndarray:
    """Two-outcome POVM of a +/-1 observable; outcome index 1 is the +1 effect."""
    obs = np.asarray(observable, dtype=complex)
    eye = np.eye(obs.shape[0])
    return np.stack([(eye - obs) / 2.0, (eye + obs) / 2.0])


_KET0 = np.array([1.0, 0.0], dtype=complex)
_KET1 = np.array([0.0, 1.0], dtype=complex)
_KET_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
_KET_MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


def _projector(ket: np.ndarray) -> np.ndarray:
    return np.outer(ket, ket.conj())


def canonical_simplest_realization() -> QuantumRealization:
    """The standard contextual qubit realization of the simplest scenario.

    States: the computational basis pair and the +/- superposition pair, so
    the even mixtures on both sides of the preparation equivalence equal the
    maximally mixed state.  Measurements: the two observables (X+Z)/sqrt(2)
    and (X-Z)/sqrt(2), oriented so that outcome 1 collects the *negative*
    eigenvector of each; that orientation puts sin^2(pi/8) at cell
    (measurement 0, preparation 0, outcome 1) and makes h7 the violated
    facet.
    """
    states = np.stack([
        _projector(_KET0),
        _projector(_KET1),
        _projector(_KET_PLUS),
        _projector(_KET_MINUS),
    ])
    obs_plus = (PAULI_X + PAULI_Z) / np.sqrt(2.0)
    obs_minus = (PAULI_X - PAULI_Z) / np.sqrt(2.0)
    povms = np.stack([dichotomic_povm(-obs_plus), dichotomic_povm(-obs_minus)])
    return QuantumRealization(states=states, povms=povms)


def maximally_mixed_realization(n_meas: int = 2) -> QuantumRealization:
    """All four preparations equal to 1/2; reproduces the uniform behavior with
    the canonical measurements (and trivially satisfies the equivalence)."""
    canonical = canonical_simplest_realization()
    povms = canonical.povms
    if n_meas != 2:
        povms = np.stack([canonical.povms[i % 2] for i in range(n_meas)])
    states = np.stack([np.eye(2, dtype=complex) / 2.0] * 4)
    return QuantumRealization(states=states, povms=povms)


@dataclass
class FacetWitness:
    facet: str
    behavior: Behavior
    violation: float


def witness_all_facets(n: int, cap: int = 4) -> list[FacetWitness]:
    """A quantum-realizable violation for each of the 8n tight nontrivial
    facets of the n-fold power of the simplest scenario.

    Per block: start from the canonical behavior (which violates h7), route
    it to the target facet with the shortest permutation word between the
    corresponding contextual vertices (permutations are relabelings, hence
    quantum-implementable), and fill the remaining blocks with the uniform
    behavior of the maximally mixed realization.
    """
    if n < 1:
        raise ValueError("power must be at least 1")
    if n > cap:
        raise CapExceededError(f"facet witnessing capped at n={cap}, asked for n={n}")

    s = make_simplest_scenario()
    canonical = behavior_from_quantum(canonical_simplest_realization())
    uniform = behavior_from_quantum(maximally_mixed_realization())
    generators = simplest_permutations()
    _, _, contextual, facet_of = _simplest_vertex_data()
    vertex_of_facet = {facet: idx for idx, facet in facet_of.items()}

    base_values = evaluate_inequalities(simplest_scenario_inequalities(), canonical)[:8]
    source_facet = f"h{int(np.argmax(base_values)) + 1}"
    source_vertex = vertex_of_facet[source_facet]

    block_behaviors: dict[str, Behavior] = {}
    for facet, vertex in vertex_of_facet.items():
        behavior = canonical
        scenario = s
        for name in contextual_vertex_path(source_vertex, vertex):
            scenario, behavior = apply_free_operation(generators[name], scenario, behavior)
        block_behaviors[facet] = behavior

    lifted = lifted_simplest_inequalities(n)
    witnesses: list[FacetWitness] = []
    for functional in lifted.functionals:
        block_label, base_label = functional.label.split(".")
        block = int(block_label[1:])
        blocks = [block_behaviors[base_label] if l == block else uniform for l in range(n)]
        composite = blocks[0]
        for extra in blocks[1:]:
            composite = compose_behaviors(composite, extra)
        value = float(np.tensordot(functional.coeffs, composite.probs, axes=3)) - functional.constant
        witnesses.append(FacetWitness(facet=functional.label, behavior=composite, violation=value))
    return witnesses
