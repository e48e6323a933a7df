"""Finite ontological models and the noncontextual-polytope membership test.

The ontic space used throughout is the complete finite one for a scenario:
every deterministic outcome assignment to the measurements that satisfies
the declared measurement equivalences exactly.  Noncontextuality of a
behavior is then a feasibility LP over preparation distributions on that
space.  For the simplest scenario the same polytope is carried by eight
tight inequality functionals, which double as an independent oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lp import FEASIBLE, INFEASIBLE, LP_TOL, LinearProgram, LpNumericalError, solve_lp
from .scenario import (
    Behavior,
    Scenario,
    ShapeMismatchError,
    ValidationReport,
    Violation,
    make_simplest_scenario,
)

#: Hard ceiling on enumerated deterministic assignments (ontic states or
#: behavior vertices).
ENUMERATION_CAP = 10**6

#: Equivalence weights are snapped to rationals with at most this denominator
#: before exact integer filtering.
WEIGHT_DENOMINATOR_CAP = 10**6

_CHUNK = 1 << 16


class CapExceededError(RuntimeError):
    """An enumeration would need more assignments than the configured cap."""


class UnsupportedScenarioError(ValueError):
    """The scenario falls outside what an operation can handle exactly."""


@dataclass(frozen=True)
class OnticState:
    """Deterministic response vector: entry i is the outcome assigned to measurement i."""

    responses: tuple[int, ...]


@dataclass
class NcModel:
    """A noncontextual ontological model: ontic states plus one distribution per preparation.

    ``mus[j, l]`` is the weight preparation j puts on ontic state l.
    """

    ontic_states: tuple[OnticState, ...]
    mus: np.ndarray

    def response_matrix(self) -> np.ndarray:
        return np.array([s.responses for s in self.ontic_states], dtype=int)

    def behavior(self, s: Scenario) -> Behavior:
        """The probability table this model reproduces (uniform filler on masked cells)."""
        resp = self.response_matrix()  # (L, I)
        indicators = np.stack(
            [(resp[:, i][:, None] == np.arange(s.n_outcomes)[None, :]) for i in range(s.n_meas)]
        ).astype(float)  # (I, L, K)
        probs = np.einsum("ilk,jl->ijk", indicators, self.mus)
        mask = s.physical_mask()
        probs[~mask] = 1.0 / s.n_outcomes
        return Behavior(probs, cell_mask=None if s.cell_mask is None else mask.copy())


@dataclass
class NcVerdict:
    """Outcome of the membership test: a model, or a witness of its impossibility.

    Exactly one of ``model`` / ``violated`` is populated.  ``violated`` is an
    inequality label when the scenario has a known tight set, otherwise the
    LP infeasibility status.
    """

    contextual: bool
    model: NcModel | None = None
    violated: str | None = None
    violation: float | None = None


@dataclass(frozen=True)
class Inequality:
    """Affine functional coeffs . B - constant; the behavior violates it when positive."""

    coeffs: np.ndarray
    constant: float
    label: str


@dataclass(frozen=True)
class InequalitySet:
    functionals: tuple[Inequality, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.functionals)

    def nontrivial(self) -> tuple[Inequality, ...]:
        return tuple(f for f in self.functionals if f.label.startswith("h"))


def _scaled_integer_weights(diff: np.ndarray) -> np.ndarray:
    """alpha - beta as exact integers after clearing rational denominators."""
    fracs = [Fraction(float(x)).limit_denominator(WEIGHT_DENOMINATOR_CAP) for x in diff]
    denom = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return np.array([int(f * denom) for f in fracs], dtype=object)


def enumerate_ontic_states(s: Scenario, cap: int = ENUMERATION_CAP) -> list[OnticState]:
    """All deterministic response vectors satisfying the measurement equivalences exactly.

    Lexicographic order.  Raises CapExceededError when |K|^|I| exceeds the cap.
    """
    total = s.n_outcomes**s.n_meas
    if total > cap:
        raise CapExceededError(
            f"ontic enumeration needs {total} response vectors, cap is {cap}"
        )
    weights = [
        _scaled_integer_weights(e.difference).reshape(s.n_meas, s.n_outcomes)
        for e in s.meas_equivs
    ]
    states: list[OnticState] = []
    for responses in itertools.product(range(s.n_outcomes), repeat=s.n_meas):
        if all(sum(w[i, k] for i, k in enumerate(responses)) == 0 for w in weights):
            states.append(OnticState(responses))
    return states


def _indicator_tensor(states: list[OnticState], s: Scenario) -> np.ndarray:
    """(I, L, K) array of deterministic response indicators."""
    resp = np.array([st.responses for st in states], dtype=int)  # (L, I)
    return (resp.T[:, :, None] == np.arange(s.n_outcomes)[None, None, :]).astype(float)


def membership_program(s: Scenario, behavior: Behavior, states: list[OnticState]) -> LinearProgram:
    """Feasibility LP over mu[j, l] >= 0: normalization per preparation,
    preparation-equivalence rows per ontic state, and reproduction of every
    physical cell."""
    n_states = len(states)
    n_vars = s.n_preps * n_states
    lp = LinearProgram(n_vars)
    idx = lambda j, l: j * n_states + l  # noqa: E731

    for j in range(s.n_preps):
        row = np.zeros(n_vars)
        row[idx(j, 0) : idx(j, n_states)] = 1.0
        lp.add_eq(row, 1.0)

    for equiv in s.prep_equivs:
        diff = equiv.difference
        for l in range(n_states):
            row = np.zeros(n_vars)
            for j in range(s.n_preps):
                row[idx(j, l)] = diff[j]
            lp.add_eq(row, 0.0)

    indicators = _indicator_tensor(states, s)  # (I, L, K)
    mask = s.physical_mask()
    for i in range(s.n_meas):
        for j in range(s.n_preps):
            if not mask[i, j]:
                continue
            for k in range(s.n_outcomes):
                row = np.zeros(n_vars)
                row[idx(j, 0) : idx(j, n_states)] = indicators[i, :, k]
                lp.add_eq(row, float(behavior.probs[i, j, k]))
    return lp


def _is_simplest(s: Scenario) -> bool:
    reference = make_simplest_scenario().prep_equivs[0]
    if (
        (s.n_preps, s.n_meas, s.n_outcomes) != (4, 2, 2)
        or s.meas_equivs
        or len(s.prep_equivs) != 1
        or not bool(np.all(s.physical_mask()))
    ):
        return False
    equiv = s.prep_equivs[0]
    same = np.allclose(equiv.alpha, reference.alpha) and np.allclose(equiv.beta, reference.beta)
    # An equivalence states indistinguishability, so the sides are exchangeable.
    swapped = np.allclose(equiv.alpha, reference.beta) and np.allclose(equiv.beta, reference.alpha)
    return same or swapped


def is_noncontextual(
    s: Scenario, behavior: Behavior, tol: float = LP_TOL, cap: int = ENUMERATION_CAP
) -> NcVerdict:
    """Decide membership of the behavior in the noncontextual polytope.

    Noncontextual: returns the explicit model found by the LP.  Contextual:
    for the simplest scenario the verdict names the first violated tight
    inequality; otherwise it reports the LP infeasibility.
    """
    states = enumerate_ontic_states(s, cap=cap)
    outcome = solve_lp(membership_program(s, behavior, states), tol=tol)
    if outcome.status == FEASIBLE:
        mus = outcome.x.reshape(s.n_preps, len(states))
        return NcVerdict(contextual=False, model=NcModel(tuple(states), mus))
    if outcome.status != INFEASIBLE:
        raise LpNumericalError(f"membership LP returned {outcome.status}")
    if _is_simplest(s):
        ineqs = simplest_scenario_inequalities()
        values = evaluate_inequalities(ineqs, behavior)
        for functional, value in zip(ineqs.functionals, values):
            if value > tol:
                return NcVerdict(contextual=True, violated=functional.label, violation=float(value))
    return NcVerdict(contextual=True, violated="lp-infeasible")


def validate_nc_model(
    s: Scenario, behavior: Behavior, model: NcModel, tol: float = LP_TOL
) -> ValidationReport:
    """Re-check a model by direct substitution, independently of the LP."""
    out: list[Violation] = []
    mus = model.mus
    if mus.min(initial=0.0) < -tol:
        out.append(Violation("mu-negative", float(-mus.min()), ()))
    norm_gap = np.abs(mus.sum(axis=1) - 1.0)
    if norm_gap.max(initial=0.0) > tol:
        out.append(Violation("mu-not-normalized", float(norm_gap.max()), (int(np.argmax(norm_gap)),)))
    for a, equiv in enumerate(s.prep_equivs):
        residual = equiv.difference @ mus  # (L,)
        worst = float(np.abs(residual).max(initial=0.0))
        if worst > tol:
            out.append(Violation(f"model-prep-equivalence-{a}", worst, ()))
    weights = [
        _scaled_integer_weights(e.difference).reshape(s.n_meas, s.n_outcomes)
        for e in s.meas_equivs
    ]
    for b, w in enumerate(weights):
        for state in model.ontic_states:
            if sum(w[i, k] for i, k in enumerate(state.responses)) != 0:
                out.append(Violation(f"state-meas-equivalence-{b}", 1.0, state.responses))
    reproduced = model.behavior(s)
    mask = s.physical_mask()
    gap = np.abs(reproduced.probs - behavior.probs)[mask]
    if gap.max(initial=0.0) > tol:
        out.append(Violation("reproduction", float(gap.max()), ()))
    return ValidationReport(tuple(out))


# --------------------------------------------------------------------------
# Vertex enumeration for scenarios with integral behavior-polytope vertices.
# --------------------------------------------------------------------------


def _check_integral_vertex_support(s: Scenario) -> None:
    """Guard for vertex enumeration: every equivalence difference must use a
    single weight magnitude and distinct equivalences must touch disjoint
    procedures, which makes the constraint system totally unimodular at K=2
    and keeps all polytope vertices at 0/1 points."""
    for kind, equivs in (("prep", s.prep_equivs), ("meas", s.meas_equivs)):
        supports: list[set[int]] = []
        for e in equivs:
            w = _scaled_integer_weights(e.difference)
            magnitudes = {abs(int(x)) for x in w if x != 0}
            if len(magnitudes) > 1:
                raise UnsupportedScenarioError(
                    f"{kind} equivalence mixes weight magnitudes; vertices may be fractional"
                )
            support = {idx for idx, x in enumerate(w) if x != 0}
            if any(support & other for other in supports):
                raise UnsupportedScenarioError(
                    f"overlapping {kind} equivalences; vertices may be fractional"
                )
            supports.append(support)


def enumerate_behavior_vertices(s: Scenario, cap: int = ENUMERATION_CAP) -> list[Behavior]:
    """All 0/1 behaviors satisfying every equivalence exactly, in lexicographic
    order of the per-cell outcome assignment.

    For the supported scenarios these are exactly the vertices of the full
    behavior polytope.  Masked cells take the uniform filler and do not
    contribute assignment freedom.
    """
    _check_integral_vertex_support(s)
    mask = s.physical_mask()
    cells = [(i, j) for i in range(s.n_meas) for j in range(s.n_preps) if mask[i, j]]
    n_cells = len(cells)
    k = s.n_outcomes
    total = k**n_cells
    if total > cap:
        raise CapExceededError(f"vertex enumeration needs {total} assignments, cap is {cap}")

    cell_index = {cell: c for c, cell in enumerate(cells)}

    # Integer-scaled residual tests.  For a preparation equivalence the row at
    # (i, k) is sum_j w_j p[i, j, k]; scaling by K turns the uniform filler on
    # masked cells into the constant w_j.
    prep_tests = []  # (i, k, [(cell col, K*w_j)], const)
    for equiv in s.prep_equivs:
        w = _scaled_integer_weights(equiv.difference)
        for i in range(s.n_meas):
            terms = [(cell_index[(i, j)], int(w[j]) * k) for j in range(s.n_preps) if w[j] != 0 and mask[i, j]]
            const = sum(int(w[j]) for j in range(s.n_preps) if w[j] != 0 and not mask[i, j])
            for kk in range(k):
                prep_tests.append((kk, terms, const))
    meas_tests = []  # per j: ([(cell col, row of K*w over outcomes)], const)
    for equiv in s.meas_equivs:
        w = _scaled_integer_weights(equiv.difference).reshape(s.n_meas, s.n_outcomes)
        for j in range(s.n_preps):
            terms = [
                (cell_index[(i, j)], np.array([int(x) * k for x in w[i]], dtype=np.int64))
                for i in range(s.n_meas)
                if mask[i, j] and any(x != 0 for x in w[i])
            ]
            const = sum(int(x) for i in range(s.n_meas) if not mask[i, j] for x in w[i])
            meas_tests.append((terms, const))

    powers = k ** np.arange(n_cells - 1, -1, -1, dtype=np.int64)
    survivors: list[np.ndarray] = []
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        codes = np.arange(start, stop, dtype=np.int64)
        assign = (codes[:, None] // powers[None, :]) % k  # ((chunk), n_cells)
        keep = np.ones(stop - start, dtype=bool)
        for kk, terms, const in prep_tests:
            residual = np.full(stop - start, const, dtype=np.int64)
            for col, weight in terms:
                residual += weight * (assign[:, col] == kk)
            keep &= residual == 0
        for terms, const in meas_tests:
            residual = np.full(stop - start, const, dtype=np.int64)
            for col, row_weights in terms:
                residual += row_weights[assign[:, col]]
            keep &= residual == 0
        survivors.append(assign[keep])

    uniform = 1.0 / k
    vertices: list[Behavior] = []
    template = np.full((s.n_meas, s.n_preps, k), uniform)
    template[mask] = 0.0
    for assign in np.concatenate(survivors, axis=0):
        probs = template.copy()
        for c, (i, j) in enumerate(cells):
            probs[i, j, int(assign[c])] = 1.0
        vertices.append(Behavior(probs, cell_mask=None if s.cell_mask is None else mask.copy()))
    return vertices


# --------------------------------------------------------------------------
# Tight inequalities of the simplest scenario.
# --------------------------------------------------------------------------

# Each entry is (label, [(measurement, preparation, sign), ...]) acting on the
# outcome-1 slice of the behavior; the offset is 1 for all eight.  Indices are
# 1-based to match the usual p_ij shorthand.
_SIMPLEST_FACETS = (
    ("h1", ((1, 2, +1), (2, 2, +1), (1, 4, -1), (2, 3, -1))),
    ("h2", ((1, 2, +1), (2, 2, +1), (1, 3, -1), (2, 4, -1))),
    ("h3", ((2, 2, +1), (1, 3, +1), (1, 2, -1), (2, 4, -1))),
    ("h4", ((1, 2, +1), (2, 3, +1), (2, 2, -1), (1, 4, -1))),
    ("h5", ((2, 2, +1), (1, 4, +1), (1, 2, -1), (2, 3, -1))),
    ("h6", ((2, 3, +1), (1, 4, +1), (1, 2, -1), (2, 2, -1))),
    ("h7", ((1, 2, +1), (2, 4, +1), (2, 2, -1), (1, 3, -1))),
    ("h8", ((1, 3, +1), (2, 4, +1), (2, 2, -1), (1, 2, -1))),
)


def simplest_scenario_inequalities() -> InequalitySet:
    """The eight tight nontrivial functionals h1..h8 of the simplest scenario,
    followed by the sixteen trivial bounds 0 <= p_ij <= 1.

    Values are affine in the behavior: h(B) = coeffs . B - constant, and the
    noncontextual polytope is exactly {valid B : all values <= 0}.
    """
    functionals: list[Inequality] = []
    for label, terms in _SIMPLEST_FACETS:
        coeffs = np.zeros((2, 4, 2))
        for i, j, sign in terms:
            coeffs[i - 1, j - 1, 1] = sign
        functionals.append(Inequality(coeffs, 1.0, label))
    for i in range(1, 3):
        for j in range(1, 5):
            up = np.zeros((2, 4, 2))
            up[i - 1, j - 1, 1] = 1.0
            functionals.append(Inequality(up, 1.0, f"p{i}{j}<=1"))
            functionals.append(Inequality(-up, 0.0, f"p{i}{j}>=0"))
    return InequalitySet(tuple(functionals))


def evaluate_inequalities(ineqs: InequalitySet, behavior: Behavior) -> np.ndarray:
    """Vector of functional values; entry > tol means the inequality is violated."""
    values = []
    for functional in ineqs.functionals:
        if functional.coeffs.shape != behavior.probs.shape:
            raise ShapeMismatchError(
                f"inequality expects behavior of shape {functional.coeffs.shape}, "
                f"got {behavior.probs.shape}"
            )
        values.append(float(np.tensordot(functional.coeffs, behavior.probs, axes=3)) - functional.constant)
    return np.array(values)
