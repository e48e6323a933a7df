"""Acceptance suite.

Each test is one quantitative claim checked at its stated tolerance within a
runtime budget, printing one pass/fail line (run with ``pytest -s`` to see
them live).
"""

import math
import time
from contextlib import contextmanager

import numpy as np

import ctxpoly as cp
from ctxpoly.compose import lifted_simplest_inequalities
from ctxpoly.sampling import perturbed_behavior, random_simplest_behavior

SQRT2 = math.sqrt(2.0)
SIN2 = math.sin(math.pi / 8) ** 2
COS2 = math.cos(math.pi / 8) ** 2

# Reference 4-digit values for the canonical table (outcome-1 slice);
# truncated, not rounded, decimals.
PRINTED_TABLE = np.array(
    [
        [0.1464, 0.8535, 0.1464, 0.8535],
        [0.8535, 0.1464, 0.1464, 0.8535],
    ]
)


@contextmanager
def criterion(number: int, budget_s: float, description: str):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[acceptance] criterion {number:2d} FAIL: {description}")
        raise
    elapsed = time.perf_counter() - start
    assert elapsed < budget_s, f"criterion {number} took {elapsed:.2f}s, budget {budget_s}s"
    print(
        f"[acceptance] criterion {number:2d} PASS ({elapsed:6.2f}s < {budget_s:g}s): {description}"
    )


def truncate4(x: np.ndarray) -> np.ndarray:
    return np.floor(x * 1e4) / 1e4


def test_criterion_01_statistics_table(canonical_behavior):
    with criterion(1, 1.0, "canonical realization reproduces the 8 table entries"):
        table = canonical_behavior.probs[:, :, 1]
        exact = np.array([[SIN2, COS2, SIN2, COS2], [COS2, SIN2, SIN2, COS2]])
        assert np.abs(table - exact).max() <= 1e-12
        assert np.abs(truncate4(table) - PRINTED_TABLE).max() <= 1e-6


def test_criterion_02_h7_violation(canonical_behavior):
    with criterion(2, 1.0, "h7 left side equals sqrt(2) and exceeds 1"):
        values = cp.evaluate_inequalities(cp.simplest_scenario_inequalities(), canonical_behavior)
        left_side = values[6] + 1.0
        assert abs(left_side - SQRT2) <= 1e-9
        assert left_side > 1.0


def test_criterion_03_oracle_equivalence(b_si):
    with criterion(3, 30.0, "LP verdict equals the 8-functional oracle on 1000 random behaviors"):
        rng = np.random.default_rng(2026)
        ineqs = cp.simplest_scenario_inequalities()
        for _ in range(1000):
            behavior = random_simplest_behavior(rng)
            oracle_nc = cp.evaluate_inequalities(ineqs, behavior)[:8].max() <= 1e-8
            lp_nc = not cp.is_noncontextual(b_si, behavior).contextual
            assert lp_nc == oracle_nc


def test_criterion_04_vertices(b_si):
    with criterion(4, 5.0, "36 vertices, 8 contextual, bijective facet pairing"):
        vertices = cp.enumerate_behavior_vertices(b_si)
        assert len(vertices) == 36
        ineqs = cp.simplest_scenario_inequalities()
        pairing = {}
        contextual = 0
        for idx, vertex in enumerate(vertices):
            lp_contextual = cp.is_noncontextual(b_si, vertex).contextual
            hits = np.nonzero(cp.evaluate_inequalities(ineqs, vertex)[:8] > 1e-8)[0]
            assert lp_contextual == bool(hits.size)
            if lp_contextual:
                contextual += 1
                assert hits.size == 1  # exactly one violated functional
                label = ineqs.functionals[int(hits[0])].label
                assert label not in pairing  # and each functional once
                pairing[label] = idx
        assert contextual == 8
        assert sorted(pairing) == [f"h{i}" for i in range(1, 9)]


def test_criterion_05_symmetries(b_si, si_vertices):
    with criterion(5, 30.0, "permutations: vertex-set invariance, completely free, connected graph"):
        perms = cp.simplest_permutations()
        originals = {v.probs.tobytes() for v in si_vertices}
        for name, op in perms.items():
            images = {cp.apply_free_operation(op, b_si, v)[1].probs.tobytes() for v in si_vertices}
            assert images == originals, name

        rng = np.random.default_rng(515)
        for _ in range(100):
            behavior = random_simplest_behavior(rng)
            verdict = cp.is_noncontextual(b_si, behavior).contextual
            distance = cp.l1_distance(b_si, behavior)
            for name, op in perms.items():
                image_scenario, image = cp.apply_free_operation(op, b_si, behavior)
                assert cp.is_noncontextual(image_scenario, image).contextual == verdict
                assert abs(cp.l1_distance(image_scenario, image) - distance) <= 1e-7

        contextual = cp.simplest_contextual_vertices()
        assert len(contextual) == 8
        for v in contextual:
            for w in contextual:
                word = cp.contextual_vertex_path(v, w)  # raises if unreachable
                scenario, behavior = b_si, si_vertices[v]
                for name in word:
                    scenario, behavior = cp.apply_free_operation(perms[name], scenario, behavior)
                assert np.array_equal(behavior.probs, si_vertices[w].probs)


def test_criterion_06_composition_preserves_resource(b_si, si_vertices):
    with criterion(6, 120.0, "composite verdict = block conjunction; 1296 composite vertices"):
        composite_s = cp.compose_scenarios(b_si, b_si)
        rng = np.random.default_rng(606)
        for _ in range(500):
            b1, b2 = random_simplest_behavior(rng), random_simplest_behavior(rng)
            joint = cp.is_noncontextual(composite_s, cp.compose_behaviors(b1, b2)).contextual
            assert joint == (
                cp.is_noncontextual(b_si, b1).contextual
                or cp.is_noncontextual(b_si, b2).contextual
            )
        flags = [cp.is_noncontextual(b_si, v).contextual for v in si_vertices]
        for _ in range(500):
            i, j = int(rng.integers(36)), int(rng.integers(36))
            joint = cp.is_noncontextual(
                composite_s, cp.compose_behaviors(si_vertices[i], si_vertices[j])
            ).contextual
            assert joint == (flags[i] or flags[j])
        report = cp.product_counts_check(b_si, b_si)
        assert report.vertices_lhs == 1296 == report.vertices_rhs


def test_criterion_07_distance_subadditive(b_si):
    with criterion(7, 120.0, "d(B1 (+) B2) <= max(d1, d2) <= d1 + d2 on 100 pairs"):
        composite_s = cp.compose_scenarios(b_si, b_si)
        rng = np.random.default_rng(707)
        for _ in range(100):
            b1, b2 = random_simplest_behavior(rng), random_simplest_behavior(rng)
            d1 = cp.l1_distance(b_si, b1)
            d2 = cp.l1_distance(b_si, b2)
            d12 = cp.l1_distance(composite_s, cp.compose_behaviors(b1, b2))
            assert d12 <= max(d1, d2) + 1e-7
            assert max(d1, d2) <= d1 + d2 + 1e-7


def test_criterion_08_simulation_certifies_contextuality(
    b_si, b6_scenario, b6_behavior, canonical_behavior
):
    with criterion(8, 10.0, "six-measurement set simulates the pair; contextuality transfers"):
        witness = cp.find_simulation(b6_behavior, canonical_behavior)
        assert witness is not None
        assert np.array_equal(witness.q_M[:, 0], [1, 0, 0, 0, 0, 0])
        assert np.array_equal(witness.q_M[:, 1], [0, 1, 0, 0, 0, 0])
        assert np.array_equal(witness.q_O[0, 0], np.eye(2))
        assert np.array_equal(witness.q_O[1, 1], np.eye(2))

        operation = cp.simulation_to_free_operation(witness)
        image_scenario, image = cp.apply_free_operation(operation, b6_scenario, b6_behavior)
        assert image_scenario == b_si
        assert np.abs(image.probs - canonical_behavior.probs).max() <= 1e-8
        assert cp.is_noncontextual(image_scenario, image).contextual
        assert cp.is_noncontextual(b6_scenario, b6_behavior).contextual


def test_criterion_09_secondary_procedures(b_si, canonical_behavior):
    with criterion(9, 60.0, "secondary procedures repair noise and keep the h7 violation"):
        ineqs = cp.simplest_scenario_inequalities()
        survived = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            noisy = perturbed_behavior(canonical_behavior, rng, 0.01)
            result = cp.secondary_procedures(b_si, noisy)
            assert cp.validate_behavior(b_si, result.behavior, tol=1e-9).ok
            if cp.evaluate_inequalities(ineqs, result.behavior)[6] > 0.0:
                survived += 1
        assert survived >= 95


def test_criterion_10_all_facets_witnessed(b_si):
    with criterion(10, 60.0, "quantum violations for all 8n facets, n in {1,2,3}"):
        floor = SQRT2 - 1.0 - 1e-9
        for n in (1, 2, 3):
            witnesses = cp.witness_all_facets(n)
            assert len(witnesses) == 8 * n
            assert len({w.facet for w in witnesses}) == 8 * n
            assert set(w.facet for w in witnesses) == set(
                lifted_simplest_inequalities(n).labels
            )
            for witness in witnesses:
                assert witness.violation >= floor


def test_criterion_11_cloning_decomposition(b6_scenario, b6_behavior):
    with criterion(11, 30.0, "cloning scenario decomposes into three blocks"):
        scenario, decomposition = cp.cloning_scenario()
        assert (scenario.n_preps, scenario.n_meas, scenario.n_outcomes) == (12, 6, 2)
        assert len(scenario.prep_equivs) == 3
        base = cp.make_simplest_scenario().prep_equivs[0]
        for l, equiv in enumerate(scenario.prep_equivs):
            assert np.array_equal(equiv.alpha[4 * l : 4 * l + 4], base.alpha)
            assert np.array_equal(equiv.beta[4 * l : 4 * l + 4], base.beta)
            assert equiv.alpha.sum() == 1.0 and equiv.beta.sum() == 1.0

        uniform = cp.uniform_behavior(b6_scenario)
        block_scenario = decomposition.block_scenario()
        for bits in range(8):
            blocks = [b6_behavior if (bits >> l) & 1 else uniform for l in range(3)]
            assembled = decomposition.assemble(blocks)
            joint = cp.is_noncontextual(scenario, assembled).contextual
            separate = any(
                cp.is_noncontextual(block_scenario, block).contextual for block in blocks
            )
            assert joint == separate
