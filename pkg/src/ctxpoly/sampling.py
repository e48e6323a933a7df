"""Random behaviors and stochastic maps for property tests and experiments.

All samplers take an explicit ``numpy.random.Generator`` so every randomized
check is reproducible from a seed.
"""

from __future__ import annotations

import numpy as np

from .ncmodel import evaluate_inequalities, simplest_scenario_inequalities
from .scenario import Behavior


def random_simplest_behavior(rng: np.random.Generator) -> Behavior:
    """Uniformly draw a valid behavior of the simplest scenario.

    Three cells of each measurement row are free; the fourth is pinned by the
    preparation equivalence and the draw is rejected whenever it leaves the
    unit interval.
    """
    rows = []
    for _ in range(2):
        while True:
            p1, p2, p3 = rng.uniform(size=3)
            p4 = p1 + p2 - p3
            if 0.0 <= p4 <= 1.0:
                rows.append([p1, p2, p3, p4])
                break
    outcome1 = np.array(rows)
    probs = np.stack([1.0 - outcome1, outcome1], axis=2)
    return Behavior(probs)


def random_noncontextual_simplest_behavior(
    rng: np.random.Generator, margin: float = 0.0, max_tries: int = 10_000
) -> Behavior:
    """Rejection-sample a behavior with all eight tight functionals <= -margin."""
    ineqs = simplest_scenario_inequalities()
    for _ in range(max_tries):
        candidate = random_simplest_behavior(rng)
        values = evaluate_inequalities(ineqs, candidate)[:8]
        if values.max() <= -margin:
            return candidate
    raise RuntimeError("rejection sampling failed to find a noncontextual behavior")


def random_mixture_behavior(
    vertices: list[Behavior], rng: np.random.Generator, concentration: float = 1.0
) -> Behavior:
    """Dirichlet mixture of enumerated polytope vertices; always valid."""
    weights = rng.dirichlet(np.full(len(vertices), concentration))
    probs = sum(w * v.probs for w, v in zip(weights, vertices))
    first = vertices[0]
    mask = None if first.cell_mask is None else first.cell_mask.copy()
    return Behavior(np.asarray(probs), cell_mask=mask)


def random_column_stochastic(rng: np.random.Generator, n_rows: int, n_cols: int) -> np.ndarray:
    """Matrix with i.i.d. Dirichlet columns."""
    return rng.dirichlet(np.ones(n_rows), size=n_cols).T


def perturbed_behavior(
    behavior: Behavior, rng: np.random.Generator, magnitude: float = 0.01
) -> Behavior:
    """Add i.i.d. uniform noise of the given magnitude to every entry, clip to
    [0, 1] and renormalize each outcome distribution.  The result is a proper
    probability table but generally breaks the declared equivalences."""
    noisy = behavior.probs + rng.uniform(-magnitude, magnitude, size=behavior.probs.shape)
    noisy = np.clip(noisy, 0.0, 1.0)
    noisy /= noisy.sum(axis=2, keepdims=True)
    return Behavior(noisy)


__all__ = [
    "random_simplest_behavior",
    "random_noncontextual_simplest_behavior",
    "random_mixture_behavior",
    "random_column_stochastic",
    "perturbed_behavior",
]
