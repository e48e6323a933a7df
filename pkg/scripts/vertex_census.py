"""Enumerate the behavior-polytope vertices of the simplest scenario, mark the
contextual ones, and show the facet each contextual vertex violates together
with the shortest permutation word linking it back to the h7 vertex."""

import numpy as np

import ctxpoly as cp


def main() -> None:
    scenario = cp.make_simplest_scenario()
    vertices = cp.enumerate_behavior_vertices(scenario)
    ineqs = cp.simplest_scenario_inequalities()
    print(f"vertices: {len(vertices)}")

    contextual = []
    for idx, vertex in enumerate(vertices):
        values = cp.evaluate_inequalities(ineqs, vertex)[:8]
        hit = int(np.argmax(values))
        if values[hit] > 1e-9:
            contextual.append((idx, ineqs.functionals[hit].label))
    print(f"contextual: {len(contextual)}")

    anchor = next(idx for idx, label in contextual if label == "h7")
    print("idx  facet  outcome-1 rows            word from h7 vertex")
    for idx, label in contextual:
        rows = vertices[idx].probs[:, :, 1].astype(int)
        word = cp.contextual_vertex_path(anchor, idx)
        print(f"{idx:3d}  {label:5s}  {rows[0].tolist()} {rows[1].tolist()}   {word or ['-']}")

    distances = {label: cp.l1_distance(scenario, vertices[idx]) for idx, label in contextual}
    print("l1 distances:", {k: round(v, 6) for k, v in sorted(distances.items())})


if __name__ == "__main__":
    main()
