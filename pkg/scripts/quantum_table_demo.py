"""Print the canonical qubit statistics of the simplest scenario, the tight
inequality values, and the behavior's l1 contextuality distance."""

import numpy as np

import ctxpoly as cp


def main() -> None:
    scenario = cp.make_simplest_scenario()
    realization = cp.canonical_simplest_realization()
    behavior = cp.behavior_from_quantum(realization)

    print("outcome-1 statistics p(1|measurement, preparation):")
    for i, row in enumerate(behavior.probs[:, :, 1]):
        print(f"  M{i + 1}: " + "  ".join(f"{p:.6f}" for p in row))
    print(f"operator equivalences hold: {cp.verify_quantum_equivalences(realization, scenario).ok}")

    ineqs = cp.simplest_scenario_inequalities()
    values = cp.evaluate_inequalities(ineqs, behavior)[:8]
    print("tight functionals (positive = violated):")
    for label, value in zip(ineqs.labels[:8], values):
        marker = "  <-- violated" if value > 0 else ""
        print(f"  {label}: {value:+.6f}{marker}")
    print(f"left side of the violated facet: {values.max() + 1.0:.9f} (sqrt(2) = {np.sqrt(2):.9f})")

    verdict = cp.is_noncontextual(scenario, behavior)
    print(f"membership verdict: {'contextual' if verdict.contextual else 'noncontextual'} ({verdict.violated})")
    print(f"l1 contextuality distance: {cp.l1_distance(scenario, behavior):.9f}")


if __name__ == "__main__":
    main()
