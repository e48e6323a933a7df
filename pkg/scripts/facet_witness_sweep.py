"""Sweep the powers of the simplest scenario and report a quantum violation for
every tight nontrivial facet, plus the block-conjunction structure of the
cloning scenario."""

import argparse

import numpy as np

import ctxpoly as cp


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-power", type=int, default=3)
    args = parser.parse_args()

    for n in range(1, args.max_power + 1):
        witnesses = cp.witness_all_facets(n)
        worst = min(w.violation for w in witnesses)
        print(f"n={n}: {len(witnesses)} facets witnessed, smallest violation {worst:.9f}")

    scenario, decomposition = cp.cloning_scenario()
    block = decomposition.block_scenario()
    contextual_block = _contextual_block_behavior(block)
    uniform = cp.uniform_behavior(block)
    print(f"cloning scenario: ({scenario.n_preps},{scenario.n_meas},{scenario.n_outcomes}), "
          f"{len(scenario.prep_equivs)} block equivalences")
    for pattern in ((0, 0, 0), (1, 0, 0), (1, 1, 1)):
        blocks = [contextual_block if bit else uniform for bit in pattern]
        verdict = cp.is_noncontextual(scenario, decomposition.assemble(blocks))
        print(f"  contextual blocks {pattern} -> {'contextual' if verdict.contextual else 'noncontextual'}")


def _contextual_block_behavior(block: cp.Scenario) -> cp.Behavior:
    canonical = cp.canonical_simplest_realization()
    extras = [
        cp.dichotomic_povm(obs)
        for obs in (
            cp.quantum.PAULI_Z,
            cp.quantum.PAULI_X,
            cp.quantum.PAULI_Y,
            (cp.quantum.PAULI_Z + cp.quantum.PAULI_X) / np.sqrt(2.0),
        )
    ]
    povms = np.concatenate([canonical.povms, np.stack(extras)])[: block.n_meas]
    return cp.behavior_from_quantum(cp.QuantumRealization(states=canonical.states, povms=povms))


if __name__ == "__main__":
    main()
