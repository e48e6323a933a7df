"""The l1 contextuality distance.

d(B) is the smallest worst-case outcome-wise l1 deviation between B and any
behavior admitting a noncontextual model:

    d(B) = min over noncontextual B* of max over physical (i, j)
           of sum_k |p(k|i,j) - p*(k|i,j)|.

The inner max linearizes exactly with one scalar, so the whole quantity is a
single LP over the model weights, per-cell slack variables and that scalar.
d vanishes exactly on the noncontextual polytope and never increases under
free operations, which is what makes it usable as a monotone.
"""

from __future__ import annotations

import numpy as np

from .lp import LP_TOL, OPTIMAL, LinearProgram, LpNumericalError, solve_lp
from .ncmodel import ENUMERATION_CAP, _indicator_tensor, enumerate_ontic_states
from .scenario import Behavior, Scenario, validate_behavior

#: Absolute precision at which distances are reported and compared; two
#: digits looser than the LP feasibility tolerance.
DISTANCE_TOL = 1e-7


def l1_distance(
    s: Scenario, behavior: Behavior, tol: float = LP_TOL, cap: int = ENUMERATION_CAP
) -> float:
    """Distance from the behavior to the noncontextual polytope in the
    max-over-cells l1 sense.  Zero iff the behavior is noncontextual.

    Masked (hybrid) cells are excluded from both the deviation and the max.
    """
    report = validate_behavior(s, behavior, tol=max(tol, 1e-9))
    if not report.ok:
        raise ValueError(f"behavior invalid in scenario: {report.summary()}")

    states = enumerate_ontic_states(s, cap=cap)
    n_states = len(states)
    mask = s.physical_mask()
    cells = [(i, j) for i in range(s.n_meas) for j in range(s.n_preps) if mask[i, j]]
    k = s.n_outcomes

    n_mu = s.n_preps * n_states
    n_slack = len(cells) * k
    n_vars = n_mu + n_slack + 1
    t_col = n_vars - 1
    mu_idx = lambda j, l: j * n_states + l  # noqa: E731
    slack_idx = {
        (i, j, kk): n_mu + c * k + kk for c, (i, j) in enumerate(cells) for kk in range(k)
    }

    lp = LinearProgram(n_vars, objective=np.eye(n_vars)[t_col])

    for j in range(s.n_preps):
        row = np.zeros(n_vars)
        row[mu_idx(j, 0) : mu_idx(j, n_states)] = 1.0
        lp.add_eq(row, 1.0)
    for equiv in s.prep_equivs:
        diff = equiv.difference
        for l in range(n_states):
            row = np.zeros(n_vars)
            for j in range(s.n_preps):
                row[mu_idx(j, l)] = diff[j]
            lp.add_eq(row, 0.0)

    indicators = _indicator_tensor(states, s)  # (I, L, K)
    for i, j in cells:
        for kk in range(k):
            p = float(behavior.probs[i, j, kk])
            # e >= p - xi.mu   and   e >= xi.mu - p
            row = np.zeros(n_vars)
            row[mu_idx(j, 0) : mu_idx(j, n_states)] = -indicators[i, :, kk]
            row[slack_idx[(i, j, kk)]] = -1.0
            lp.add_ineq(row, -p)
            row = np.zeros(n_vars)
            row[mu_idx(j, 0) : mu_idx(j, n_states)] = indicators[i, :, kk]
            row[slack_idx[(i, j, kk)]] = -1.0
            lp.add_ineq(row, p)
    for i, j in cells:
        row = np.zeros(n_vars)
        for kk in range(k):
            row[slack_idx[(i, j, kk)]] = 1.0
        row[t_col] = -1.0
        lp.add_ineq(row, 0.0)

    outcome = solve_lp(lp, tol=tol)
    if outcome.status != OPTIMAL:
        raise LpNumericalError(f"l1-distance LP returned {outcome.status}")
    return max(0.0, float(outcome.objective_value))
