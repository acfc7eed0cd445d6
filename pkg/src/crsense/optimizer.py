"""Sensing-duration policy optimization.

The opportunistic node picks a probability distribution over the available
sensing durations to maximize its own data service rate while keeping the
licensed node's queue stable (arrival rate below service rate). The shape of
the objective depends on the state of the energy buffer:

* while harvests are the bottleneck (``lambda_se <= mu_se``) the throughput
  is a ratio of two affine functions of the policy, a linear-fractional
  program solved here through the classic lift to a linear program;
* once the buffer saturates (``lambda_se >= mu_se``) the cap makes the
  problem an ordinary linear program, independent of the harvest rate.

Both regimes are solved and the better feasible answer wins; ties go to the
saturated regime because its policy does not depend on the harvest rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytics import (
    AnalyticRates,
    PolicyVector,
    Scenario,
    analyze,
    consumption_weights,
    success_weights,
)
from .lp import LPError, StandardFormLP, solve_lp

CONSTRAINT_TOL = 1e-8   # slack accepted on returned policies
_DEGENERATE_T = 1e-12
_REGIME_TOL = 1e-12


class DegenerateFractionalError(RuntimeError):
    """The lifted program drove the denominator scale to zero."""


@dataclass(frozen=True)
class FractionalProgram:
    """maximize (numerator @ P) / (denominator @ P) over the probability
    simplex, subject to a_ub @ P <= b_ub. The simplex constraint is implicit.
    """

    numerator: np.ndarray
    denominator: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray


@dataclass(frozen=True)
class LiftedLP:
    """Linear program over (y, t) = (P * t, 1 / (denominator @ P))."""

    lp: StandardFormLP
    num_policy_vars: int

    def recover(self, x: np.ndarray) -> np.ndarray:
        """Map a lifted solution back to the simplex; P = y / t."""
        t = float(x[self.num_policy_vars])
        if t <= _DEGENERATE_T:
            raise DegenerateFractionalError(
                f"lifted scale t = {t!r}; the denominator is unbounded on the feasible set"
            )
        return np.asarray(x[: self.num_policy_vars], dtype=float) / t


def fractional_to_lp(problem: FractionalProgram) -> LiftedLP:
    """Lift a ratio objective over the simplex to a linear program.

    The substitution y = t * P with t = 1 / (denominator @ P) pins the
    denominator to one, turns the simplex constraint into sum(y) = t, and
    scales every inequality row by t (a_ub @ y - b_ub * t <= 0). Ratios of
    affine functions become affine in (y, t), so the optimum transfers.
    """
    num = np.atleast_1d(np.asarray(problem.numerator, dtype=float))
    den = np.atleast_1d(np.asarray(problem.denominator, dtype=float))
    if num.shape != den.shape:
        raise ValueError("numerator and denominator must have equal length")
    m = num.size
    c = np.append(num, 0.0)
    a_eq = np.vstack([
        np.append(den, 0.0),             # denominator @ y == 1
        np.append(np.ones(m), -1.0),     # sum(y) == t
    ])
    b_eq = np.array([1.0, 0.0])
    a_ub = np.atleast_2d(np.asarray(problem.a_ub, dtype=float))
    b_ub = np.atleast_1d(np.asarray(problem.b_ub, dtype=float))
    if a_ub.size:
        lifted_ub = np.hstack([a_ub, -b_ub[:, None]])
        lifted_rhs = np.zeros(b_ub.size)
    else:
        lifted_ub, lifted_rhs = None, None
    return LiftedLP(StandardFormLP(c, a_eq, b_eq, lifted_ub, lifted_rhs), m)


@dataclass(frozen=True)
class SubproblemResult:
    status: str                      # "optimal" | "infeasible"
    value: float                     # attained mu_s (0.0 when infeasible)
    policy: PolicyVector | None


@dataclass(frozen=True)
class OptimizationOutcome:
    status: str                      # "optimal" | "infeasible"
    best_policy: PolicyVector | None
    best_mu_s: float
    winning_subproblem: str          # "constrained" | "overflow" | "none"
    constrained: SubproblemResult
    overflow: SubproblemResult
    rates: AnalyticRates | None      # closed-form rates at the best policy


def _policy_from(raw: np.ndarray) -> PolicyVector:
    # LP round-off can leave ~1e-16 negatives; clean and renormalize
    clipped = np.clip(raw, 0.0, None)
    total = clipped.sum()
    if total <= 0.0:
        raise LPError("recovered policy has no mass")
    return PolicyVector(tuple(clipped / total))


def _coefficients(scenario: Scenario):
    w = consumption_weights(scenario)
    u = success_weights(scenario)
    d = scenario.misdetect_probs()
    cap = scenario.lambda_pe * (1.0 - scenario.primary_outage)
    return w, u, d, cap


def solve_constrained_subproblem(scenario: Scenario) -> SubproblemResult:
    """Best policy while the energy buffer drains (lambda_se <= mu_se).

    The throughput is (lambda_se / mu_se(P)) * (1 - lambda_pe) * (u @ P).
    Multiplying the licensed-stability constraint through by the positive
    denominator makes it affine in P, so the whole problem is a
    linear-fractional program handled by ``fractional_to_lp``.
    """
    w, u, d, cap = _coefficients(scenario)
    lam_se = scenario.lambda_se
    lam_p = scenario.lambda_p
    numerator = lam_se * (1.0 - scenario.lambda_pe) * u
    rows = np.vstack([
        cap * lam_se * d - (cap - lam_p) * w,   # licensed queue stays stable
        -w,                                      # regime: consumption covers harvest
    ])
    rhs = np.array([0.0, -lam_se])
    lifted = fractional_to_lp(FractionalProgram(numerator, w, rows, rhs))
    solution = solve_lp(lifted.lp)
    if solution.status == "unbounded":
        raise LPError("lifted regime problem reported unbounded; inputs out of range")
    if solution.status != "optimal":
        return SubproblemResult("infeasible", 0.0, None)
    policy = _policy_from(lifted.recover(solution.x))
    # report the objective recomputed from the recovered policy, not from the
    # lifted variables, so transformation round-off cannot leak into results
    return SubproblemResult("optimal", analyze(scenario, policy).mu_s, policy)


def solve_overflow_subproblem(scenario: Scenario) -> SubproblemResult:
    """Best policy when the energy buffer stays full (lambda_se >= mu_se).

    The cap removes the harvest rate from the objective, leaving a plain
    linear program. It is solved without the regime row first; if the
    unconstrained optimum already consumes no more than the harvest rate the
    row is slack and the answer (and hence the whole plateau beyond it) is
    exactly reproducible, otherwise the row is added and the LP re-solved.
    """
    w, u, d, cap = _coefficients(scenario)
    m = scenario.num_durations
    c = (1.0 - scenario.lambda_pe) * u
    ones = np.ones((1, m))
    primary_row = (cap * d)[None, :]
    primary_rhs = np.array([cap - scenario.lambda_p])
    relaxed = StandardFormLP(c, ones, [1.0], primary_row, primary_rhs)
    solution = solve_lp(relaxed)
    if solution.status != "optimal":
        return SubproblemResult("infeasible", 0.0, None)
    policy = _policy_from(solution.x)
    if float(w @ policy.as_array()) > scenario.lambda_se + _REGIME_TOL:
        full = StandardFormLP(
            c, ones, [1.0],
            np.vstack([primary_row, w[None, :]]),
            np.append(primary_rhs, scenario.lambda_se),
        )
        solution = solve_lp(full)
        if solution.status != "optimal":
            return SubproblemResult("infeasible", 0.0, None)
        policy = _policy_from(solution.x)
    return SubproblemResult("optimal", analyze(scenario, policy).mu_s, policy)


def solve(scenario: Scenario) -> OptimizationOutcome:
    """Run both regime subproblems and keep the better feasible answer.

    Infeasible overall means no policy keeps the licensed queue stable, which
    happens exactly when lambda_p exceeds the best reachable mu_p. Ties
    between the regimes go to the saturated one, whose policy is independent
    of the harvest rate and therefore more robust to it.
    """
    constrained = solve_constrained_subproblem(scenario)
    overflow = solve_overflow_subproblem(scenario)
    if constrained.status != "optimal" and overflow.status != "optimal":
        return OptimizationOutcome(
            "infeasible", None, 0.0, "none", constrained, overflow, None)
    if constrained.status == "optimal" and (
            overflow.status != "optimal" or constrained.value > overflow.value):
        winner, side = constrained, "constrained"
    else:
        winner, side = overflow, "overflow"
    return OptimizationOutcome(
        "optimal", winner.policy, winner.value, side,
        constrained, overflow, analyze(scenario, winner.policy))
