"""Executable acceptance checks for the whole package.

Each criterion is a function returning a ``CriterionResult``; ``run_all``
evaluates a scenario (expected to be a ten-duration table like the bundled
one) against all of them. The checks deliberately cross different routes
through the code: closed forms against the slot simulator, the LP-based
optimizer against a dense simplex grid and against vertex enumeration,
monotonicity claims against parameter sweeps.

The brute-force oracles below recompute the per-duration weights straight
from the sensing table instead of calling the analytics helpers, so that a
bug in the production path cannot hide inside its own oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analytics import PolicyVector, Scenario, analyze
from .channel import PhysicalLink, verify_outage_monotonicity
from .lp import StandardFormLP, vertex_enumeration_oracle
from .optimizer import solve, solve_constrained_subproblem, solve_overflow_subproblem
from .simulator import SimConfig, coupled_dominance_run, simulate
from .sweep import SweepSpec, rows_to_csv, run_sweep


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str


def format_result(result: CriterionResult) -> str:
    flag = "PASS" if result.passed else "FAIL"
    return f"criterion {result.number} [{result.name}] {flag}: {result.detail}"


# --------------------------------------------------------------------------
# oracles


_GRID_CACHE: dict[int, np.ndarray] = {}


def _simplex_grid(k: int = 1000) -> np.ndarray:
    """All points of the 2-simplex with coordinates in multiples of 1/k."""
    if k not in _GRID_CACHE:
        i = np.repeat(np.arange(k + 1), np.arange(k + 1, 0, -1))
        j = np.concatenate([np.arange(k + 1 - v) for v in range(k + 1)])
        _GRID_CACHE[k] = np.column_stack([i, j, k - i - j]) / k
    return _GRID_CACHE[k]


def _require_three_durations(scenario: Scenario) -> None:
    if scenario.num_durations != 3:
        raise ValueError("the dense grid oracle covers exactly three durations")


def _raw_weights(scenario: Scenario):
    """Per-duration weights straight from the table (oracle-side copy)."""
    miss = np.array([1.0 - o.detection_prob for o in scenario.sensing_table])
    no_fa = np.array([1.0 - o.false_alarm_prob for o in scenario.sensing_table])
    good = np.array([1.0 - o.secondary_outage for o in scenario.sensing_table])
    consume = scenario.lambda_pe * miss + (1.0 - scenario.lambda_pe) * no_fa
    return consume, good * no_fa, miss


def grid_oracle_constrained(scenario: Scenario, k: int = 1000):
    """Dense-grid optimum of the drain-regime subproblem; (status, value)."""
    _require_three_durations(scenario)
    w, u, d = _raw_weights(scenario)
    grid = _simplex_grid(k)
    wp = grid @ w
    up = grid @ u
    dp = grid @ d
    lam_se = scenario.lambda_se
    cap = scenario.lambda_pe * (1.0 - scenario.primary_outage)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(wp > 0.0, lam_se / wp, np.where(lam_se > 0.0, np.inf, 0.0))
    feasible = (
        (lam_se <= wp + 1e-12)
        & (scenario.lambda_p <= cap * (1.0 - ratio * dp) + 1e-9)
    )
    if not feasible.any():
        return "infeasible", 0.0
    values = ratio[feasible] * (1.0 - scenario.lambda_pe) * up[feasible]
    return "optimal", float(values.max())


def grid_oracle_master(scenario: Scenario, k: int = 1000):
    """Dense-grid optimum of the full problem (capped occupancy)."""
    _require_three_durations(scenario)
    w, u, d = _raw_weights(scenario)
    grid = _simplex_grid(k)
    wp = grid @ w
    up = grid @ u
    dp = grid @ d
    lam_se = scenario.lambda_se
    cap = scenario.lambda_pe * (1.0 - scenario.primary_outage)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(wp > 0.0, lam_se / wp, np.where(lam_se > 0.0, np.inf, 0.0))
    capped = np.minimum(ratio, 1.0)
    mu_p = cap * (1.0 - capped * dp)
    mu_s = capped * (1.0 - scenario.lambda_pe) * up
    feasible = scenario.lambda_p <= mu_p + 1e-9
    if not feasible.any():
        return "infeasible", 0.0
    return "optimal", float(mu_s[feasible].max())


def overflow_oracle(scenario: Scenario):
    """Vertex-enumeration optimum of the saturated-regime subproblem."""
    w, u, d = _raw_weights(scenario)
    m = w.size
    cap = scenario.lambda_pe * (1.0 - scenario.primary_outage)
    lp = StandardFormLP(
        (1.0 - scenario.lambda_pe) * u,
        np.ones((1, m)), [1.0],
        np.vstack([cap * d, w]),
        np.array([cap - scenario.lambda_p, scenario.lambda_se]),
    )
    return vertex_enumeration_oracle(lp)


def _sub_table(scenario: Scenario) -> Scenario:
    """Three-duration sub-scenario: first, middle, and last table rows."""
    m = scenario.num_durations
    positions = sorted({0, (m - 1) // 2, m - 1})
    table = tuple(scenario.sensing_table[p] for p in positions)
    return replace(scenario, sensing_table=table)


# --------------------------------------------------------------------------
# criteria


def criterion_1_outage_monotonicity(num_links: int = 1000, seed: int = 7) -> CriterionResult:
    """Outage strictly increases with the sensing time on random links.

    Links are sampled so the outage exponent stays inside the range where
    float64 can still distinguish neighbouring values (no saturation at 1.0);
    the property itself is exact for every valid link.
    """
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(num_links):
        r = 10.0 ** rng.uniform(math.log10(0.05), math.log10(1.2))   # b / (W T)
        top_exponent = 10.0 ** rng.uniform(-6.0, math.log10(25.0))   # at tau = 0.9 T
        sg = (2.0 ** (10.0 * r) - 1.0) / (10.0 * top_exponent)       # gain_var * snr0
        slot = 10.0 ** rng.uniform(-4.0, -2.0)
        bandwidth = 10.0 ** rng.uniform(5.0, 7.0)
        gain_var = 10.0 ** rng.uniform(-1.0, 1.0)
        noise = 10.0 ** rng.uniform(-9.0, -6.0)
        link = PhysicalLink(
            bits_per_packet=r * bandwidth * slot,
            slot_duration=slot,
            bandwidth=bandwidth,
            gain_variance=gain_var,
            energy_per_packet=sg * slot * noise / gain_var,
            noise_power=noise,
        )
        taus = np.linspace(0.0, 0.9 * slot, 10)
        if not verify_outage_monotonicity(link, taus):
            violations += 1
    return CriterionResult(
        1, "outage monotone in sensing time", violations == 0,
        f"{num_links} random links x 10 durations, {violations} violations")


def criterion_2_sim_vs_analytics(scenario: Scenario, horizon: int = 1_000_000,
                                 seed: int = 1) -> CriterionResult:
    """Saturated-mode simulation reproduces the closed-form reference values."""
    base = replace(scenario, lambda_pe=0.2, lambda_se=0.4)
    policy = PolicyVector.point_mass(base.num_durations, 0)
    rates = analyze(base, policy)
    report = simulate(SimConfig(base, policy, "dominant", horizon, seed, warmup=10_000))
    mu_s_ref, mu_p_ref, pe_ref = 0.33366, 0.11951, 0.8
    analytic_ok = (abs(rates.mu_s - mu_s_ref) < 1e-4
                   and abs(rates.mu_p - mu_p_ref) < 1e-4
                   and abs(rates.prob_pe_empty - pe_ref) < 1e-12)
    err_s = abs(report.mu_s - mu_s_ref) / mu_s_ref
    err_p = abs(report.mu_p - mu_p_ref) / mu_p_ref
    err_pe = abs(report.prob_pe_empty - pe_ref)
    passed = analytic_ok and err_s < 0.01 and err_p < 0.02 and err_pe < 0.005
    return CriterionResult(
        2, "closed form vs simulation", passed,
        f"mu_s rel err {err_s:.4%} (<1%), mu_p rel err {err_p:.4%} (<2%), "
        f"empty-energy abs err {err_pe:.5f} (<0.005)")


def criterion_3_occupancy(scenario: Scenario, count: int = 20,
                          horizon: int = 500_000, seed: int = 3) -> CriterionResult:
    """Empirical nonempty probability of the energy buffer matches the ratio.

    Scenarios keep the harvest rate at least 0.05 below the consumption rate
    (and at most 75% of it, so the mixing time stays compatible with the
    horizon and the 0.01 target).
    """
    rng = np.random.default_rng(seed)
    m = scenario.num_durations
    worst = 0.0
    for i in range(count):
        while True:
            raw = rng.random(m) + 0.05
            policy = PolicyVector(tuple(raw / raw.sum()))
            lam_pe = rng.uniform(0.0, 1.0)
            probe = replace(scenario, lambda_pe=lam_pe, lambda_se=0.0)
            mu_se = analyze(probe, policy).mu_se
            if mu_se >= 0.12:
                break
        lam_se = rng.uniform(0.02, min(mu_se - 0.05, 0.75 * mu_se))
        case = replace(scenario, lambda_pe=lam_pe, lambda_se=lam_se)
        report = simulate(SimConfig(case, policy, "dominant", horizon, 100 + i,
                                    warmup=20_000))
        worst = max(worst, abs(report.prob_se_nonempty - lam_se / mu_se))
    return CriterionResult(
        3, "energy occupancy formula", worst <= 0.01,
        f"{count} scenarios, max |empirical - ratio| = {worst:.5f} (<= 0.01)")


def criterion_4_optimizer_vs_bruteforce(scenario: Scenario, count: int = 50,
                                        seed: int = 42) -> CriterionResult:
    """Both subproblems match independent brute-force optima on a 3-row table."""
    sub = _sub_table(scenario)
    rng = np.random.default_rng(seed)
    worst_frac = 0.0
    worst_lin = 0.0
    mismatches = []
    for i in range(count):
        case = replace(
            sub,
            lambda_p=rng.uniform(0.0, 0.25),
            lambda_pe=rng.uniform(0.05, 0.95),
            lambda_se=rng.uniform(0.02, 0.9),
        )
        frac = solve_constrained_subproblem(case)
        grid_status, grid_value = grid_oracle_constrained(case)
        if frac.status != grid_status:
            mismatches.append(f"case {i}: drain regime {frac.status} vs grid {grid_status}")
        elif frac.status == "optimal":
            worst_frac = max(worst_frac, abs(frac.value - grid_value))
        lin = solve_overflow_subproblem(case)
        oracle = overflow_oracle(case)
        if lin.status != oracle.status:
            mismatches.append(f"case {i}: saturated regime {lin.status} vs {oracle.status}")
        elif lin.status == "optimal":
            worst_lin = max(worst_lin, abs(lin.value - oracle.value))
    passed = not mismatches and worst_frac <= 1e-3 and worst_lin <= 1e-7
    detail = (f"{count} cases: max |fractional - grid| = {worst_frac:.2e} (<=1e-3), "
              f"max |linear - enumeration| = {worst_lin:.2e} (<=1e-7)")
    if mismatches:
        detail += "; status mismatches: " + "; ".join(mismatches[:3])
    return CriterionResult(4, "optimizer vs brute force", passed, detail)


def criterion_5_infeasibility_threshold(scenario: Scenario) -> CriterionResult:
    """No policy can stabilize the licensed queue until its energy rate
    clears lambda_p / (1 - primary_outage)."""
    base = replace(scenario, lambda_p=0.2, lambda_se=0.4)
    threshold = base.lambda_p / (1.0 - base.primary_outage)
    below_ok = True
    first_feasible = None
    for k in range(101):
        lam_pe = k * 0.01
        outcome = solve(replace(base, lambda_pe=lam_pe))
        if lam_pe < threshold - 1e-9:
            if outcome.status != "infeasible":
                below_ok = False
        elif outcome.status == "optimal" and first_feasible is None:
            first_feasible = lam_pe
    passed = below_ok and first_feasible is not None
    return CriterionResult(
        5, "infeasibility threshold", passed,
        f"infeasible below {threshold:.4f}: {below_ok}; "
        f"first feasible grid point {first_feasible}")


def criterion_6_plateau(scenario: Scenario) -> CriterionResult:
    """Throughput is nondecreasing in the harvest rate and exactly flat past
    the saturated subproblem's consumption rate."""
    issues = []
    for lam_p in (0.1, 0.2):
        base = replace(scenario, lambda_pe=0.6, lambda_p=lam_p)
        ref = solve(replace(base, lambda_se=1.0))
        if ref.status != "optimal":
            issues.append(f"lambda_p={lam_p}: reference solve infeasible")
            continue
        knee = analyze(replace(base, lambda_se=1.0), ref.overflow.policy).mu_se
        values = []
        for k in range(51):
            lam_se = k * 0.02
            outcome = solve(replace(base, lambda_se=lam_se))
            values.append((lam_se, outcome.best_mu_s))
        for (_, a), (_, b) in zip(values, values[1:]):
            if b < a - 1e-10:
                issues.append(f"lambda_p={lam_p}: decrease {a!r} -> {b!r}")
                break
        plateau = [v for lam_se, v in values if lam_se >= knee + 1e-9]
        if any(v != ref.best_mu_s for v in plateau):
            issues.append(f"lambda_p={lam_p}: plateau not exactly constant past {knee:.4f}")
    return CriterionResult(
        6, "harvest-rate plateau", not issues,
        "nondecreasing and exactly constant past the saturation knee"
        if not issues else "; ".join(issues))


def _sweep_values(base: Scenario, param: str, grid: list[float], field: str) -> list[float]:
    out = []
    for value in grid:
        outcome = solve(replace(base, **{param: value}))
        if outcome.status != "optimal":
            out.append(0.0)
        else:
            out.append(outcome.best_mu_s if field == "mu_s" else outcome.rates.mu_p)
    return out


_FRONTIER_GRID = [k * 0.01 for k in range(101)]


def frontier_mu_s_vs_lambda_p(scenario: Scenario) -> str | None:
    """Throughput never rises with the licensed load; None when it holds."""
    base = replace(scenario, lambda_pe=0.4, lambda_se=0.4)
    values = _sweep_values(base, "lambda_p", _FRONTIER_GRID, "mu_s")
    for k in range(len(values) - 1):
        if values[k + 1] > values[k] + 1e-10:
            return f"mu_s rose with lambda_p at {_FRONTIER_GRID[k + 1]:.2f}"
    return None


def frontier_mu_s_vs_lambda_se(scenario: Scenario) -> str | None:
    """Pointwise in lambda_p, more harvested energy never hurts throughput."""
    low = _sweep_values(replace(scenario, lambda_pe=0.4, lambda_se=0.2),
                        "lambda_p", _FRONTIER_GRID, "mu_s")
    high = _sweep_values(replace(scenario, lambda_pe=0.4, lambda_se=0.4),
                         "lambda_p", _FRONTIER_GRID, "mu_s")
    for k in range(len(_FRONTIER_GRID)):
        if high[k] < low[k] - 1e-10:
            return (f"at lambda_p={_FRONTIER_GRID[k]:.2f}: "
                    f"mu_s(lambda_se=0.4)={high[k]:.6f} < "
                    f"mu_s(lambda_se=0.2)={low[k]:.6f}")
    return None


def frontier_mu_p_vs_lambda_pe(scenario: Scenario) -> str | None:
    """Licensed service at the optimum never falls as its energy rate grows."""
    base = replace(scenario, lambda_p=0.2, lambda_se=0.4)
    values = _sweep_values(base, "lambda_pe", _FRONTIER_GRID, "mu_p")
    for k in range(len(values) - 1):
        if values[k + 1] < values[k] - 1e-10:
            return f"mu_p fell with lambda_pe at {_FRONTIER_GRID[k + 1]:.2f}"
    return None


def criterion_7_frontier(scenario: Scenario) -> CriterionResult:
    """Monotone frontier shapes: mu_s falls with lambda_p, rises with
    lambda_se pointwise, and mu_p at the optimum rises with lambda_pe.

    Infeasible points report zero throughput, which is also how sweeps emit
    them.
    """
    issues = []
    for label, check in (("(a)", frontier_mu_s_vs_lambda_p),
                         ("(b)", frontier_mu_s_vs_lambda_se),
                         ("(c)", frontier_mu_p_vs_lambda_pe)):
        issue = check(scenario)
        if issue:
            issues.append(f"{label} {issue}")
    return CriterionResult(
        7, "frontier monotonicity", not issues,
        "mu_s nonincreasing in lambda_p, nondecreasing in lambda_se, "
        "mu_p nondecreasing in lambda_pe" if not issues else "; ".join(issues))


def criterion_8_dominance(scenario: Scenario, count: int = 100,
                          horizon: int = 10_000, seed: int = 8) -> CriterionResult:
    """Original data queues never exceed their saturated twins, per slot,
    under shared randomness."""
    rng = np.random.default_rng(seed)
    m = scenario.num_durations
    total = 0
    offenders = 0
    for i in range(count):
        raw = rng.random(m) + 0.01
        policy = PolicyVector(tuple(raw / raw.sum()))
        case = replace(
            scenario,
            lambda_p=rng.uniform(0.05, 0.95),
            lambda_s=rng.uniform(0.05, 0.95),
            lambda_pe=rng.uniform(0.05, 0.95),
            lambda_se=rng.uniform(0.05, 0.95),
        )
        report = coupled_dominance_run(
            SimConfig(case, policy, "coupled", horizon, 500 + i))
        total += report.dominance_violations
        offenders += report.dominance_violations > 0
    return CriterionResult(
        8, "per-slot dominance coupling", total == 0,
        f"{count} scenarios x {horizon} slots: {total} violations "
        f"in {offenders} scenarios (require 0)")


def criterion_9_determinism(scenario: Scenario) -> CriterionResult:
    """Identical configuration and seed reproduce byte-identical CSV."""
    spec = SweepSpec(replace(scenario, lambda_se=0.4), "lambda_p", 0.0, 0.3, 0.05,
                     simulate=True, horizon=20_000, warmup=2_000, seed=11)
    first = rows_to_csv(spec, run_sweep(spec))
    second = rows_to_csv(spec, run_sweep(spec))
    policy = PolicyVector.uniform(scenario.num_durations)
    rep_a = simulate(SimConfig(scenario, policy, "dominant", 50_000, 13, warmup=1_000))
    rep_b = simulate(SimConfig(scenario, policy, "dominant", 50_000, 13, warmup=1_000))
    passed = first == second and rep_a == rep_b
    return CriterionResult(
        9, "determinism", passed,
        f"CSV bytes identical: {first == second}; reports identical: {rep_a == rep_b}")


_CRITERIA = {
    1: lambda scenario: criterion_1_outage_monotonicity(),
    2: criterion_2_sim_vs_analytics,
    3: criterion_3_occupancy,
    4: criterion_4_optimizer_vs_bruteforce,
    5: criterion_5_infeasibility_threshold,
    6: criterion_6_plateau,
    7: criterion_7_frontier,
    8: criterion_8_dominance,
    9: criterion_9_determinism,
}


def run_all(scenario: Scenario, criteria: list[int] | None = None) -> list[CriterionResult]:
    numbers = sorted(criteria) if criteria else sorted(_CRITERIA)
    unknown = [n for n in numbers if n not in _CRITERIA]
    if unknown:
        raise ValueError(f"unknown criterion numbers: {unknown}")
    return [_CRITERIA[n](scenario) for n in numbers]
