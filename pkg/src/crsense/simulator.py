"""Slot-level Monte Carlo of the four interacting queues.

Each slot runs through a fixed sequence: Bernoulli arrivals to the four
queues, a sensing-duration draw from the policy, the sensor verdict (a
detection draw if the licensed node is on the air, a false-alarm draw if it
is silent), and the two channel fading draws. The licensed node transmits
whenever it has data and energy; the opportunistic node transmits when the
sensor says idle and it has data and energy. Concurrent transmissions
destroy both packets. Queue updates follow the late-arrival rule
``q <- max(q - service, 0) + arrival``: a packet arriving in slot t cannot
leave before slot t+1.

In ``dominant`` mode both nodes are saturated: they send dummy packets when
their data buffers are empty, which costs energy and causes collisions but
never serves the real data queues. In ``coupled`` mode the original and the
saturated systems consume one shared pre-generated random stream (fixed
per-slot order: arrivals, duration, sensing, channels), so the pair sees
identical randomness even in slots where one of them ignores a draw. All
randomness comes from a seeded PCG64 generator, which makes every run
bit-reproducible.

Reported service rates are the per-slot means of the service-process
indicators (the service a queue would receive if backlogged), which is the
quantity the closed-form expressions in ``analytics`` describe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .analytics import PolicyVector, Scenario

RNG_DESCRIPTION = f"numpy-{np.__version__}-PCG64"
MODES = ("original", "dominant", "coupled")
_DRIFT_SAMPLES = 2000
MIN_DIAGNOSTIC_SLOTS = 1_000_000


class QueueState(NamedTuple):
    """Packet counts of the four queues at one slot boundary."""

    q_p: int = 0
    q_s: int = 0
    q_pe: int = 0
    q_se: int = 0


@dataclass(frozen=True)
class SimConfig:
    scenario: Scenario
    policy: PolicyVector
    mode: str = "dominant"
    horizon: int = 100_000
    seed: int = 0
    warmup: int = 0
    initial: QueueState = QueueState()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (isinstance(self.horizon, int) and isinstance(self.warmup, int)):
            raise ValueError("horizon and warmup must be integers")
        if not self.horizon > self.warmup >= 0:
            raise ValueError(f"need horizon > warmup >= 0, got {self.horizon}, {self.warmup}")
        if len(self.policy) != self.scenario.num_durations:
            raise ValueError("policy length does not match the sensing table")
        if len(self.initial) != 4 or any(q < 0 or q != int(q) for q in self.initial):
            raise ValueError("initial must be four nonnegative integer queue levels")
        object.__setattr__(self, "initial", QueueState(*(int(q) for q in self.initial)))


@dataclass(frozen=True)
class SimReport:
    """Empirical counterpart of ``AnalyticRates`` plus run diagnostics.

    In coupled mode the rate and occupancy fields describe the original
    system; ``dominance_violations`` counts (slot, queue) pairs where an
    original data queue exceeded its saturated twin.
    """

    mode: str
    horizon: int
    warmup: int
    seed: int
    rng: str
    mu_p: float
    mu_s: float
    mu_pe: float
    mu_se: float
    prob_pe_empty: float
    prob_se_nonempty: float
    mean_q_p: float
    mean_q_s: float
    mean_q_pe: float
    mean_q_se: float
    drift_p: float
    drift_s: float
    drift_pe: float
    drift_se: float
    collisions: int
    dominance_violations: int | None = None


@dataclass(frozen=True)
class SlotTrace:
    """Per-slot arrays for invariant checks (start-of-slot states)."""

    q_p: np.ndarray
    q_s: np.ndarray
    q_pe: np.ndarray
    q_se: np.ndarray
    arr_p: np.ndarray
    arr_s: np.ndarray
    arr_pe: np.ndarray
    arr_se: np.ndarray
    pu_tx: np.ndarray
    cr_tx: np.ndarray
    r_p: np.ndarray
    r_s: np.ndarray
    r_pe: np.ndarray
    r_se: np.ndarray


def _predraw(scenario: Scenario, policy: PolicyVector, horizon: int, seed: int):
    """Pre-generate all per-slot indicator draws from one PCG64 stream.

    Column order within a slot: arrivals (p, s, pe, se), duration, sensing
    (detection, false alarm), channels (licensed, opportunistic).
    """
    rng = np.random.default_rng(seed)
    u = rng.random((horizon, 9))
    cum = np.cumsum(policy.as_array())
    m_idx = np.minimum(np.searchsorted(cum, u[:, 4], side="right"),
                       scenario.num_durations - 1)
    det = scenario.detection_probs()[m_idx]
    fal = scenario.false_alarm_probs()[m_idx]
    out_s = scenario.secondary_outages()[m_idx]
    return (
        (u[:, 0] < scenario.lambda_p).tolist(),
        (u[:, 1] < scenario.lambda_s).tolist(),
        (u[:, 2] < scenario.lambda_pe).tolist(),
        (u[:, 3] < scenario.lambda_se).tolist(),
        (u[:, 5] < det).tolist(),              # sensor fires given licensed tx
        (u[:, 6] < fal).tolist(),              # sensor fires given silence
        (u[:, 7] < 1.0 - scenario.primary_outage).tolist(),
        (u[:, 8] < 1.0 - out_s).tolist(),
    )


def _drift(samples: list[int], stride: int) -> float:
    if len(samples) < 2:
        return 0.0
    x = np.arange(len(samples), dtype=float) * stride
    return float(np.polyfit(x, np.asarray(samples, dtype=float), 1)[0])


def _run(config: SimConfig, saturated_flags: Sequence[bool], trace: bool):
    scenario, policy = config.scenario, config.policy
    horizon, warmup = config.horizon, config.warmup
    arr_p, arr_s, arr_pe, arr_se, det_busy, fa_busy, chan_p, chan_s = _predraw(
        scenario, policy, horizon, config.seed)

    systems = [list(config.initial) for _ in saturated_flags]
    coupled = len(systems) == 2
    measured = horizon - warmup
    stride = max(1, measured // _DRIFT_SAMPLES)

    svc = [0, 0, 0, 0]                      # service-indicator sums, order p,s,pe,se
    qsum = [0, 0, 0, 0]
    pe_empty = 0
    se_nonempty = 0
    collisions = 0
    violations = 0
    drift_samples: list[list[int]] = [[], [], [], []]
    rows: list[list] = [] if trace else None

    for t in range(horizon):
        in_window = t >= warmup
        if in_window:
            q = systems[0]
            for k in range(4):
                qsum[k] += q[k]
            pe_empty += q[2] == 0
            se_nonempty += q[3] != 0
            if (t - warmup) % stride == 0:
                for k in range(4):
                    drift_samples[k].append(q[k])
        for sysno, saturated in enumerate(saturated_flags):
            q_p, q_s, q_pe, q_se = systems[sysno]
            has_p = saturated or q_p > 0
            has_s = saturated or q_s > 0
            pu_tx = has_p and q_pe > 0
            sensed_busy = det_busy[t] if pu_tx else fa_busy[t]
            cr_tx = (not sensed_busy) and has_s and q_se > 0
            # service-process indicators; own-queue emptiness deliberately
            # excluded, the max() in the update masks it
            r_s = 1 if ((not pu_tx) and q_se > 0 and (not fa_busy[t]) and chan_s[t]) else 0
            r_se = 1 if (has_s and not sensed_busy) else 0
            r_pe = 1 if has_p else 0
            r_p = 1 if ((not (has_s and q_se > 0 and not det_busy[t]))
                        and chan_p[t] and q_pe > 0) else 0
            if sysno == 0:
                if in_window:
                    svc[0] += r_p
                    svc[1] += r_s
                    svc[2] += r_pe
                    svc[3] += r_se
                    if pu_tx and cr_tx:
                        collisions += 1
                if trace:
                    rows.append([q_p, q_s, q_pe, q_se,
                                 arr_p[t], arr_s[t], arr_pe[t], arr_se[t],
                                 pu_tx, cr_tx, r_p, r_s, r_pe, r_se])
            systems[sysno] = [
                (q_p - r_p if q_p > r_p else 0) + arr_p[t],
                (q_s - r_s if q_s > r_s else 0) + arr_s[t],
                (q_pe - r_pe if q_pe > r_pe else 0) + arr_pe[t],
                (q_se - r_se if q_se > r_se else 0) + arr_se[t],
            ]
        if coupled:
            if systems[0][0] > systems[1][0]:
                violations += 1
            if systems[0][1] > systems[1][1]:
                violations += 1

    report = SimReport(
        mode=config.mode,
        horizon=horizon,
        warmup=warmup,
        seed=config.seed,
        rng=RNG_DESCRIPTION,
        mu_p=svc[0] / measured,
        mu_s=svc[1] / measured,
        mu_pe=svc[2] / measured,
        mu_se=svc[3] / measured,
        prob_pe_empty=pe_empty / measured,
        prob_se_nonempty=se_nonempty / measured,
        mean_q_p=qsum[0] / measured,
        mean_q_s=qsum[1] / measured,
        mean_q_pe=qsum[2] / measured,
        mean_q_se=qsum[3] / measured,
        drift_p=_drift(drift_samples[0], stride),
        drift_s=_drift(drift_samples[1], stride),
        drift_pe=_drift(drift_samples[2], stride),
        drift_se=_drift(drift_samples[3], stride),
        collisions=collisions,
        dominance_violations=violations if coupled else None,
    )
    if not trace:
        return report
    cols = list(zip(*rows))
    names = ("q_p", "q_s", "q_pe", "q_se", "arr_p", "arr_s", "arr_pe", "arr_se",
             "pu_tx", "cr_tx", "r_p", "r_s", "r_pe", "r_se")
    arrays = {name: np.asarray(col) for name, col in zip(names, cols)}
    return report, SlotTrace(**arrays)


def simulate(config: SimConfig) -> SimReport:
    """Run one replication and return the empirical report."""
    if config.mode == "coupled":
        return coupled_dominance_run(config)
    return _run(config, [config.mode == "dominant"], trace=False)


def simulate_traced(config: SimConfig) -> tuple[SimReport, SlotTrace]:
    """Like ``simulate`` but also returns per-slot arrays; single modes only."""
    if config.mode == "coupled":
        raise ValueError("tracing is only supported for single-system modes")
    return _run(config, [config.mode == "dominant"], trace=True)


def coupled_dominance_run(config: SimConfig) -> SimReport:
    """Run the original system and its saturated twin on one shared stream.

    Both systems start from the same ``initial`` state and consume the same
    positional draws. After every slot the original data queues are compared
    against the twin's; each (slot, queue) pair where the original is longer
    counts as one dominance violation. Rates in the returned report describe
    the original system.
    """
    if config.mode != "coupled":
        raise ValueError("coupled_dominance_run requires mode='coupled'")
    return _run(config, [False, True], trace=False)


@dataclass(frozen=True)
class StabilityVerdict:
    queue: str
    arrival_rate: float
    service_rate: float
    drift_slope: float
    verdict: str        # "stable" | "unstable" | "borderline"


def stability_diagnostic(report: SimReport, scenario: Scenario) -> list[StabilityVerdict]:
    """Loynes-style verdict per data queue from a long measured run.

    A queue is stable when its arrival rate sits below the measured service
    rate by more than the sampling noise floor, unstable in the opposite
    case, and borderline inside the floor. The drift slope (packets per
    slot) is reported alongside; for an unstable queue it approaches
    ``lambda - mu``.
    """
    measured = report.horizon - report.warmup
    if measured < MIN_DIAGNOSTIC_SLOTS:
        raise ValueError(
            f"run too short for a stability verdict: {measured} measured slots, "
            f"need >= {MIN_DIAGNOSTIC_SLOTS}; raise horizon to at least "
            f"warmup + {MIN_DIAGNOSTIC_SLOTS}"
        )
    floor = 4.0 / math.sqrt(measured)
    verdicts = []
    for name, lam, mu, slope in (
        ("primary_data", scenario.lambda_p, report.mu_p, report.drift_p),
        ("secondary_data", scenario.lambda_s, report.mu_s, report.drift_s),
    ):
        if abs(lam - mu) <= floor:
            verdict = "borderline"
        elif lam < mu:
            verdict = "stable"
        else:
            verdict = "unstable"
        verdicts.append(StabilityVerdict(name, lam, mu, slope, verdict))
    return verdicts
