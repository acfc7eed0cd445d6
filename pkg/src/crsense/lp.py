"""Dense tableau simplex solver for small linear programs, plus a brute-force
vertex-enumeration oracle used to cross-check it.

Problems are stated as

    maximize  c @ x
    s.t.      a_eq @ x == b_eq
              a_ub @ x <= b_ub
              x >= 0

The solver is built for instances with at most a few hundred variables where
reproducibility matters more than speed: Bland's smallest-index rule is used
for both the entering and the leaving variable, which rules out cycling and
makes every run bit-deterministic. A singular or stalling tableau is retried
once with a deterministic nudge of the right-hand sides; the recovered vertex
is then re-validated against the original data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

FEASIBILITY_TOL = 1e-8      # constraint slack accepted on returned solutions
_PIVOT_TOL = 1e-10
_REDUCED_COST_TOL = 1e-9
_MAX_ITERATIONS = 50_000
_ORACLE_MAX_VARS = 15
_ORACLE_MAX_BASES = 200_000


class LPError(RuntimeError):
    """The solver could not produce a trustworthy answer."""


class _NumericalTrouble(RuntimeError):
    pass


def _as_system(a, b, n: int, kind: str) -> tuple[np.ndarray, np.ndarray]:
    if a is None and b is None:
        return np.zeros((0, n)), np.zeros(0)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != (b.size, n):
        raise ValueError(f"{kind} system has shape {a.shape}, expected ({b.size}, {n})")
    return a, b


@dataclass(frozen=True)
class StandardFormLP:
    """maximize objective @ x  s.t.  a_eq x = b_eq, a_ub x <= b_ub, x >= 0."""

    objective: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("objective must be a nonempty vector")
        a_eq, b_eq = _as_system(self.a_eq, self.b_eq, c.size, "equality")
        a_ub, b_ub = _as_system(self.a_ub, self.b_ub, c.size, "inequality")
        for name, arr in (("objective", c), ("a_eq", a_eq), ("b_eq", b_eq),
                          ("a_ub", a_ub), ("b_ub", b_ub)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "a_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "a_ub", a_ub)
        object.__setattr__(self, "b_ub", b_ub)

    @property
    def n(self) -> int:
        return self.objective.size


@dataclass(frozen=True)
class LPSolution:
    status: str                  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    basis[row] = col


def _optimize(tableau: np.ndarray, basis: np.ndarray, cvec: np.ndarray) -> str:
    """Run simplex iterations in place until optimal or unbounded."""
    ncols = tableau.shape[1] - 1
    for _ in range(_MAX_ITERATIONS):
        reduced = cvec[:ncols] - cvec[basis] @ tableau[:, :ncols]
        reduced[basis] = 0.0
        improving = np.nonzero(reduced > _REDUCED_COST_TOL)[0]
        if improving.size == 0:
            return "optimal"
        col = int(improving[0])                       # Bland: lowest index enters
        column = tableau[:, col]
        rows = np.nonzero(column > _PIVOT_TOL)[0]
        if rows.size == 0:
            return "unbounded"
        ratios = tableau[rows, -1] / column[rows]
        tied = rows[ratios <= ratios.min() + 1e-12]
        row = int(tied[np.argmin(basis[tied])])       # Bland: lowest basic index leaves
        _pivot(tableau, basis, row, col)
    raise _NumericalTrouble("simplex iteration limit reached")


def _simplex_core(c, a_eq, b_eq, a_ub, b_ub, tol) -> LPSolution:
    n = c.size
    m_eq, m_ub = a_eq.shape[0], a_ub.shape[0]
    m = m_eq + m_ub
    if m == 0:
        # only nonnegativity: the origin is optimal unless some c_j pays to grow
        if np.any(c > _REDUCED_COST_TOL):
            return LPSolution("unbounded")
        return LPSolution("optimal", np.zeros(n), 0.0)

    body = np.zeros((m, n + m_ub))
    body[:m_eq, :n] = a_eq
    body[m_eq:, :n] = a_ub
    body[m_eq:, n:] = np.eye(m_ub)
    rhs = np.concatenate([b_eq, b_ub])
    negative = rhs < 0
    body[negative] *= -1.0
    rhs = np.abs(rhs)

    basis = np.full(m, -1, dtype=int)
    needs_artificial = []
    for i in range(m):
        if i >= m_eq and not negative[i]:
            basis[i] = n + (i - m_eq)                 # slack starts basic
        else:
            needs_artificial.append(i)

    n_slack = m_ub
    n_art = len(needs_artificial)
    tableau = np.hstack([body, np.zeros((m, n_art)), rhs[:, None]])
    for k, i in enumerate(needs_artificial):
        tableau[i, n + n_slack + k] = 1.0
        basis[i] = n + n_slack + k

    if n_art:
        phase1 = np.zeros(n + n_slack + n_art)
        phase1[n + n_slack:] = -1.0                   # maximize -sum(artificials)
        if _optimize(tableau, basis, phase1) != "optimal":
            raise _NumericalTrouble("phase 1 failed to converge")  # bounded by 0
        if -(phase1[basis] @ tableau[:, -1]) > tol:
            return LPSolution("infeasible")
        # drive leftover artificials (all at level ~0) out of the basis
        drop = []
        for i in range(m):
            if basis[i] >= n + n_slack:
                candidates = np.nonzero(np.abs(tableau[i, : n + n_slack]) > _PIVOT_TOL)[0]
                if candidates.size:
                    _pivot(tableau, basis, i, int(candidates[0]))
                else:
                    drop.append(i)                    # redundant constraint row
        if drop:
            keep = [i for i in range(m) if i not in drop]
            tableau = tableau[keep]
            basis = basis[keep]
        tableau = np.delete(tableau, np.s_[n + n_slack: n + n_slack + n_art], axis=1)

    phase2 = np.concatenate([c, np.zeros(n_slack)])
    status = _optimize(tableau, basis, phase2)
    if status == "unbounded":
        return LPSolution("unbounded")
    x_full = np.zeros(n + n_slack)
    x_full[basis] = tableau[:, -1]
    x = x_full[:n]
    return LPSolution("optimal", x, float(c @ x))


def _validates(lp: StandardFormLP, x: np.ndarray, tol: float) -> bool:
    if x is None or np.any(x < -1e-10):
        return False
    if lp.a_eq.size and np.max(np.abs(lp.a_eq @ x - lp.b_eq)) > tol:
        return False
    if lp.a_ub.size and np.max(lp.a_ub @ x - lp.b_ub) > tol:
        return False
    return True


def solve_lp(lp: StandardFormLP, tol: float = FEASIBILITY_TOL) -> LPSolution:
    """Deterministic two-phase simplex; returns a vertex when optimal."""
    try:
        sol = _simplex_core(lp.objective, lp.a_eq, lp.b_eq, lp.a_ub, lp.b_ub, tol)
        if sol.status != "optimal" or _validates(lp, sol.x, tol):
            return sol
    except _NumericalTrouble:
        pass
    # Stalled or drifted: nudge the right-hand sides deterministically, then
    # insist the recovered vertex satisfies the *original* data.
    m_eq, m_ub = lp.b_eq.size, lp.b_ub.size
    bump_eq = 1e-9 * (1.0 + np.abs(lp.b_eq)) * np.arange(1, m_eq + 1)
    bump_ub = 1e-9 * (1.0 + np.abs(lp.b_ub)) * np.arange(1, m_ub + 1)
    try:
        sol = _simplex_core(lp.objective, lp.a_eq, lp.b_eq + bump_eq,
                            lp.a_ub, lp.b_ub + bump_ub, tol)
    except _NumericalTrouble as exc:
        raise LPError(f"simplex failed even after perturbation: {exc}") from exc
    if sol.status != "optimal":
        raise LPError(f"perturbed problem reported {sol.status}; original undecided")
    if not _validates(lp, sol.x, tol):
        raise LPError("perturbation fallback produced an invalid vertex")
    return LPSolution("optimal", sol.x, float(lp.objective @ sol.x))


def vertex_enumeration_oracle(lp: StandardFormLP, tol: float = FEASIBILITY_TOL) -> LPSolution:
    """Brute-force ground truth: enumerate basic solutions of the slack form
    and return the best feasible one.

    Only meant for testing small instances (refuses combinatorial sizes) and
    assumes the feasible region is bounded and the constraints have full row
    rank.
    """
    n = lp.n
    if n > _ORACLE_MAX_VARS:
        raise ValueError(f"enumeration refuses more than {_ORACLE_MAX_VARS} variables")
    m_eq, m_ub = lp.b_eq.size, lp.b_ub.size
    rows = m_eq + m_ub
    n_total = n + m_ub
    if rows == 0:
        if np.any(lp.objective > _REDUCED_COST_TOL):
            return LPSolution("unbounded")
        return LPSolution("optimal", np.zeros(n), 0.0)
    if math.comb(n_total, rows) > _ORACLE_MAX_BASES:
        raise ValueError("enumeration refuses: too many candidate bases")

    a_full = np.zeros((rows, n_total))
    a_full[:m_eq, :n] = lp.a_eq
    a_full[m_eq:, :n] = lp.a_ub
    a_full[m_eq:, n:] = np.eye(m_ub)
    b_full = np.concatenate([lp.b_eq, lp.b_ub])

    best_x = None
    best_value = -math.inf
    for cols in itertools.combinations(range(n_total), rows):
        square = a_full[:, cols]
        try:
            xb = np.linalg.solve(square, b_full)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(xb)) or xb.min() < -1e-9:
            continue
        x_full = np.zeros(n_total)
        x_full[list(cols)] = xb
        if np.max(np.abs(a_full @ x_full - b_full)) > tol:
            continue                                  # ill-conditioned basis
        value = float(lp.objective @ x_full[:n])
        if value > best_value:
            best_value = value
            best_x = x_full[:n]
    if best_x is None:
        return LPSolution("infeasible")
    return LPSolution("optimal", best_x, best_value)
