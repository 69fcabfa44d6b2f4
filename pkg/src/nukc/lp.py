"""A small dense linear-programming engine.

Bounded-variable primal simplex with Bland's anti-cycling rule and a
phase-one artificial start.  Solutions are always basic: at most one
variable per constraint row sits strictly between its bounds, which the
rounding routines in this package rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-7

LE = "<="
GE = ">="


class LpSolverError(RuntimeError):
    """Pivot budget exhausted or numerical breakdown."""


@dataclass
class LpProblem:
    """minimize objective . x subject to row constraints and box bounds.

    Constraints are (coeffs, rel, rhs) with rel in {"<=", ">="}.
    Bounds are per-variable (lo, hi); hi may be math.inf.
    """

    num_vars: int
    constraints: list = field(default_factory=list)
    bounds: list | None = None
    objective: np.ndarray | None = None

    def add_constraint(self, coeffs, rel: str, rhs: float) -> None:
        if rel not in (LE, GE):
            raise ValueError(f"unknown relation {rel!r}")
        self.constraints.append((np.asarray(coeffs, dtype=float), rel, float(rhs)))


@dataclass
class LpSolution:
    status: str  # "optimal" | "feasible" | "infeasible" | "unbounded"
    values: np.ndarray | None = None
    objective_value: float | None = None
    is_basic: bool = False

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "feasible")


def format_lp(problem: LpProblem) -> str:
    """Render a problem in LP text format for debugging."""

    def row(coeffs):
        terms = [
            f"{'+' if c >= 0 else '-'} {abs(c):g} x{j}"
            for j, c in enumerate(coeffs)
            if c != 0.0
        ]
        return " ".join(terms) if terms else "0"

    lines = ["Minimize"]
    obj = (
        problem.objective
        if problem.objective is not None
        else np.zeros(problem.num_vars)
    )
    lines.append(" obj: " + row(obj))
    lines.append("Subject To")
    for i, (coeffs, rel, rhs) in enumerate(problem.constraints):
        lines.append(f" c{i}: " + row(coeffs) + f" {rel} {rhs:g}")
    lines.append("Bounds")
    bounds = problem.bounds or [(0.0, np.inf)] * problem.num_vars
    for j, (lo, hi) in enumerate(bounds):
        hi_s = "+inf" if np.isinf(hi) else f"{hi:g}"
        lines.append(f" {lo:g} <= x{j} <= {hi_s}")
    lines.append("End")
    return "\n".join(lines)


def _pivot_loop(A, b, cost, lo, hi, basis, x, max_iters):
    """Run bounded-variable simplex on A x = b, x in [lo, hi], minimizing
    cost.  Mutates basis and x in place.  Returns "optimal" or "unbounded".
    """
    m, ncols = A.shape
    in_basis = np.zeros(ncols, dtype=bool)
    in_basis[basis] = True
    for _ in range(max_iters):
        B = A[:, basis]
        try:
            lam = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError as exc:  # pragma: no cover - degenerate basis
            raise LpSolverError("singular basis matrix") from exc
        reduced = cost - lam @ A
        entering = -1
        direction = 0
        for j in range(ncols):  # Bland: lowest eligible index enters
            if in_basis[j] or lo[j] == hi[j]:
                continue
            at_lower = x[j] <= lo[j] + FEAS_TOL
            if at_lower and reduced[j] < -PIVOT_TOL:
                entering, direction = j, 1
                break
            if not at_lower and reduced[j] > PIVOT_TOL:
                entering, direction = j, -1
                break
        if entering < 0:
            return "optimal"
        w = np.linalg.solve(B, A[:, entering])
        t_max = hi[entering] - lo[entering]
        blocking = -1
        for i in range(m):
            delta = direction * w[i]
            v = basis[i]
            if delta > PIVOT_TOL:
                step = (x[v] - lo[v]) / delta
            elif delta < -PIVOT_TOL:
                step = (hi[v] - x[v]) / (-delta)
            else:
                continue
            if step < t_max - PIVOT_TOL:
                t_max = step
                blocking = i
            elif step <= t_max + PIVOT_TOL and blocking >= 0 and v < basis[blocking]:
                blocking = i  # Bland: lowest variable index leaves
        if not np.isfinite(t_max):
            return "unbounded"
        t_max = max(t_max, 0.0)
        x[entering] += direction * t_max
        for i in range(m):
            x[basis[i]] -= direction * w[i] * t_max
        if blocking >= 0:
            leave = basis[blocking]
            # Snap the leaving variable onto whichever bound it hit.
            if abs(x[leave] - lo[leave]) <= abs(x[leave] - hi[leave]):
                x[leave] = lo[leave]
            else:
                x[leave] = hi[leave]
            in_basis[leave] = False
            basis[blocking] = entering
            in_basis[entering] = True
        else:
            # Bound flip: the entering variable hit its opposite bound.
            x[entering] = hi[entering] if direction > 0 else lo[entering]
    raise LpSolverError(f"pivot budget exhausted after {max_iters} iterations")


def solve(problem: LpProblem, max_iters: int | None = None) -> LpSolution:
    """Solve an LpProblem.  Deterministic: identical input gives identical
    pivot sequences and output.
    """
    n = problem.num_vars
    m = len(problem.constraints)
    bounds = problem.bounds or [(0.0, np.inf)] * n
    if len(bounds) != n:
        raise ValueError("bounds length must equal num_vars")
    for j, (blo, bhi) in enumerate(bounds):
        if blo > bhi:
            raise ValueError(f"variable {j} has empty bound interval [{blo}, {bhi}]")

    ncols = n + m  # structural + one slack per row
    A = np.zeros((max(m, 1), ncols))
    b = np.zeros(max(m, 1))
    lo = np.zeros(ncols)
    hi = np.full(ncols, np.inf)
    for j, (blo, bhi) in enumerate(bounds):
        lo[j], hi[j] = float(blo), float(bhi)

    x = np.zeros(ncols)
    x[:n] = lo[:n]

    if m == 0:
        vals = x[:n].copy()
        obj = problem.objective
        return LpSolution(
            status="optimal" if obj is not None else "feasible",
            values=vals,
            objective_value=float(obj @ vals) if obj is not None else None,
            is_basic=True,
        )

    basis = []
    art_cols = []
    for i, (coeffs, rel, rhs) in enumerate(problem.constraints):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (n,):
            raise ValueError(f"constraint {i} has wrong width {coeffs.shape}")
        A[i, :n] = coeffs
        b[i] = rhs
        sl = n + i
        A[i, sl] = 1.0 if rel == LE else -1.0
        resid = rhs - coeffs @ x[:n]
        sval = resid if rel == LE else -resid
        if sval >= 0.0:
            x[sl] = sval
            basis.append(sl)
        else:
            x[sl] = 0.0
            art_cols.append(i)
            basis.append(-1)  # placeholder, filled below

    if art_cols:
        extra = np.zeros((m, len(art_cols)))
        for a_idx, i in enumerate(art_cols):
            resid = b[i] - A[i, :ncols] @ x
            extra[i, a_idx] = 1.0 if resid >= 0 else -1.0
        A = np.hstack([A, extra])
        lo = np.concatenate([lo, np.zeros(len(art_cols))])
        hi = np.concatenate([hi, np.full(len(art_cols), np.inf)])
        xa = np.zeros(len(art_cols))
        for a_idx, i in enumerate(art_cols):
            resid = b[i] - A[i, :ncols] @ x
            xa[a_idx] = abs(resid)
            basis[i] = ncols + a_idx
        x = np.concatenate([x, xa])
        phase1 = np.zeros(A.shape[1])
        phase1[ncols:] = 1.0
        iters = max_iters or 200 * (m + A.shape[1])
        status = _pivot_loop(A, b, phase1, lo, hi, basis, x, iters)
        if status == "unbounded":  # pragma: no cover - phase 1 is bounded below
            raise LpSolverError("phase one reported unbounded")
        if float(phase1 @ x) > FEAS_TOL * max(1.0, np.abs(b).max()):
            return LpSolution(status="infeasible")
        hi[ncols:] = 0.0  # freeze artificials at zero for phase two
        x[ncols:] = 0.0

    cost = np.zeros(A.shape[1])
    if problem.objective is not None:
        obj = np.asarray(problem.objective, dtype=float)
        if obj.shape != (n,):
            raise ValueError("objective has wrong width")
        cost[:n] = obj
    iters = max_iters or 200 * (m + A.shape[1])
    status = _pivot_loop(A, b, cost, lo, hi, basis, x, iters)
    if status == "unbounded":
        return LpSolution(status="unbounded")

    vals = x[:n].copy()
    # Safety recheck against the original rows.
    scale = max(1.0, np.abs(b).max())
    for i, (coeffs, rel, rhs) in enumerate(problem.constraints):
        lhs = float(np.asarray(coeffs, dtype=float) @ vals)
        if rel == LE and lhs > rhs + FEAS_TOL * scale:
            raise LpSolverError(f"row {i} violated after solve: {lhs} > {rhs}")
        if rel == GE and lhs < rhs - FEAS_TOL * scale:
            raise LpSolverError(f"row {i} violated after solve: {lhs} < {rhs}")
    np.clip(vals, lo[:n], hi[:n], out=vals)
    has_obj = problem.objective is not None
    return LpSolution(
        status="optimal" if has_obj else "feasible",
        values=vals,
        objective_value=float(cost[:n] @ vals) if has_obj else None,
        is_basic=True,
    )
