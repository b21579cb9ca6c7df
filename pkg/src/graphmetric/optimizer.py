"""Alternating Frank-Wolfe metric learning over graph metric matrices.

The loop alternates three ingredients: scalar updates that re-align all
Gershgorin disc left-ends at lambda_min via s_k = 1 / v_k (so the linear PD
surrogate constraints are tight around the incumbent), a diagonal
Frank-Wolfe pass whose LP subproblem has a closed-form vertex, and
per-column block-coordinate Frank-Wolfe passes over the off-diagonals with
an irreducibility floor.  Every iterate stays a certified graph metric.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import eigen, lp
from .core import (Certificate, GershgorinScalars, GraphMetric,
                   SymmetricMatrix, alignment_scalars, is_connected,
                   scaled_left_ends, scaled_radii, validate_graph_metric)
from .objective import ConvexObjective, GLRObjective, ObjectiveContext

log = logging.getLogger(__name__)

# Eigensolver tolerance inside the optimizer; tighter than the public
# default so feasibility margins are not eaten by eigenvector error.
_EIG_TOL = 1e-11

_FEAS_SLACK = 1e-9
_ARMIJO_C = 1e-4
_MIN_STEP = 1e-12

Observer = Callable[[str, "OptimizerState"], None]


class ConfigError(ValueError):
    """Optimizer configuration violates its invariants."""


class CertificationError(RuntimeError):
    """An iterate failed graph-metric certification (should not happen)."""


class SubproblemInfeasibleError(RuntimeError):
    """A Frank-Wolfe LP had no feasible point; rho / trace_cap mismatch."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for the metric learner.

    ``trace_cap``, ``rho`` and ``epsilon`` default to None and are resolved
    against the feature dimension K: trace_cap = K, rho = 1e-4 * C / K,
    epsilon = 1e-3 * C / K.
    """

    trace_cap: float | None = None
    rho: float | None = None
    epsilon: float | None = None
    fw_max_iters: int = 100
    outer_max_iters: int = 50
    bcd_sweeps: int = 1
    obj_rel_tol: float = 1e-6
    fw_step_rule: str = "line_search"  # or "diminishing"

    def resolve(self, dim: int) -> "OptimizerConfig":
        """Fill defaults for dimension ``dim`` and validate all invariants."""
        if dim < 2:
            raise ConfigError("need at least 2 features")
        c = float(self.trace_cap) if self.trace_cap is not None else float(dim)
        rho = float(self.rho) if self.rho is not None else 1e-4 * c / dim
        eps = float(self.epsilon) if self.epsilon is not None else 1e-3 * c / dim
        cfg = replace(self, trace_cap=c, rho=rho, epsilon=eps)
        cfg._validate(dim)
        return cfg

    def _validate(self, dim: int) -> None:
        c, rho, eps = self.trace_cap, self.rho, self.epsilon
        if c is None or c <= 0:
            raise ConfigError("trace_cap must be positive")
        if rho is None or rho <= 0:
            raise ConfigError("rho must be positive")
        if eps is None or eps <= 0:
            raise ConfigError("epsilon must be positive")
        if not rho < c / dim:
            raise ConfigError(f"rho={rho} must be < trace_cap/K = {c / dim}")
        if not c / dim > 2 * eps + rho:
            raise ConfigError(
                f"need trace_cap/K > 2*epsilon + rho for a PD start "
                f"({c / dim} vs {2 * eps + rho})")
        if self.fw_max_iters < 1 or self.outer_max_iters < 1 or self.bcd_sweeps < 1:
            raise ConfigError("iteration counts must be >= 1")
        if self.obj_rel_tol <= 0:
            raise ConfigError("obj_rel_tol must be positive")
        if self.fw_step_rule not in ("line_search", "diminishing"):
            raise ConfigError(f"unknown fw_step_rule {self.fw_step_rule!r}")

    @property
    def is_resolved(self) -> bool:
        return None not in (self.trace_cap, self.rho, self.epsilon)


@dataclass(frozen=True)
class OptimizerState:
    """One point of the optimization trajectory.

    ``scalars`` and ``eigpair`` are aligned with ``metric`` as of the most
    recent scalar update; matrix-modifying steps refresh the metric's
    certificate but leave the scalars to the next update.
    ``protected_edges`` is the spanning set of edges currently pinned at
    magnitude >= epsilon to keep the graph irreducible.
    """

    metric: GraphMetric
    scalars: GershgorinScalars
    eigpair: eigen.EigenPair
    objective_trace: tuple[float, ...]
    iteration: int = 0
    protected_edges: tuple[tuple[int, int], ...] = ()
    fw_gap: float = math.nan


@dataclass(frozen=True)
class LearnResult:
    metric: GraphMetric
    objective_trace: list[float]
    outer_iterations: int
    converged: bool


def init_metric(cfg: OptimizerConfig, dim: int) -> GraphMetric:
    """Path-graph start: diagonal trace_cap/K, off-diagonals -epsilon on j = i +- 1.

    The diagonal is nudged so the trace hits the cap exactly.
    """
    cfg = cfg if cfg.is_resolved else cfg.resolve(dim)
    cfg._validate(dim)
    d = cfg.trace_cap / dim
    a = np.zeros((dim, dim))
    np.fill_diagonal(a, d)
    for i in range(dim - 1):
        a[i, i + 1] = -cfg.epsilon
        a[i + 1, i] = -cfg.epsilon
    # land the exactly rounded trace on the cap: coarse correction on the
    # last entry, then an ulp walk (terminates because the walk's step is
    # no larger than the cap's rounding window)
    last = dim - 1
    a[last, last] += cfg.trace_cap - math.fsum(np.diag(a))
    for _ in range(300):
        t = math.fsum(np.diag(a))
        if t == cfg.trace_cap:
            break
        a[last, last] = np.nextafter(
            a[last, last], np.inf if t < cfg.trace_cap else -np.inf)
    return validate_graph_metric(SymmetricMatrix(a))


def _path_edges(dim: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i + 1) for i in range(dim - 1))


def initial_state(ctx: ObjectiveContext, cfg: OptimizerConfig,
                  objective: ConvexObjective | None = None) -> OptimizerState:
    """State at M^0 with aligned scalars and Q(M^0) as the first trace entry."""
    dim = ctx.num_features
    cfg = cfg if cfg.is_resolved else cfg.resolve(dim)
    obj = objective if objective is not None else GLRObjective(ctx)
    g = init_metric(cfg, dim)
    cert = g.certificate
    pair = eigen.EigenPair(value=cert.lambda_min, vector=cert.eigvec,
                           residual=0.0, iterations=0)
    return OptimizerState(metric=g, scalars=alignment_scalars(g), eigpair=pair,
                          objective_trace=(obj.value(g.matrix),), iteration=0,
                          protected_edges=_path_edges(dim))


def _solve_smallest_pair(matrix: SymmetricMatrix,
                         warm: np.ndarray | None) -> eigen.EigenPair:
    try:
        return eigen.smallest_eigenpair_lobpcg(matrix, warm_start=warm,
                                               tol=_EIG_TOL)
    except eigen.LobpcgNonConvergence:
        log.debug("LOBPCG did not converge; falling back to dense solve")
        return eigen.smallest_eigenpair_dense(matrix)


def _certify_matrix(matrix: SymmetricMatrix, warm: np.ndarray | None
                    ) -> tuple[GraphMetric, eigen.EigenPair]:
    """Fresh certificate for ``matrix``: warm LOBPCG, dense as backstop.

    The dense retry also covers eigenvectors whose sub-precision entries
    come out more negative than the iterative solver's accuracy.
    """
    pair = _solve_smallest_pair(matrix, warm)
    v = eigen.clamp_positive(pair.vector)
    if v is None:
        pair = eigen.smallest_eigenpair_dense(matrix)
        v = eigen.clamp_positive(pair.vector)
    if v is None or pair.value <= 0:
        raise CertificationError(
            f"iterate is not certifiable (lambda_min={pair.value:.3e}, "
            f"min eigvec entry={float(np.min(pair.vector)):.3e}); the "
            f"iterate left the graph-metric set")
    pair = replace(pair, vector=v)
    metric = GraphMetric(matrix=matrix,
                         certificate=Certificate(lambda_min=pair.value,
                                                 eigvec=v))
    return metric, pair


# Eigenvector entries below this fraction of the largest entry cannot carry
# alignment at 1e-9 margins in double precision; the scalars floor them.
_SCALAR_FLOOR = 1e-6


def _conditioned_scalars(metric: GraphMetric, rho: float
                         ) -> GershgorinScalars | None:
    """Alignment scalars with a floor on tiny eigenvector entries.

    Exactly s = 1/v when the eigenvector is well resolved.  Entries below
    eta * max(v) are lifted before inverting, largest eta first, so the
    scalars stay numerically representable; any positive scalars keep the
    Gershgorin PD guarantee, lifting only relaxes tightness on coordinates
    that double precision cannot resolve anyway.  Returns the first choice
    under which the incumbent still satisfies every scaled constraint, or
    None if none verifiably does.
    """
    v = metric.certificate.eigvec
    vmax = float(np.max(v))
    for eta in (_SCALAR_FLOOR, 1e-9, 0.0):
        scalars = GershgorinScalars(1.0 / np.maximum(v, eta * vmax))
        left = scaled_left_ends(metric.matrix, scalars)
        if float(np.min(left)) >= rho - _FEAS_SLACK:
            return scalars
    return None


def update_scalars(state: OptimizerState, rho: float = 0.0) -> OptimizerState:
    """Refresh the eigenpair (warm-started LOBPCG) and set s = 1 / v.

    Asserts the incumbent stays feasible under the new scalars: all scaled
    disc left-ends >= rho - 1e-9.  When eigenvector entries sit below
    double precision's reach (relative 1e-6), computed left-ends are too
    noisy to verify that margin even though it holds; the scalars then fall
    back to the floored form and the true eigenvalue is dense-verified
    against rho instead.
    """
    matrix = state.metric.matrix
    metric, pair = _certify_matrix(matrix, state.eigpair.vector)
    scalars = _conditioned_scalars(metric, rho)
    if scalars is None:
        if matrix.dim <= 500:
            dense = eigen.smallest_eigenpair_dense(matrix)
            v = eigen.clamp_positive(dense.vector)
            if v is not None:
                pair = replace(dense, vector=v)
                metric = GraphMetric(matrix=matrix,
                                     certificate=Certificate(
                                         lambda_min=pair.value, eigvec=v))
                scalars = _conditioned_scalars(metric, rho)
        if scalars is None:
            lam = pair.value
            if lam < rho - _FEAS_SLACK:
                raise CertificationError(
                    f"incumbent left the feasible region: lambda_min "
                    f"{lam:.6e} < rho {rho:.6e}")
            log.debug("scaled left-ends unverifiable at rho margins "
                      "(eigenvector entries below relative %.0e); using "
                      "floored scalars, lambda_min %.6e >= rho",
                      _SCALAR_FLOOR, lam)
            vec = metric.certificate.eigvec
            scalars = GershgorinScalars(
                1.0 / np.maximum(vec, _SCALAR_FLOOR * float(np.max(vec))))
    return replace(state, metric=metric, scalars=scalars, eigpair=pair)


def _step_size(phi0: float, slope: float, evaluate, rule: str,
               fw_iter: int) -> tuple[float, float]:
    """Step toward the LP vertex: backtracking Armijo or diminishing 2/(k+2)."""
    if rule == "diminishing":
        gamma = 2.0 / (fw_iter + 2.0)
        return gamma, evaluate(gamma)
    gamma = 1.0
    while gamma >= _MIN_STEP:
        phi = evaluate(gamma)
        if phi <= phi0 + _ARMIJO_C * gamma * slope:
            return gamma, phi
        gamma *= 0.5
    return 0.0, phi0


def diagonal_step(state: OptimizerState, ctx: ObjectiveContext,
                  cfg: OptimizerConfig,
                  objective: ConvexObjective | None = None) -> OptimizerState:
    """Frank-Wolfe over the diagonal under the current scalars.

    Feasible set: m_ii >= s_i * sum_{j != i} |m_ij| / s_j + rho per row and
    trace <= trace_cap.  The LP vertex is closed-form; iterations stop when
    the duality gap drops below obj_rel_tol * max(1, |Q|).
    """
    cfg = cfg if cfg.is_resolved else cfg.resolve(state.metric.dim)
    obj = objective if objective is not None else GLRObjective(ctx)
    matrix = state.metric.matrix
    lb = scaled_radii(matrix, state.scalars) + cfg.rho
    x = matrix.diagonal()
    current = matrix
    q = obj.value(current)
    gap = math.nan
    deficit = float(np.sum(lb)) - cfg.trace_cap
    if deficit > 1e-3 * max(1.0, cfg.trace_cap):
        raise SubproblemInfeasibleError(
            f"diagonal LP infeasible: sum of lower bounds exceeds trace_cap "
            f"{cfg.trace_cap:.6g} by {deficit:.3e}; check rho / trace_cap")
    if deficit > lp.FEASIBILITY_TOL * max(1.0, cfg.trace_cap):
        # tiny overshoot comes from floored-scalar bound erosion at the
        # lambda_min = rho floor, not from misconfiguration
        log.warning("diagonal step skipped: scaled lower bounds overshoot "
                    "the trace cap by %.3e (incumbent at the rho floor)",
                    deficit)
        return replace(state,
                       objective_trace=state.objective_trace + (q,),
                       fw_gap=0.0)
    for it in range(cfg.fw_max_iters):
        g = obj.grad_diag(current)
        sol = lp.solve_diagonal_lp(g, lb, cfg.trace_cap)
        if sol.status != lp.OPTIMAL:
            raise SubproblemInfeasibleError(
                f"diagonal LP {sol.status}: sum of lower bounds "
                f"{float(np.sum(lb)):.6g} vs trace_cap {cfg.trace_cap:.6g}; "
                f"check rho / trace_cap")
        direction = sol.point - x
        gap = float(-(g @ direction))
        if gap <= cfg.obj_rel_tol * max(1.0, abs(q)):
            break
        slope = float(g @ direction)

        def evaluate(gamma: float) -> float:
            return obj.value(matrix.with_diagonal(x + gamma * direction))

        gamma, phi = _step_size(q, slope, evaluate, cfg.fw_step_rule, it)
        if gamma == 0.0:
            break
        x = x + gamma * direction
        current = matrix.with_diagonal(x)
        q = phi
    metric, pair = _certify_matrix(current, state.eigpair.vector)
    return replace(state, metric=metric, eigpair=pair,
                   objective_trace=state.objective_trace + (q,), fw_gap=gap)


def _max_spanning_tree(matrix: SymmetricMatrix, floor: float
                       ) -> tuple[tuple[int, int], ...] | None:
    """Maximum-weight spanning tree over edges with |m_ij| >= floor (Prim).

    Returns None when those edges do not span the graph.
    """
    k = matrix.dim
    w = np.abs(matrix.entries).copy()
    np.fill_diagonal(w, 0.0)
    w[w < floor] = 0.0
    in_tree = np.zeros(k, dtype=bool)
    in_tree[0] = True
    edges: list[tuple[int, int]] = []
    for _ in range(k - 1):
        rows = np.nonzero(in_tree)[0]
        sub = w[np.ix_(rows, ~in_tree)]
        if sub.size == 0 or float(np.max(sub)) <= 0.0:
            return None
        flat = int(np.argmax(sub))
        i_loc, j_loc = divmod(flat, sub.shape[1])
        i = int(rows[i_loc])
        j = int(np.nonzero(~in_tree)[0][j_loc])
        in_tree[j] = True
        edges.append((min(i, j), max(i, j)))
    return tuple(sorted(edges))


def offdiag_step(state: OptimizerState, ctx: ObjectiveContext,
                 cfg: OptimizerConfig, col: int,
                 objective: ConvexObjective | None = None) -> OptimizerState:
    """Frank-Wolfe over column ``col``'s off-diagonals (symmetric tying).

    Feasible set: every scaled Gershgorin row constraint written in the
    column variables, all variables <= 0, and magnitude floors epsilon on
    the anchor entry zeta (largest magnitude in the previous column, lowest
    row on ties) plus the protected spanning edges in this column.  The
    spanning-edge floors keep the whole graph connected across block
    updates; the per-column zeta floor alone only guards this column.
    Infeasible subproblems skip the column and leave the state unchanged.
    """
    cfg = cfg if cfg.is_resolved else cfg.resolve(state.metric.dim)
    obj = objective if objective is not None else GLRObjective(ctx)
    matrix = state.metric.matrix
    k = matrix.dim
    if not 0 <= col < k:
        raise IndexError(f"column {col} out of range for dim {k}")
    rows = [r for r in range(k) if r != col]
    a = matrix.entries
    s = state.scalars.values
    x0 = a[rows, col].copy()

    zeta_local = int(np.argmax(np.abs(x0)))
    tree = state.protected_edges or _max_spanning_tree(matrix, cfg.epsilon) or ()
    pinned = {idx for idx, r in enumerate(rows)
              if (min(r, col), max(r, col)) in tree}
    pinned.add(zeta_local)

    # row r's budget for |m_r,col|, by direct summation (no cancellation):
    # u_r = s_col * ((a_rr - rho)/s_r - sum_{j not in {r, col}} |a_rj|/s_j)
    abs_a = np.abs(a)
    ratio_rows = abs_a[rows] / s[None, :]  # |a_rj| / s_j
    other_sum = (ratio_rows.sum(axis=1) - ratio_rows[np.arange(k - 1), rows]
                 - ratio_rows[:, col])
    upper_mag = s[col] * ((a[rows, rows] - cfg.rho) / s[rows] - other_sum)
    coupling_budget = (a[col, col] - cfg.rho) / s[col]
    lower = -np.maximum(upper_mag, 0.0)
    upper = np.zeros(k - 1)
    for idx in pinned:
        upper[idx] = -cfg.epsilon

    coupling_coeffs = 1.0 / s[rows]
    if (np.any(lower > upper) or coupling_budget < 0
            or float(coupling_coeffs @ np.maximum(-np.clip(x0, lower, upper),
                                                  0.0))
            > coupling_budget * (1.0 + 1e-9) + 1e-15):
        log.warning("off-diagonal step on column %d skipped: the epsilon "
                    "floor or coupling budget excludes the incumbent "
                    "(lambda_min is pressing the rho floor)", col)
        return state
    x = np.clip(x0, lower, upper)
    q0 = obj.value(matrix)
    current = matrix.with_offdiag_column(col, x) if np.any(x != x0) else matrix
    q = obj.value(current)

    for it in range(cfg.fw_max_iters):
        g = obj.grad_offdiag_col(current, col)
        sol = lp.solve_box_knapsack_lp(g, lower, upper, coupling_coeffs,
                                       coupling_budget)
        if sol.status != lp.OPTIMAL:
            log.warning("off-diagonal step on column %d skipped: LP %s",
                        col, sol.status)
            return state
        direction = sol.point - x
        gap = float(-(g @ direction))
        if gap <= cfg.obj_rel_tol * max(1.0, abs(q)):
            break
        slope = float(g @ direction)

        def evaluate(gamma: float) -> float:
            return obj.value(matrix.with_offdiag_column(col, x + gamma * direction))

        gamma, phi = _step_size(q, slope, evaluate, cfg.fw_step_rule, it)
        if gamma == 0.0:
            break
        x = x + gamma * direction
        current = matrix.with_offdiag_column(col, x)
        q = phi

    if q > q0:
        # the feasibility clamp on the start cost more than the step gained
        log.warning("off-diagonal step on column %d made no progress; "
                    "keeping the incumbent", col)
        return replace(state,
                       objective_trace=state.objective_trace + (q0,))
    if not is_connected(current):
        raise CertificationError(
            "off-diagonal step disconnected the graph despite edge floors")
    metric, pair = _certify_matrix(current, state.eigpair.vector)
    tree_after = _max_spanning_tree(current, cfg.epsilon)
    if tree_after is None:
        tree_after = state.protected_edges
    return replace(state, metric=metric, eigpair=pair,
                   objective_trace=state.objective_trace + (q,),
                   protected_edges=tree_after)


def learn_metric(ctx: ObjectiveContext, cfg: OptimizerConfig | None = None,
                 observer: Observer | None = None) -> LearnResult:
    """Full alternating optimization: returns the certified metric and trace.

    Loop: scalars -> diagonal Frank-Wolfe -> per-column scalar refresh and
    off-diagonal Frank-Wolfe, until the relative objective change over an
    outer iteration falls below obj_rel_tol or outer_max_iters is reached.
    """
    cfg = (cfg or OptimizerConfig()).resolve(ctx.num_features)
    obj = GLRObjective(ctx)
    state = initial_state(ctx, cfg, objective=obj)
    notify = observer or (lambda event, st: None)
    notify("init", state)

    converged = False
    outer = 0
    for outer in range(1, cfg.outer_max_iters + 1):
        q_start = state.objective_trace[-1]
        state = update_scalars(state, rho=cfg.rho)
        notify("scalars", state)
        state = diagonal_step(state, ctx, cfg, objective=obj)
        notify("diagonal", state)
        for _ in range(cfg.bcd_sweeps):
            for col in range(ctx.num_features):
                state = update_scalars(state, rho=cfg.rho)
                notify("scalars", state)
                state = offdiag_step(state, ctx, cfg, col, objective=obj)
                notify("offdiag", state)
        state = replace(state, iteration=outer)
        notify("outer", state)
        q_end = state.objective_trace[-1]
        log.info("outer=%d objective=%.10e lambda_min=%.6e trace=%.6e "
                 "fw_gap=%.3e", outer, q_end,
                 state.metric.certificate.lambda_min,
                 state.metric.matrix.trace(), state.fw_gap)
        if abs(q_end - q_start) <= cfg.obj_rel_tol * max(1.0, abs(q_start)):
            converged = True
            break
    return LearnResult(metric=state.metric,
                       objective_trace=list(state.objective_trace),
                       outer_iterations=outer, converged=converged)
