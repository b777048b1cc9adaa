"""Outer penalty method.

Each outer iteration minimizes the smooth penalty with the current weight
gamma down to certificate tolerance delta (gradient norm and Hessian
eigenvalue bound), recovers multipliers from the penalty gradient structure,
records all optimality residuals, and then applies the warm-start and
gamma-update rules:

* the next start is the new iterate if its penalty value does not exceed
  f(x0), otherwise the feasible start x0;
* gamma is kept when k = 0 or the infeasibility fell by factor eta,
  multiplied by theta otherwise;
* delta decays geometrically.

The run stops once infeasibility and delta are below their tolerances, at
the iteration cap, or on inner-solver failure / gamma blow-up.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import optimality, penalty, trustregion
from .errors import InvalidInputError, StartNotFeasibleError
from .matfun import default_zero_tol, eig_sym
from .model import NsdpProblem

FEAS_OPT_REACHED = "FeasOptReached"
MAX_OUTER = "MaxOuter"
INNER_FAILURE = "InnerFailure"

BRANCH_ACCEPT = "accept"
BRANCH_RESET = "reset"


@dataclass
class PenaltyConfig:
    eta: float = 0.5
    theta: float = 10.0
    gamma0: float = 1.0
    delta0: float = 0.1
    beta: float = 0.5
    tol_feas: float = 1e-8
    tol_opt: float = 1e-6
    max_outer: int = 60
    feas_check_tol: float = 1e-8
    gamma_cap: float = 1e14
    tr: trustregion.TrConfig = field(default_factory=trustregion.TrConfig)

    def validate(self):
        if not (0 < self.eta < 1):
            raise InvalidInputError("eta must lie in (0, 1)")
        if not self.theta > 1:
            raise InvalidInputError("theta must exceed 1")
        if not self.gamma0 > 0:
            raise InvalidInputError("gamma0 must be positive")
        if not (0 < self.delta0 < 1):
            raise InvalidInputError("delta0 must lie in (0, 1)")
        if not (0 < self.beta < 1):
            raise InvalidInputError("beta must lie in (0, 1)")
        if self.tol_feas < 0 or self.tol_opt < 0:
            raise InvalidInputError("tolerances must be nonnegative")
        if self.max_outer < 1:
            raise InvalidInputError("max_outer must be at least 1")
        return self


@dataclass
class IterateRecord:
    k: int
    gamma: float
    delta: float
    u: float
    stationarity: float
    complementarity: float
    second_order: float | None
    epsilon: float
    subspace_dim: int | None
    f_value: float
    script_F_value: float
    script_F_at_start: float
    xhat_branch: str
    inner_iterations: int
    x: np.ndarray
    y: np.ndarray
    Z: np.ndarray


@dataclass
class SolveReport:
    problem: str
    config: PenaltyConfig
    iterates: list
    final_status: str
    b_count: int
    detail: str = ""
    wall_time_sec: float = 0.0

    @property
    def final(self) -> IterateRecord | None:
        return self.iterates[-1] if self.iterates else None


def next_gamma(k: int, gamma: float, u_next: float, u_prev: float, eta: float, theta: float) -> float:
    """Penalty-weight update: hold when k = 0 or u_next <= eta * u_prev, else multiply.

    With u_prev = 0 the comparison passes only when u_next is exactly 0.
    """
    if k == 0 or u_next <= eta * u_prev:
        return gamma
    return theta * gamma


def next_xhat(x_next: np.ndarray, script_F_next: float, f0: float, x0: np.ndarray) -> tuple[np.ndarray, str]:
    """Warm-start update: keep the new iterate unless its penalty value exceeds f(x0)."""
    if script_F_next <= f0:
        return x_next, BRANCH_ACCEPT
    return x0, BRANCH_RESET


def estimate_b_count(prob: NsdpProblem, x: np.ndarray, u: float) -> int:
    """Rank of the near-null eigenspace of G at an approximate limit point.

    Counts eigenvalues below max(10 * u, classification tolerance); an active
    constraint approached from the infeasible side leaves eigenvalues of
    magnitude about u, which the plain classification tolerance would miss.
    """
    if prob.d == 0:
        return 0
    dec = eig_sym(np.asarray(prob.G(x), dtype=float))
    cut = max(10.0 * u, default_zero_tol(dec))
    return int(np.sum(dec.values <= cut))


def solve(prob: NsdpProblem, config: PenaltyConfig | None = None,
          b_count: int | None = None, sink=None) -> SolveReport:
    """Run the outer penalty method on a problem with a feasible start.

    ``b_count`` is the trusted dimension of the null eigenspace of G at the
    limit, used for the second-order certificates; when omitted it is
    estimated from the final iterate and the certificates are filled in
    after the run.  ``sink`` receives each IterateRecord once its residuals
    are complete.
    """
    cfg = (config or PenaltyConfig()).validate()
    t0 = time.perf_counter()
    x0 = np.atleast_1d(np.asarray(prob.start_point, dtype=float))
    u0 = optimality.infeasibility_u(prob, x0)
    if u0 > cfg.feas_check_tol:
        raise StartNotFeasibleError(
            f"start point of {prob.name!r} has infeasibility {u0:.3e} > {cfg.feas_check_tol:.3e}")
    f0 = float(prob.f(x0))

    records: list[IterateRecord] = []
    xhat = x0
    gamma = cfg.gamma0
    delta = cfg.delta0
    u_prev = u0
    status = MAX_OUTER
    detail = ""
    inline_certs = b_count is not None

    for k in range(cfg.max_outer):
        params = penalty.special_params("script_F", gamma)
        start_value = penalty.penalty_value(prob, xhat, params)
        res = trustregion.tr_minimize(
            lambda z: penalty.penalty_value(prob, z, params),
            lambda z: penalty.penalty_grad(prob, z, params),
            lambda z: penalty.penalty_hess(prob, z, params),
            xhat, delta, cfg.tr)
        x_next = res.x
        if res.status != trustregion.CONVERGED:
            status = INNER_FAILURE
            detail = f"inner solver returned {res.status} at outer iteration {k}"
            break

        mult = optimality.recover_multipliers(prob, x_next, gamma)
        u_next = optimality.infeasibility_u(prob, x_next)
        _, comp = optimality.jordan_complementarity(prob, x_next, mult.Z)
        rec = IterateRecord(
            k=k + 1,
            gamma=gamma,
            delta=delta,
            u=u_next,
            stationarity=res.grad_norm,
            complementarity=comp,
            second_order=None,
            epsilon=delta,
            subspace_dim=None,
            f_value=float(prob.f(x_next)),
            script_F_value=res.value,
            script_F_at_start=start_value,
            xhat_branch="",
            inner_iterations=res.iterations,
            x=x_next.copy(),
            y=mult.y.copy(),
            Z=mult.Z.copy(),
        )
        if inline_certs:
            basis = optimality.critical_subspace_basis(prob, x_next, b_count)
            rec.second_order = optimality.second_order_residual(prob, x_next, mult.y, mult.Z, basis)
            rec.subspace_dim = int(basis.shape[1])
        xhat, branch = next_xhat(x_next, res.value, f0, x0)
        rec.xhat_branch = branch
        records.append(rec)
        if inline_certs and sink is not None:
            sink(rec)

        if u_next <= cfg.tol_feas and delta <= cfg.tol_opt:
            status = FEAS_OPT_REACHED
            break

        gamma_next = next_gamma(k, gamma, u_next, u_prev, cfg.eta, cfg.theta)
        if gamma_next > cfg.gamma_cap:
            status = INNER_FAILURE
            detail = f"penalty weight {gamma_next:.3e} exceeds cap {cfg.gamma_cap:.3e}"
            break
        gamma = gamma_next
        delta = cfg.beta * delta
        u_prev = u_next

    if b_count is None:
        if records:
            last = records[-1]
            b_count = estimate_b_count(prob, last.x, last.u)
        else:
            b_count = 0
        for rec in records:
            basis = optimality.critical_subspace_basis(prob, rec.x, b_count)
            rec.second_order = optimality.second_order_residual(prob, rec.x, rec.y, rec.Z, basis)
            rec.subspace_dim = int(basis.shape[1])
            if sink is not None:
                sink(rec)

    return SolveReport(
        problem=prob.name,
        config=replace(cfg),
        iterates=records,
        final_status=status,
        b_count=int(b_count),
        detail=detail,
        wall_time_sec=time.perf_counter() - t0,
    )
