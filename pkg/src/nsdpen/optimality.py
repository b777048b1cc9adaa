"""First- and second-order optimality machinery.

Lagrangian derivatives, multiplier recovery from the penalty gradient
structure, the symmetrized complementarity product, the curvature correction
coming from the PSD cone (sigma-term), the perturbed critical subspace, and
the residual certificates built on them.
"""

from dataclasses import dataclass

import numpy as np

from . import matfun
from .errors import InvalidInputError
from .matfun import symmetrize
from .model import NsdpProblem, dG_adjoint, _vec


@dataclass(frozen=True)
class MultiplierPair:
    """Equality multiplier y and PSD matrix multiplier Z."""

    y: np.ndarray
    Z: np.ndarray


@dataclass
class OptimalityResiduals:
    """Scalar residuals certifying approximate first/second-order optimality."""

    stationarity: float
    feasibility_u: float
    complementarity: float
    second_order: float
    epsilon: float | None
    subspace_dim: int


def _check_y(prob: NsdpProblem, y) -> np.ndarray:
    if prob.m == 0:
        return np.zeros(0)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (prob.m,):
        raise InvalidInputError(f"y must have shape ({prob.m},), got {y.shape}")
    return y


def _check_Z(prob: NsdpProblem, Z) -> np.ndarray:
    if prob.d == 0:
        return np.zeros((0, 0))
    Z = np.asarray(Z, dtype=float)
    if Z.shape != (prob.d, prob.d):
        raise InvalidInputError(f"Z must have shape ({prob.d}, {prob.d}), got {Z.shape}")
    return symmetrize(Z)


def lagrangian_grad(prob: NsdpProblem, x, y, Z) -> np.ndarray:
    """grad f(x) - jac_g(x) y - adjoint(dG)(x) Z."""
    x = _vec(x, prob.n)
    y, Z = _check_y(prob, y), _check_Z(prob, Z)
    out = np.asarray(prob.grad_f(x), dtype=float).copy()
    if prob.m > 0:
        out -= np.asarray(prob.jac_g(x), dtype=float) @ y
    if prob.d > 0:
        out -= dG_adjoint(prob, x, Z)
    return out


def lagrangian_hess(prob: NsdpProblem, x, y, Z) -> np.ndarray:
    """hess f(x) - sum_j y_j hess g_j(x) - [<d2G(x,i,j), Z>]_ij."""
    x = _vec(x, prob.n)
    y, Z = _check_y(prob, y), _check_Z(prob, Z)
    H = symmetrize(np.asarray(prob.hess_f(x), dtype=float)).copy()
    if prob.m > 0:
        for j in range(prob.m):
            if y[j] != 0.0:
                H -= y[j] * symmetrize(np.asarray(prob.hess_g(x, j), dtype=float))
    if prob.d > 0:
        for i in range(prob.n):
            for j in range(i, prob.n):
                val = float(np.sum(np.asarray(prob.d2G(x, i, j), dtype=float) * Z))
                H[i, j] -= val
                if i != j:
                    H[j, i] -= val
    return symmetrize(H)


def recover_multipliers(prob: NsdpProblem, x, gamma: float) -> MultiplierPair:
    """Multipliers y = -gamma*g(x) and Z = gamma*[-G(x)]+^3 (PSD by construction)."""
    if not gamma > 0:
        raise InvalidInputError("gamma must be positive")
    x = _vec(x, prob.n)
    y = -gamma * np.asarray(prob.g(x), dtype=float) if prob.m > 0 else np.zeros(0)
    if prob.d > 0:
        Z = gamma * matfun.q_cube(-np.asarray(prob.G(x), dtype=float))
    else:
        Z = np.zeros((0, 0))
    return MultiplierPair(y=y, Z=Z)


def jordan_complementarity(prob: NsdpProblem, x, Z) -> tuple[np.ndarray, float]:
    """The symmetrized product G(x) o Z = (GZ + ZG)/2 and its Frobenius norm."""
    x = _vec(x, prob.n)
    Z = _check_Z(prob, Z)
    if prob.d == 0:
        return np.zeros((0, 0)), 0.0
    Gx = symmetrize(np.asarray(prob.G(x), dtype=float))
    prod = 0.5 * (Gx @ Z + Z @ Gx)
    return prod, float(np.linalg.norm(prod))


def sigma_term(prob: NsdpProblem, x, Z) -> np.ndarray:
    """Curvature correction [2 <Z, dG_i G(x)^+ dG_j>]_ij with a spectral pseudo-inverse.

    Eigenvalues of G(x) with magnitude at most the classification tolerance
    are zeroed rather than inverted.
    """
    x = _vec(x, prob.n)
    Z = _check_Z(prob, Z)
    if prob.d == 0:
        return np.zeros((prob.n, prob.n))
    dec = matfun.eig_sym(np.asarray(prob.G(x), dtype=float))
    tol = matfun.default_zero_tol(dec)
    inv = np.zeros(prob.d)
    keep = np.abs(dec.values) > tol
    inv[keep] = 1.0 / dec.values[keep]
    P = dec.vectors
    pinv = (P * inv) @ P.T
    Gi = [symmetrize(np.asarray(prob.dG(x, i), dtype=float)) for i in range(prob.n)]
    left = [Z @ Gi[i] @ pinv for i in range(prob.n)]
    S = np.zeros((prob.n, prob.n))
    for i in range(prob.n):
        for j in range(prob.n):
            S[i, j] = 2.0 * float(np.sum(left[i] * Gi[j]))
    return symmetrize(S)


def infeasibility_u(prob: NsdpProblem, x) -> float:
    """max(||g(x)||, ||[-G(x)]+||_F): zero exactly on the feasible set."""
    x = _vec(x, prob.n)
    gnorm = float(np.linalg.norm(np.asarray(prob.g(x), dtype=float))) if prob.m > 0 else 0.0
    if prob.d > 0:
        pnorm = float(np.linalg.norm(matfun.proj_psd(-np.asarray(prob.G(x), dtype=float))))
    else:
        pnorm = 0.0
    return max(gnorm, pnorm)


def critical_subspace_basis(prob: NsdpProblem, x, b_count: int) -> np.ndarray:
    """Orthonormal basis of the perturbed critical subspace at x.

    The subspace consists of directions h with jac_g(x)^T h = 0 whose image
    dG(x)h compresses to zero on the span U of the eigenvectors belonging to
    the ``b_count`` smallest eigenvalues of G(x).  The caller supplies
    ``b_count`` from the reference point it trusts (a known solution or the
    final iterate).  Returns an n x s matrix; s = 0 yields an empty basis.
    """
    x = _vec(x, prob.n)
    if b_count < 0 or b_count > prob.d:
        raise InvalidInputError(f"b_count must lie in [0, {prob.d}]")
    rows = []
    if prob.m > 0:
        rows.append(np.asarray(prob.jac_g(x), dtype=float).T)
    if b_count > 0:
        dec = matfun.eig_sym(np.asarray(prob.G(x), dtype=float))
        U = dec.vectors[:, prob.d - b_count:]
        comp = np.stack([U.T @ symmetrize(np.asarray(prob.dG(x, i), dtype=float)) @ U for i in range(prob.n)])
        for p in range(b_count):
            for q in range(p, b_count):
                rows.append(comp[:, p, q][None, :])
    if not rows:
        return np.eye(prob.n)
    A = np.vstack(rows)
    _, s, vt = np.linalg.svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(prob.n)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return vt[rank:].T.copy()


def second_order_residual(prob: NsdpProblem, x, y, Z, basis: np.ndarray) -> float:
    """max(0, -lambda_min) of the Lagrangian Hessian plus sigma-term reduced to the basis.

    An empty basis makes the bound vacuous and the residual 0.
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != prob.n:
        raise InvalidInputError(f"basis must be {prob.n} x s")
    if basis.shape[1] == 0:
        return 0.0
    M = lagrangian_hess(prob, x, y, Z) + sigma_term(prob, x, Z)
    R = symmetrize(basis.T @ M @ basis)
    lam_min = float(np.linalg.eigvalsh(R)[0])
    return max(0.0, -lam_min)


def evaluate_residuals(prob: NsdpProblem, x, gamma: float, b_count: int,
                       epsilon: float | None = None) -> tuple[OptimalityResiduals, MultiplierPair]:
    """Recover multipliers at x and bundle all optimality residuals."""
    mult = recover_multipliers(prob, x, gamma)
    basis = critical_subspace_basis(prob, x, b_count)
    _, comp = jordan_complementarity(prob, x, mult.Z)
    res = OptimalityResiduals(
        stationarity=float(np.linalg.norm(lagrangian_grad(prob, x, mult.y, mult.Z))),
        feasibility_u=infeasibility_u(prob, x),
        complementarity=comp,
        second_order=second_order_residual(prob, x, mult.y, mult.Z, basis),
        epsilon=epsilon,
        subspace_dim=int(basis.shape[1]),
    )
    return res, mult
