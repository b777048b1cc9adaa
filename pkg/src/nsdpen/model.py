"""Problem abstraction for nonlinear SDPs.

A problem bundles twice-differentiable hooks for the objective f, equality
constraints g (optional, m = 0 when absent) and a symmetric-matrix constraint
G (optional, d = 0 when absent), together with the linear operators built on
the partial derivatives of G.  Hooks must be reentrant and side-effect-free.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .matfun import symmetrize

FD_STEP_SECOND_ORDER = 1e-5


def _vec(x, n: int, name: str = "x") -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (n,):
        raise InvalidInputError(f"{name} must have shape ({n},), got {x.shape}")
    return x


def _fd_steps(x: np.ndarray, step: float) -> np.ndarray:
    return step * (1.0 + np.abs(x))


@dataclass
class NsdpProblem:
    """Problem data: minimize f(x) subject to g(x) = 0 and G(x) PSD.

    Jacobian convention: ``jac_g(x)`` is n x m with column j equal to the
    gradient of g_j.  ``dG(x, i)`` is the partial derivative of G in x_i and
    ``d2G(x, i, j)`` the second partial; both return symmetric d x d arrays.

    Second-derivative hooks may be omitted by passing
    ``fd_second_order=True``; they are then synthesized by central
    differences of the first-derivative hooks with per-coordinate step
    ``1e-5 * (1 + |x_i|)``.
    """

    name: str
    n: int
    m: int
    d: int
    start_point: np.ndarray
    f: Callable[[np.ndarray], float]
    grad_f: Callable[[np.ndarray], np.ndarray]
    hess_f: Callable[[np.ndarray], np.ndarray] | None = None
    g: Callable[[np.ndarray], np.ndarray] | None = None
    jac_g: Callable[[np.ndarray], np.ndarray] | None = None
    hess_g: Callable[[np.ndarray, int], np.ndarray] | None = None
    G: Callable[[np.ndarray], np.ndarray] | None = None
    dG: Callable[[np.ndarray, int], np.ndarray] | None = None
    d2G: Callable[[np.ndarray, int, int], np.ndarray] | None = None
    fd_second_order: bool = field(default=False)

    def __post_init__(self):
        self.start_point = _vec(self.start_point, self.n, "start_point")
        if self.m > 0 and (self.g is None or self.jac_g is None):
            raise InvalidInputError(f"problem {self.name!r}: m > 0 requires g and jac_g hooks")
        if self.d > 0 and (self.G is None or self.dG is None):
            raise InvalidInputError(f"problem {self.name!r}: d > 0 requires G and dG hooks")
        if self.fd_second_order:
            if self.hess_f is None:
                self.hess_f = self._fd_hess_f
            if self.m > 0 and self.hess_g is None:
                self.hess_g = self._fd_hess_g
            if self.d > 0 and self.d2G is None:
                self.d2G = self._fd_d2G

    # synthesized second derivatives (central differences of first-derivative hooks)
    def _fd_hess_f(self, x):
        x = np.asarray(x, dtype=float)
        h = _fd_steps(x, FD_STEP_SECOND_ORDER)
        H = np.zeros((self.n, self.n))
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = h[i]
            H[:, i] = (self.grad_f(x + e) - self.grad_f(x - e)) / (2 * h[i])
        return symmetrize(H)

    def _fd_hess_g(self, x, j):
        x = np.asarray(x, dtype=float)
        h = _fd_steps(x, FD_STEP_SECOND_ORDER)
        H = np.zeros((self.n, self.n))
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = h[i]
            H[:, i] = (self.jac_g(x + e)[:, j] - self.jac_g(x - e)[:, j]) / (2 * h[i])
        return symmetrize(H)

    def _fd_d2G(self, x, i, j):
        x = np.asarray(x, dtype=float)
        h = _fd_steps(x, FD_STEP_SECOND_ORDER)
        ej = np.zeros(self.n)
        ej[j] = h[j]
        Dij = (np.asarray(self.dG(x + ej, i)) - np.asarray(self.dG(x - ej, i))) / (2 * h[j])
        ei = np.zeros(self.n)
        ei[i] = h[i]
        Dji = (np.asarray(self.dG(x + ei, j)) - np.asarray(self.dG(x - ei, j))) / (2 * h[i])
        return symmetrize(0.5 * (Dij + Dji))


def dG_apply(prob: NsdpProblem, x, h) -> np.ndarray:
    """Directional derivative of G at x along h: sum_i h_i * dG(x, i)."""
    x = _vec(x, prob.n)
    h = _vec(h, prob.n, "h")
    out = np.zeros((prob.d, prob.d))
    for i in range(prob.n):
        if h[i] != 0.0:
            out += h[i] * np.asarray(prob.dG(x, i), dtype=float)
    return symmetrize(out)


def dG_adjoint(prob: NsdpProblem, x, Z) -> np.ndarray:
    """Adjoint of the directional derivative: component i is <dG(x, i), Z>."""
    x = _vec(x, prob.n)
    Z = np.asarray(Z, dtype=float)
    if Z.shape != (prob.d, prob.d):
        raise InvalidInputError(f"Z must have shape ({prob.d}, {prob.d}), got {Z.shape}")
    out = np.zeros(prob.n)
    for i in range(prob.n):
        out[i] = float(np.sum(np.asarray(prob.dG(x, i), dtype=float) * Z))
    return out


@dataclass
class DerivativeAuditReport:
    """Per-hook relative errors of analytic derivatives against central differences."""

    errors: dict
    step: float
    first_order_threshold: float
    second_order_threshold: float
    passed: bool
    failures: list


def _rel_err(analytic: np.ndarray, fd: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=float)
    fd = np.asarray(fd, dtype=float)
    return float(np.linalg.norm((analytic - fd).ravel()) / (1.0 + np.linalg.norm(analytic.ravel())))


def audit_derivatives(prob: NsdpProblem, x, step: float = 1e-6) -> DerivativeAuditReport:
    """Check every derivative hook against a central difference of its neighbor.

    First derivatives are compared at relative threshold 1e-6, second
    derivatives at 1e-4.  A hook that raises or returns non-finite values is
    recorded with error ``inf``; the audit still completes.
    """
    if not step > 0:
        raise InvalidInputError("step must be positive")
    x = _vec(x, prob.n)
    h = _fd_steps(x, step)
    thr1, thr2 = 1e-6, 1e-4
    errors: dict[str, float] = {}

    def _basis(i):
        e = np.zeros(prob.n)
        e[i] = h[i]
        return e

    def _run(label, fn):
        try:
            err = fn()
            if not np.isfinite(err):
                err = float("inf")
        except Exception:
            err = float("inf")
        errors[label] = err

    def _check_grad_f():
        fd = np.array([(prob.f(x + _basis(i)) - prob.f(x - _basis(i))) / (2 * h[i]) for i in range(prob.n)])
        return _rel_err(prob.grad_f(x), fd)

    _run("grad_f", _check_grad_f)

    if prob.hess_f is not None:
        def _check_hess_f():
            fd = np.column_stack([(prob.grad_f(x + _basis(i)) - prob.grad_f(x - _basis(i))) / (2 * h[i]) for i in range(prob.n)])
            return _rel_err(prob.hess_f(x), symmetrize(fd))

        _run("hess_f", _check_hess_f)

    if prob.m > 0:
        def _check_jac_g():
            fd = np.column_stack([(prob.g(x + _basis(i)) - prob.g(x - _basis(i))) / (2 * h[i]) for i in range(prob.n)]).T
            return _rel_err(prob.jac_g(x), fd)

        _run("jac_g", _check_jac_g)

        if prob.hess_g is not None:
            def _check_hess_g():
                worst = 0.0
                for j in range(prob.m):
                    fd = np.column_stack([(prob.jac_g(x + _basis(i))[:, j] - prob.jac_g(x - _basis(i))[:, j]) / (2 * h[i]) for i in range(prob.n)])
                    worst = max(worst, _rel_err(prob.hess_g(x, j), symmetrize(fd)))
                return worst

            _run("hess_g", _check_hess_g)

    if prob.d > 0:
        def _check_dG():
            worst = 0.0
            for i in range(prob.n):
                fd = (np.asarray(prob.G(x + _basis(i)), dtype=float) - np.asarray(prob.G(x - _basis(i)), dtype=float)) / (2 * h[i])
                worst = max(worst, _rel_err(prob.dG(x, i), fd))
            return worst

        _run("dG", _check_dG)

        if prob.d2G is not None:
            def _check_d2G():
                worst = 0.0
                for i in range(prob.n):
                    for j in range(prob.n):
                        fd = (np.asarray(prob.dG(x + _basis(j), i), dtype=float) - np.asarray(prob.dG(x - _basis(j), i), dtype=float)) / (2 * h[j])
                        worst = max(worst, _rel_err(prob.d2G(x, i, j), fd))
                return worst

            _run("d2G", _check_d2G)

    thresholds = {"grad_f": thr1, "jac_g": thr1, "dG": thr1, "hess_f": thr2, "hess_g": thr2, "d2G": thr2}
    failures = [k for k, v in errors.items() if v > thresholds[k]]
    return DerivativeAuditReport(
        errors=errors,
        step=step,
        first_order_threshold=thr1,
        second_order_threshold=thr2,
        passed=not failures,
        failures=failures,
    )
