"""Convex optimization of the normalized p-mean over divisible allocations.

The feasible set is a product of per-item probability simplices (each
item's column of x must sum to 1).  The solver runs projected gradient
descent with Armijo backtracking on the convex surrogate:

    goods, p < 0:   minimize sum_i v_i(x_i)^p        (v normalized)
    goods, p = 0:   minimize -sum_i log v_i(x_i)
    chores, p >= 1: minimize sum_i c_i(x_i)^p        (c normalized)

Starting from the uniform split x_ij = 1/n keeps every goods utility
positive, and monotone descent keeps it bounded away from zero.

Optimality is certified through the KKT conditions.  Setting the item
duals to the extreme gradient entry per column (max over agents for
goods, min for chores) makes stationarity hold exactly and the
nonnegativity duals kappa_ij >= 0 by construction, so the certificate
residual reduces to complementarity (kappa_ij * x_ij) plus primal
feasibility.  Convergence is declared on that residual, not on step
size, so certificates are meaningful.

Chores with a zero-cost (agent, chore) pair are handled by pre-assigning
each such chore entirely to one agent who does not mind it; those
columns get reward 0 and drop out of the optimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CHORES,
    GOODS,
    FractionalAllocation,
    Instance,
    normalize,
)
from .errors import ConvergenceError, DegenerateOptimum, UnsupportedRegime
from .market import ChoresEquilibrium, GoodsEquilibrium

_UTIL_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    kkt_tolerance: float = 1e-8
    max_iterations: int = 200000
    step: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1e-4

    def __post_init__(self):
        if self.kkt_tolerance <= 0:
            raise ValueError("kkt_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class KktCertificate:
    duals_items: np.ndarray
    duals_nonneg: np.ndarray
    stationarity_residual: float
    complementarity_residual: float

    @property
    def residual(self) -> float:
        return max(self.stationarity_residual, self.complementarity_residual)


def project_columns(y: np.ndarray) -> np.ndarray:
    """Euclidean projection of every column onto the unit simplex.

    Vectorized sort-based projection (equivalent to Condat's method for
    these sizes): per column find the threshold theta with
    sum max(y - theta, 0) = 1.
    """
    n, m = y.shape
    u = -np.sort(-y, axis=0)  # descending
    css = np.cumsum(u, axis=0) - 1.0
    idx = np.arange(1, n + 1)[:, None]
    cond = u - css / idx > 0
    rho = (n - 1) - np.argmax(cond[::-1, :], axis=0)
    theta = css[rho, np.arange(m)] / (rho + 1)
    return np.maximum(y - theta[None, :], 0.0)


def _objective_and_gradient(V: np.ndarray, x: np.ndarray, p: float, kind: str):
    u = np.einsum("ij,ij->i", V, x)
    if kind == GOODS:
        if np.any(u < _UTIL_FLOOR):
            return u, math.inf, None
        if p == 0:
            return u, float(-np.sum(np.log(u))), -V / u[:, None]
        return u, float(np.sum(u**p)), p * V * (u ** (p - 1))[:, None]
    # chores, p >= 1
    up = np.where(u > 0, u, 0.0)
    if p == 1:
        return u, float(np.sum(up)), V.copy()
    return u, float(np.sum(up**p)), p * V * (up ** (p - 1))[:, None]


def _duals_from_gradient(grad: np.ndarray, kind: str):
    """Item duals and kappa so that stationarity holds exactly.

    Goods (minimizing, gradient <= 0): the market prices satisfy
    p_j - kappa_ij = -grad_ij with kappa >= 0, so p_j = max_i(-grad_ij).
    Chores: r_j + kappa_ij = grad_ij, so r_j = min_i grad_ij.
    """
    if kind == GOODS:
        duals = np.max(-grad, axis=0)
        kappa = duals[None, :] + grad
    else:
        duals = np.min(grad, axis=0)
        kappa = grad - duals[None, :]
    return duals, np.maximum(kappa, 0.0)


def _certificate(V, x, p, kind) -> KktCertificate:
    u, _, grad = _objective_and_gradient(V, x, p, kind)
    if grad is None:
        return KktCertificate(
            duals_items=np.zeros(x.shape[1]),
            duals_nonneg=np.zeros_like(x),
            stationarity_residual=math.inf,
            complementarity_residual=math.inf,
        )
    duals, kappa = _duals_from_gradient(grad, kind)
    comp = float(np.max(kappa * x, initial=0.0))
    feas = float(np.max(np.abs(x.sum(axis=0) - 1.0), initial=0.0))
    return KktCertificate(
        duals_items=duals,
        duals_nonneg=kappa,
        stationarity_residual=feas,
        complementarity_residual=comp,
    )


_MEMBER_MARGIN = 5e-8  # half the market checker's 1e-7 membership tol
_HELD_TOL = 1e-9


def _market_residual(V, x, duals, kappa, kind) -> float:
    """Downstream-checker residual: held-item MBB/MRC ratio gap plus
    relative budget/earning slack.

    Complementarity (kappa * x) alone does not bound the relative ratio
    gap the market checkers measure, so convergence requires this too.
    """
    held = x > _HELD_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == GOODS:
            ratio = V / np.maximum(duals[None, :], 1e-300)
        else:
            ratio = duals[None, :] / np.maximum(V, 1e-300)
    best = np.max(ratio, axis=1)
    gap = (best[:, None] - ratio) / np.maximum(best[:, None], 1e-300)
    gap_res = float(np.max(gap[held], initial=0.0))
    money = np.einsum("ij,ij->i", x, np.broadcast_to(duals, x.shape))
    slack = np.einsum("ij,ij->i", x, kappa)
    money_res = float(np.max(np.abs(slack) / np.maximum(1.0, np.abs(money))))
    return max(gap_res, money_res)


_STALL_WINDOW = 100


def _curvature_bound(V, u, p, kind) -> float:
    """Largest Hessian eigenvalue bound of the surrogate at utilities u.

    The Hessian is a sum of rank-one terms g''(u_i) * v_i v_i^T, so
    max_i g''(u_i) * ||v_i||^2 bounds the spectral norm.
    """
    sq = np.sum(V * V, axis=1)
    uu = np.maximum(u, 1e-12)
    if kind == GOODS:
        if p == 0:
            return float(np.max(sq / uu**2))
        k = -p
        return float(np.max(k * (k + 1) * sq * uu ** (-(k + 2))))
    if p == 1:
        return 0.0
    if p < 2:
        # u^(p-2) blows up at zero cost; keep the step from vanishing
        uu = np.maximum(u, 1e-6)
    return float(np.max(p * (p - 1) * sq * uu ** (p - 2)))


def _pgd(V: np.ndarray, p: float, kind: str, config: SolverConfig):
    """Projected gradient descent over per-column simplices.

    Two phases.  Phase 1 is Armijo-backtracked descent on the surrogate.
    Near the optimum the per-step objective decrease drops below the
    float resolution of f, so Armijo can no longer certify progress and
    the residual plateaus around sqrt(machine epsilon).  Phase 2 then
    takes plain projected-gradient steps accepted only when the KKT
    residual decreases; the residual is measured against the dual scale
    (O(1)), not against f, so it can be driven to the 1e-8 tolerance.
    """
    n, m = V.shape
    x = np.full((n, m), 1.0 / n)
    u, f, grad = _objective_and_gradient(V, x, p, kind)
    step = config.step
    best_x, best_res = x, math.inf
    budget = config.max_iterations
    since_improved = 0
    # reserve at least half the budget for phase 2
    for _ in range(max(1, config.max_iterations // 2)):
        budget -= 1
        duals, kappa = _duals_from_gradient(grad, kind)
        res = float(np.max(kappa * x, initial=0.0))
        if res < best_res:
            best_x, best_res = x, res
            since_improved = 0
        else:
            since_improved += 1
        if (
            res <= config.kkt_tolerance
            and _market_residual(V, x, duals, kappa, kind) <= _MEMBER_MARGIN
        ):
            return x, True
        if since_improved >= _STALL_WINDOW:
            break  # objective plateau: hand over to the residual phase
        accepted = False
        while step > 1e-18:
            cand = project_columns(x - step * grad)
            u2, f2, grad2 = _objective_and_gradient(V, cand, p, kind)
            # degeneracy guard for goods: inf objective rejects the step
            if f2 <= f + config.armijo * float(np.sum(grad * (cand - x))):
                x, f, grad = cand, f2, grad2
                accepted = True
                step /= config.backtrack  # let the step grow again
                break
            step *= config.backtrack
        if not accepted:
            break

    # phase 2: accelerated projected gradient (momentum with adaptive
    # restart) at step 1/L from an explicit curvature bound.  No line
    # search, so it is immune to the objective plateau; acceleration
    # handles the badly conditioned instances where plain steps
    # contract too slowly.
    x = best_x
    u, f, grad = _objective_and_gradient(V, x, p, kind)
    y, fy, grady = x, f, grad
    t = 1.0
    for _ in range(budget):
        duals, kappa = _duals_from_gradient(grad, kind)
        res = float(np.max(kappa * x, initial=0.0))
        if res < best_res:
            best_x, best_res = x, res
        if (
            res <= config.kkt_tolerance
            and _market_residual(V, x, duals, kappa, kind) <= _MEMBER_MARGIN
        ):
            return x, True
        if grady is None:  # extrapolation left the domain (goods)
            y, t = x, 1.0
            uy, fy, grady = u, f, grad
        else:
            uy = np.einsum("ij,ij->i", V, y)
        L = _curvature_bound(V, uy, p, kind)
        s = config.step if L <= 0 else 1.0 / L
        cand = project_columns(y - s * grady)
        u2, f2, grad2 = _objective_and_gradient(V, cand, p, kind)
        while not math.isfinite(f2) and s > 1e-18:
            s *= config.backtrack
            cand = project_columns(y - s * grady)
            u2, f2, grad2 = _objective_and_gradient(V, cand, p, kind)
        if f2 > f:  # momentum overshoot: restart from the last iterate
            y, t = x, 1.0
            cand = project_columns(x - s * grad)
            u2, f2, grad2 = _objective_and_gradient(V, cand, p, kind)
            if not math.isfinite(f2):
                break
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y = cand + ((t - 1.0) / t_next) * (cand - x)
        _, fy, grady = _objective_and_gradient(V, y, p, kind)
        x, u, f, grad = cand, u2, f2, grad2
        t = t_next
    cert = _certificate(V, x, p, kind)
    if cert.residual <= config.kkt_tolerance and _market_residual(
        V, x, cert.duals_items, cert.duals_nonneg, kind
    ) <= _MEMBER_MARGIN:
        return x, True
    raise ConvergenceError(
        f"no convergence to {config.kkt_tolerance} "
        f"(best residual {best_res:.3e})",
        best=FractionalAllocation(best_x),
        residual=best_res,
    )


def solve_goods(instance: Instance, p: float, config: SolverConfig = SolverConfig()):
    """Maximize the normalized p-mean of utilities for goods, p <= 0."""
    if instance.kind != GOODS:
        raise UnsupportedRegime("solve_goods requires a goods instance")
    if not (np.isfinite(p) and p <= 0):
        raise UnsupportedRegime("solve_goods requires finite p <= 0")
    norm = normalize(instance)
    x, _ = _pgd(norm.values, p, GOODS, config)
    allocation = FractionalAllocation(x)
    return allocation, kkt_certificate(instance, allocation, p)


def solve_chores(instance: Instance, p: float, config: SolverConfig = SolverConfig()):
    """Minimize the normalized p-mean of disutilities for chores, p >= 1."""
    if instance.kind != CHORES:
        raise UnsupportedRegime("solve_chores requires a chores instance")
    if not (np.isfinite(p) and p >= 1):
        raise UnsupportedRegime("solve_chores requires finite p >= 1")
    norm = normalize(instance)
    V = norm.values
    n, m = V.shape
    free = np.flatnonzero(~np.any(V == 0, axis=0))
    x = np.zeros((n, m))
    for j in np.flatnonzero(np.any(V == 0, axis=0)):
        x[int(np.argmax(V[:, j] == 0)), j] = 1.0
    if free.size:
        xf, _ = _pgd(V[:, free], p, CHORES, config)
        x[:, free] = xf
    allocation = FractionalAllocation(x)
    return allocation, kkt_certificate(instance, allocation, p)


def kkt_certificate(instance: Instance, allocation, p: float) -> KktCertificate:
    """Certificate with duals set by the closed-form extraction.

    Stationarity holds exactly by construction; the reported
    stationarity residual is the primal column-sum violation.  Chores
    columns containing a zero-cost agent get reward 0 (they are free to
    perform for someone).
    """
    norm = normalize(instance)
    V = norm.values
    x = allocation.x if isinstance(allocation, FractionalAllocation) else np.asarray(allocation, float)
    u, _, grad = _objective_and_gradient(V, x, p, instance.kind)
    if grad is None:
        return _certificate(V, x, p, instance.kind)
    duals, kappa = _duals_from_gradient(grad, instance.kind)
    if instance.kind == CHORES:
        zero_cols = np.any(V == 0, axis=0)
        duals = np.where(zero_cols, 0.0, duals)
        kappa = np.maximum(grad - duals[None, :], 0.0)
    comp = float(np.max(kappa * x, initial=0.0))
    feas = float(np.max(np.abs(x.sum(axis=0) - 1.0), initial=0.0))
    return KktCertificate(
        duals_items=duals,
        duals_nonneg=kappa,
        stationarity_residual=feas,
        complementarity_residual=comp,
    )


def kkt_residual(instance: Instance, allocation, p: float) -> float:
    """Max-norm KKT violation with duals from the extraction formulas."""
    return kkt_certificate(instance, allocation, p).residual


def extract_goods_equilibrium(
    instance: Instance, allocation: FractionalAllocation, p: float
) -> GoodsEquilibrium:
    """Prices p_j = max_i k*v_ij*v_i^(-(k+1)), budgets b_i = k*v_i^(-k).

    For p = 0 (the log objective) the budgets are all 1: the CEEI case.
    """
    if not (np.isfinite(p) and p <= 0):
        raise UnsupportedRegime("goods equilibrium extraction requires p <= 0")
    norm = normalize(instance)
    u = np.einsum("ij,ij->i", norm.values, allocation.x)
    if np.any(u <= _UTIL_FLOOR):
        raise DegenerateOptimum("an agent has zero utility; not an optimum")
    k = -p
    if p == 0:
        prices = np.max(norm.values / u[:, None], axis=0)
        budgets = np.ones(instance.n)
    else:
        prices = np.max(k * norm.values * (u ** (p - 1))[:, None], axis=0)
        budgets = k * u**p
    return GoodsEquilibrium(allocation=allocation, prices=prices, budgets=budgets)


def extract_chores_equilibrium(
    instance: Instance, allocation: FractionalAllocation, p: float
) -> ChoresEquilibrium:
    """Rewards r_j = min over costly agents of p*c_ij*c_i^(p-1) (0 for
    chores someone performs for free); earnings e_i = p*c_i^p."""
    if not (np.isfinite(p) and p >= 1):
        raise UnsupportedRegime("chores equilibrium extraction requires p >= 1")
    norm = normalize(instance)
    V = norm.values
    u = np.einsum("ij,ij->i", V, allocation.x)
    if np.any(u < 0):
        raise DegenerateOptimum("negative disutility")
    if p == 1:
        grad = V
    else:
        grad = p * V * (np.where(u > 0, u, 0.0) ** (p - 1))[:, None]
    rewards = np.where(
        np.any(V == 0, axis=0),
        0.0,
        np.min(np.where(V > 0, grad, np.inf), axis=0),
    )
    earnings = p * u**p
    return ChoresEquilibrium(allocation=allocation, rewards=rewards, earnings=earnings)
