"""Fisher market equilibria and the three-condition checkers.

Goods: a triple (x, p, b) of allocation, item prices, and agent budgets
is an equilibrium when (1) every item is fully allocated or priced at
zero, (2) agents only hold maximum bang-per-buck (MBB) items, and
(3) each agent's spending equals their budget.

Chores: the dual triple (x, r, e) with per-chore rewards and per-agent
earning goals; agents only perform maximum reward-per-cost (MRC)
chores and meet their earning goals exactly.

Membership tolerance for MBB/MRC is 1e-7 relative — deliberately looser
than the solver's 1e-8 KKT tolerance, so verified optima always pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import FractionalAllocation, NormalizedInstance
from .errors import DimensionError

_MEMBER_TOL = 1e-7
_CLEAR_TOL = 1e-7
_BUDGET_TOL = 1e-7
_SHARE_TOL = 1e-9
_ZERO_PRICE = 1e-12


@dataclass(frozen=True)
class GoodsEquilibrium:
    allocation: FractionalAllocation
    prices: np.ndarray
    budgets: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=float)
        b = np.asarray(self.budgets, dtype=float)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(b))):
            raise DimensionError("prices and budgets must be finite")
        if np.any(p < 0) or np.any(b < 0):
            raise DimensionError("prices and budgets must be nonnegative")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "budgets", b)

    def to_dict(self) -> dict:
        return {
            "allocation": self.allocation.x.tolist(),
            "prices": self.prices.tolist(),
            "budgets": self.budgets.tolist(),
        }


@dataclass(frozen=True)
class ChoresEquilibrium:
    allocation: FractionalAllocation
    rewards: np.ndarray
    earnings: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rewards, dtype=float)
        e = np.asarray(self.earnings, dtype=float)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(e))):
            raise DimensionError("rewards and earnings must be finite")
        if np.any(r < 0) or np.any(e < 0):
            raise DimensionError("rewards and earnings must be nonnegative")
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "earnings", e)

    def to_dict(self) -> dict:
        return {
            "allocation": self.allocation.x.tolist(),
            "rewards": self.rewards.tolist(),
            "earnings": self.earnings.tolist(),
        }


def mbb_set(instance: NormalizedInstance, prices, agent: int):
    """(item set, value) of maximum bang-per-buck items for an agent.

    Items with positive value and zero price have infinite ratio and
    dominate everything else.
    """
    v = instance.values[agent]
    p = np.asarray(prices, dtype=float)
    free = (p <= _ZERO_PRICE) & (v > 0)
    if np.any(free):
        return set(int(j) for j in np.flatnonzero(free)), math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(p > _ZERO_PRICE, v / np.maximum(p, _ZERO_PRICE), 0.0)
    best = float(np.max(ratio))
    members = np.flatnonzero(ratio >= best * (1 - _MEMBER_TOL))
    return set(int(j) for j in members), best


def mrc_set(instance: NormalizedInstance, rewards, agent: int):
    """(item set, value) of maximum reward-per-cost chores for an agent.

    Zero-cost chores are always members (performing them is free).
    """
    c = instance.values[agent]
    r = np.asarray(rewards, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(c > 0, r / np.maximum(c, 1e-300), -math.inf)
    if np.all(c == 0):
        return set(range(instance.m)), math.inf
    best = float(np.max(ratio[c > 0]))
    members = set(int(j) for j in np.flatnonzero(c == 0))
    if best > 0:
        members |= set(
            int(j) for j in np.flatnonzero((c > 0) & (ratio >= best * (1 - _MEMBER_TOL)))
        )
    else:
        members |= set(int(j) for j in np.flatnonzero((c > 0) & (ratio >= best)))
    return members, best


@dataclass(frozen=True)
class EquilibriumVerdict:
    ok: bool
    residuals: dict = field(default_factory=dict)
    failures: tuple = ()


def _clearing_residual(prices: np.ndarray, colsum: np.ndarray):
    """Each item either has price 0 or is fully allocated."""
    res = np.where(prices > _ZERO_PRICE, np.abs(colsum - 1.0), 0.0)
    return float(np.max(res, initial=0.0))


def check_goods_equilibrium(
    instance: NormalizedInstance, eq: GoodsEquilibrium
) -> EquilibriumVerdict:
    x = eq.allocation.x
    if x.shape != (instance.n, instance.m):
        raise DimensionError("allocation shape mismatch")
    failures = []
    clear = _clearing_residual(eq.prices, x.sum(axis=0))
    if clear > _CLEAR_TOL:
        failures.append(("clearing", clear))

    mbb_res = 0.0
    for i in range(instance.n):
        members, best = mbb_set(instance, eq.prices, i)
        held = np.flatnonzero(x[i] > _SHARE_TOL)
        for j in held:
            if int(j) in members:
                continue
            if best == math.inf or best <= 0:
                gap = 1.0
            else:
                ratio = instance.values[i, j] / max(eq.prices[j], _ZERO_PRICE)
                gap = (best - ratio) / best
            mbb_res = max(mbb_res, gap)
            failures.append(("mbb", i, int(j), gap))

    spend = x @ eq.prices
    budget_res = float(
        np.max(np.abs(eq.budgets - spend) / np.maximum(1.0, eq.budgets))
    )
    if budget_res > _BUDGET_TOL:
        i = int(np.argmax(np.abs(eq.budgets - spend) / np.maximum(1.0, eq.budgets)))
        failures.append(("budget", i, budget_res))
    return EquilibriumVerdict(
        ok=not failures,
        residuals={"clearing": clear, "mbb": mbb_res, "budget": budget_res},
        failures=tuple(failures),
    )


def check_chores_equilibrium(
    instance: NormalizedInstance, eq: ChoresEquilibrium
) -> EquilibriumVerdict:
    x = eq.allocation.x
    if x.shape != (instance.n, instance.m):
        raise DimensionError("allocation shape mismatch")
    failures = []
    clear = float(np.max(np.abs(x.sum(axis=0) - 1.0), initial=0.0))
    if clear > _CLEAR_TOL:
        failures.append(("clearing", clear))

    mrc_res = 0.0
    for i in range(instance.n):
        members, best = mrc_set(instance, eq.rewards, i)
        held = np.flatnonzero(x[i] > _SHARE_TOL)
        for j in held:
            if int(j) in members:
                continue
            c = instance.values[i, j]
            ratio = eq.rewards[j] / c
            gap = (best - ratio) / best if best > 0 else 1.0
            mrc_res = max(mrc_res, gap)
            failures.append(("mrc", i, int(j), gap))

    earn = x @ eq.rewards
    earn_res = float(
        np.max(np.abs(eq.earnings - earn) / np.maximum(1.0, eq.earnings))
    )
    if earn_res > _BUDGET_TOL:
        i = int(np.argmax(np.abs(eq.earnings - earn) / np.maximum(1.0, eq.earnings)))
        failures.append(("earning", i, earn_res))
    return EquilibriumVerdict(
        ok=not failures,
        residuals={"clearing": clear, "mrc": mrc_res, "earning": earn_res},
        failures=tuple(failures),
    )
