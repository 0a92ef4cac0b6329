"""Decision procedures for fairness and efficiency notions.

Every check returns a FairnessReport with a numeric witness when the
property fails.  Comparisons use a relative tolerance of 1e-9 scaled by
the agent's row sum, since allocations typically come from an iterative
solver.  Exact equality counts as holding (weak inequalities).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    CHORES,
    GOODS,
    Instance,
    IntegralAllocation,
    allocation_matrix,
    bundle_values,
    normalize,
)
from .errors import ParamError, ScaleError
from .simplex import solve_lp

_REL_TOL = 1e-9
_FPO_SLACK_TOL = 1e-7
_PO_STRICT = 1e-12
_PO_LIMIT = 10**7


@dataclass(frozen=True)
class Witness:
    agent_i: Optional[int] = None
    agent_j: Optional[int] = None
    items: tuple = ()
    slack: float = 0.0


@dataclass(frozen=True)
class FairnessReport:
    notion: str
    params: dict = field(default_factory=dict)
    holds: bool = True
    witness: Optional[Witness] = None

    def to_json(self) -> str:
        w = None
        if self.witness is not None:
            w = {
                "agent_i": self.witness.agent_i,
                "agent_j": self.witness.agent_j,
                "items": list(self.witness.items),
                "slack": self.witness.slack,
            }
        return json.dumps(
            {
                "notion": self.notion,
                "params": self.params,
                "holds": self.holds,
                "witness": w,
            }
        )


def _tols(instance: Instance) -> np.ndarray:
    return _REL_TOL * instance.row_sums


def _cross_values(instance: Instance, allocation) -> np.ndarray:
    """cross[i, j] = value of agent j's bundle in agent i's eyes."""
    x = allocation_matrix(instance, allocation)
    return instance.values @ x.T


def check_ef(instance: Instance, allocation, beta: float = 1.0) -> FairnessReport:
    """beta-envy-freeness.

    Goods: v_i(x_i) >= v_i(x_j)/beta.  Chores: c_i(x_i) <= beta*c_i(x_j);
    when c_i(x_j) = 0 the condition reads c_i(x_i) <= 0 literally.
    """
    if beta < 1:
        raise ParamError("beta must be >= 1")
    cross = _cross_values(instance, allocation)
    own = np.diag(cross)
    tol = _tols(instance)
    if instance.kind == GOODS:
        slack = cross / beta - own[:, None]  # > 0 means violation
    else:
        slack = own[:, None] - beta * cross
    np.fill_diagonal(slack, -np.inf)
    i, j = np.unravel_index(np.argmax(slack - tol[:, None]), slack.shape)
    if slack[i, j] > tol[i]:
        return FairnessReport(
            "EF",
            {"beta": beta},
            False,
            Witness(agent_i=int(i), agent_j=int(j), slack=float(slack[i, j])),
        )
    return FairnessReport("EF", {"beta": beta})


def check_prop(instance: Instance, allocation, beta: float = 1.0) -> FairnessReport:
    """beta-proportionality against the 1/n share of each row sum."""
    if beta < 1:
        raise ParamError("beta must be >= 1")
    own = bundle_values(instance, allocation)
    share = instance.row_sums / instance.n
    tol = _tols(instance)
    if instance.kind == GOODS:
        slack = share / beta - own
    else:
        slack = own - beta * share
    i = int(np.argmax(slack - tol))
    if slack[i] > tol[i]:
        return FairnessReport(
            "PROP", {"beta": beta}, False, Witness(agent_i=i, slack=float(slack[i]))
        )
    return FairnessReport("PROP", {"beta": beta})


def _top_k_items(values_row: np.ndarray, items: np.ndarray, k: int) -> np.ndarray:
    """The (up to k) items of largest value for this agent.

    Greedy removal of the largest own-cost items is optimal for additive
    costs: removing any other set of <= k items leaves at least as much
    cost behind.
    """
    if items.size == 0 or k == 0:
        return items[:0]
    order = np.argsort(-values_row[items], kind="stable")
    return items[order[:k]]


def check_efk(
    instance: Instance, allocation: IntegralAllocation, beta: float = 1.0, k: int = 1
) -> FairnessReport:
    """beta-EF after removing up to k items (EF1 at beta=1, k=1).

    Chores remove from the envious agent's own bundle; goods remove from
    the envied bundle.
    """
    if beta < 1:
        raise ParamError("beta must be >= 1")
    if k < 1:
        raise ParamError("k must be >= 1")
    v = instance.values
    tol = _tols(instance)
    bundles = [np.flatnonzero(allocation.owner == i) for i in range(instance.n)]
    own = np.array([v[i, bundles[i]].sum() for i in range(instance.n)])
    for i in range(instance.n):
        if instance.kind == CHORES:
            drop = _top_k_items(v[i], bundles[i], k)
            kept = own[i] - v[i, drop].sum()
        for j in range(instance.n):
            if i == j:
                continue
            other = float(v[i, bundles[j]].sum())
            if instance.kind == GOODS:
                drop = _top_k_items(v[i], bundles[j], k)
                reduced = other - v[i, drop].sum()
                slack = reduced / beta - own[i]
            else:
                slack = kept - beta * other
            if slack > tol[i]:
                return FairnessReport(
                    "EFk",
                    {"beta": beta, "k": k},
                    False,
                    Witness(
                        agent_i=i,
                        agent_j=j,
                        items=tuple(int(t) for t in drop),
                        slack=float(slack),
                    ),
                )
    return FairnessReport("EFk", {"beta": beta, "k": k})


def check_propk(
    instance: Instance, allocation: IntegralAllocation, beta: float = 1.0, k: int = 1
) -> FairnessReport:
    """beta-PROP up to k items (PROP1 at beta=1, k=1).

    Goods add the best k missing items; chores remove the worst k held.
    """
    if beta < 1:
        raise ParamError("beta must be >= 1")
    if k < 1:
        raise ParamError("k must be >= 1")
    v = instance.values
    tol = _tols(instance)
    share = instance.row_sums / instance.n
    for i in range(instance.n):
        mine = np.flatnonzero(allocation.owner == i)
        own = float(v[i, mine].sum())
        if instance.kind == GOODS:
            missing = np.flatnonzero(allocation.owner != i)
            add = _top_k_items(v[i], missing, k)
            slack = share[i] / beta - (own + v[i, add].sum())
            items = add
        else:
            drop = _top_k_items(v[i], mine, k)
            slack = (own - v[i, drop].sum()) - beta * share[i]
            items = drop
        if slack > tol[i]:
            return FairnessReport(
                "PROPk",
                {"beta": beta, "k": k},
                False,
                Witness(
                    agent_i=i,
                    items=tuple(int(t) for t in items),
                    slack=float(slack),
                ),
            )
    return FairnessReport("PROPk", {"beta": beta, "k": k})


def _all_owner_batches(n: int, m: int, batch: int = 1 << 15):
    total = n**m
    shape = (n,) * m
    for start in range(0, total, batch):
        idx = np.arange(start, min(start + batch, total))
        yield np.stack(np.unravel_index(idx, shape), axis=1)


def _batch_utilities(values: np.ndarray, owners: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    util = np.empty((owners.shape[0], n))
    for i in range(n):
        util[:, i] = (owners == i) @ values[i]
    return util


def check_po_integral(instance: Instance, allocation: IntegralAllocation) -> FairnessReport:
    """Pareto optimality by exhaustive search over all n^m allocations."""
    n, m = instance.n, instance.m
    if n**m > _PO_LIMIT:
        raise ScaleError(f"{n}^{m} allocations exceed the exhaustive limit")
    u = bundle_values(instance, allocation)
    margin = _PO_STRICT * instance.row_sums
    sign = 1.0 if instance.kind == GOODS else -1.0
    for owners in _all_owner_batches(n, m):
        util = _batch_utilities(instance.values, owners)
        weak = np.all(sign * util >= sign * u[None, :] - margin[None, :], axis=1)
        strict = np.any(sign * util > sign * u[None, :] + margin[None, :], axis=1)
        hit = np.flatnonzero(weak & strict)
        if hit.size:
            b = int(hit[0])
            gain = float(np.max(sign * (util[b] - u)))
            return FairnessReport(
                "PO",
                {},
                False,
                Witness(items=tuple(int(t) for t in owners[b]), slack=gain),
            )
    return FairnessReport("PO", {})


def check_fpo(instance: Instance, allocation) -> FairnessReport:
    """Fractional Pareto optimality via a feasibility-improvement LP.

    Maximize sum_i s_i over fractional y with unit column sums and
    v_i(y_i) = v_i(x_i) + s_i (goods; minus for chores), s_i >= 0.  The
    allocation is fPO iff the optimal total slack is <= 1e-7.
    """
    norm = normalize(instance)
    n, m = norm.n, norm.m
    u = bundle_values(norm, allocation)
    sign = 1.0 if instance.kind == GOODS else -1.0
    nv = n * m + n
    c = np.zeros(nv)
    c[n * m :] = 1.0
    A_eq = np.zeros((m + n, nv))
    b_eq = np.zeros(m + n)
    for j in range(m):
        A_eq[j, j : n * m : m] = 1.0  # y[i, j] laid out row-major as i*m + j
        b_eq[j] = 1.0
    for i in range(n):
        A_eq[m + i, i * m : (i + 1) * m] = sign * norm.values[i]
        A_eq[m + i, n * m + i] = -1.0
        b_eq[m + i] = sign * u[i]
    res = solve_lp(c, A_eq=A_eq, b_eq=b_eq, maximize=True)
    if res.value > _FPO_SLACK_TOL:
        s = res.x[n * m :]
        i = int(np.argmax(s))
        return FairnessReport(
            "fPO", {}, False, Witness(agent_i=i, slack=float(res.value))
        )
    return FairnessReport("fPO", {})
