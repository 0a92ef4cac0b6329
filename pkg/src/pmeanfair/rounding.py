"""Rounding divisible market equilibria to integral allocations.

The construction is the standard one behind proximity-style rounding
results.  Build the bipartite spending graph on agents and
fractionally-shared items, with edge weights x_ij * p_j (spending).
Cancel cycles — shifting spending around a cycle keeps every agent's
total spending and every item's total sale intact while zeroing one
edge — until the graph is a forest.  Each remaining shared item is then
assigned to one of its adjacent agents.  Within each tree the number of
shared items is below the number of adjacent agents, so assignments are
searched exhaustively and validated against the contract:

  goods:  sum b' = sum b;  |b_i - b'_i| <= max price;  an agent who lost
          budget has a witness MBB item outside their bundle with
          b_i <= b'_i + p_j;  an agent who gained budget has a witness
          item j in their bundle with b_i >= b'_i - p_j.
  chores: an agent who earns more than their goal has a witness chore
          j in their bundle with e'_i - r_j <= e_i.

The contract is validated post-hoc rather than trusted: if no
assignment satisfies it, that is a bug and NumericalError is raised.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Instance, IntegralAllocation, normalize
from .errors import NumericalError, PreconditionError, ScaleError
from .market import (
    ChoresEquilibrium,
    GoodsEquilibrium,
    check_chores_equilibrium,
    check_goods_equilibrium,
    mbb_set,
    mrc_set,
)

_SHARE_TOL = 1e-9
_ZERO_PRICE = 1e-12
# Deviations carry the solver's per-agent money slack (up to 5e-8), so
# "at budget" must be judged coarser than that, matching the market
# checker's 1e-7.
_CLAUSE_TOL = 1e-7
_COMBO_LIMIT = 1 << 20


@dataclass(frozen=True)
class RoundingOutcome:
    allocation: IntegralAllocation
    adjusted: np.ndarray  # b'_i for goods, e'_i for chores
    witness: dict = field(default_factory=dict)  # agent -> contract item

    def to_dict(self) -> dict:
        return {
            "owner": self.allocation.owner.tolist(),
            "adjusted": self.adjusted.tolist(),
            "witness": {str(k): v for k, v in self.witness.items()},
        }


def _snap(x: np.ndarray) -> np.ndarray:
    """Drop sub-tolerance shares and renormalize columns."""
    x = np.where(x < _SHARE_TOL, 0.0, x.copy())
    return x / x.sum(axis=0)[None, :]


def _find_cycle(adj: dict, nodes) -> Optional[list]:
    """A cycle in an undirected graph, as a node list, or None."""
    visited = set()
    parent = {}
    for root in nodes:
        if root in visited:
            continue
        stack = [(root, None)]
        while stack:
            node, par = stack.pop()
            if node in visited:
                continue
            visited.add(node)
            parent[node] = par
            for nb in adj[node]:
                if nb == par:
                    continue
                if nb in visited:
                    # climb to the common ancestor of node and nb
                    anc = []
                    cur = node
                    while cur is not None:
                        anc.append(cur)
                        cur = parent[cur]
                    seen = {v: t for t, v in enumerate(anc)}
                    path_nb = []
                    cur = nb
                    while cur not in seen:
                        path_nb.append(cur)
                        cur = parent[cur]
                    lca = cur
                    return anc[: seen[lca] + 1] + list(reversed(path_nb))
                stack.append((nb, node))
    return None


def _cancel_cycles(q: np.ndarray, eps: float) -> np.ndarray:
    """Make the spending graph acyclic, preserving all row/column sums.

    q is agents x shared-items; nodes are ('a', i) and ('g', j).
    """
    q = q.copy()
    while True:
        adj = {}
        n, s = q.shape
        nodes = [("a", i) for i in range(n)] + [("g", j) for j in range(s)]
        for v in nodes:
            adj[v] = []
        for i, j in zip(*np.nonzero(q > eps)):
            adj[("a", int(i))].append(("g", int(j)))
            adj[("g", int(j))].append(("a", int(i)))
        cycle = _find_cycle(adj, nodes)
        if cycle is None:
            return q
        edges = [
            (cycle[t], cycle[(t + 1) % len(cycle)]) for t in range(len(cycle))
        ]

        def q_index(u, v):
            (i,) = [w[1] for w in (u, v) if w[0] == "a"]
            (j,) = [w[1] for w in (u, v) if w[0] == "g"]
            return i, j

        minus = [q_index(*edges[t]) for t in range(1, len(edges), 2)]
        plus = [q_index(*edges[t]) for t in range(0, len(edges), 2)]
        t = min(q[i, j] for i, j in minus)
        for i, j in plus:
            q[i, j] += t
        for i, j in minus:
            q[i, j] -= t
        q[q <= eps] = 0.0


def _components(adj_items: dict, n_agents: int):
    """Connected components of the forest; yields (agents, items)."""
    seen_items = set()
    for start in adj_items:
        if start in seen_items:
            continue
        items, agents = set(), set()
        stack = [("g", start)]
        while stack:
            kind, v = stack.pop()
            if kind == "g":
                if v in items:
                    continue
                items.add(v)
                seen_items.add(v)
                for i in adj_items[v]:
                    stack.append(("a", i))
            else:
                if v in agents:
                    continue
                agents.add(v)
                for j, ag in adj_items.items():
                    if v in ag:
                        stack.append(("g", j))
        yield sorted(agents), sorted(items)


def _goods_clauses_ok(dev, prices, bundle, mbb, tol):
    """Contract clauses 2 and 3 for one agent; returns witness or None.

    Agents within tolerance of their budget need no witness.
    """
    if abs(dev) <= tol:
        return True, None
    if dev < 0:  # b'_i < b_i: some affordable MBB item escaped their
        for j in sorted(mbb - bundle):
            if prices[j] >= -dev - _CLAUSE_TOL:
                return True, int(j)
        return False, None
    for j in sorted(bundle):  # b'_i > b_i: one held item explains it
        if prices[j] >= dev - _CLAUSE_TOL:
            return True, int(j)
    return False, None


def _chores_clause_ok(dev, rewards, bundle, tol):
    if dev <= tol:
        return True, None
    for j in sorted(bundle):
        if rewards[j] >= dev - _CLAUSE_TOL:
            return True, int(j)
    return False, None


def _assign_forest(
    instance,
    duals,
    targets,
    owner,
    q,
    shared,
    mbb_sets,
    goods: bool,
) -> dict:
    """Assign remaining shared items tree by tree.

    owner: partially filled owner array (integral part done); filled in
    place.  q: agents x len(shared) spending forest.  Returns the
    per-agent contract witnesses gathered along the way.
    """
    witnesses_out: dict = {}
    adj_items = {
        t: sorted(int(i) for i in np.flatnonzero(q[:, t] > 0.0))
        for t in range(len(shared))
    }
    # base payments from already-integral items
    base = np.zeros(instance.n)
    for j, o in enumerate(owner):
        if o >= 0:
            base[o] += duals[j]

    for agents, items in _components(adj_items, instance.n):
        single = [t for t in items if len(adj_items[t]) == 1]
        multi = [t for t in items if len(adj_items[t]) > 1]
        for t in single:
            owner[shared[t]] = adj_items[t][0]
            base[adj_items[t][0]] += duals[shared[t]]
        if not multi:
            continue
        n_combo = 1
        for t in multi:
            n_combo *= len(adj_items[t])
        if n_combo > _COMBO_LIMIT:
            raise ScaleError("rounding search space too large")
        best = None
        for combo in itertools.product(*(adj_items[t] for t in multi)):
            b_adj = base.copy()
            for t, i in zip(multi, combo):
                b_adj[i] += duals[shared[t]]
            ok = True
            witnesses = {}
            maxdev = 0.0
            pmax = float(np.max(duals, initial=0.0))
            for i in agents:
                dev = b_adj[i] - targets[i]
                maxdev = max(maxdev, abs(dev))
                tol = _CLAUSE_TOL * max(1.0, targets[i])
                bundle = {int(j) for j in range(instance.m) if owner[j] == i}
                bundle |= {shared[t] for t, a in zip(multi, combo) if a == i}
                if goods:
                    if abs(dev) > pmax + _CLAUSE_TOL:
                        ok = False
                        break
                    good, w = _goods_clauses_ok(
                        dev, duals, bundle, mbb_sets[i], tol
                    )
                else:
                    good, w = _chores_clause_ok(dev, duals, bundle, tol)
                if not good:
                    ok = False
                    break
                if w is not None:
                    witnesses[i] = w
            if ok and (best is None or maxdev < best[0] - 1e-15):
                best = (maxdev, combo, witnesses)
        if best is None:
            raise NumericalError(
                "no shared-item assignment satisfies the rounding contract"
            )
        _, combo, witnesses = best
        for t, i in zip(multi, combo):
            owner[shared[t]] = i
            base[i] += duals[shared[t]]
        witnesses_out.update(witnesses)
    return witnesses_out


def _round(instance, eq, goods: bool) -> RoundingOutcome:
    norm = normalize(instance)
    if goods:
        verdict = check_goods_equilibrium(norm, eq)
        duals, targets = eq.prices, eq.budgets
    else:
        verdict = check_chores_equilibrium(norm, eq)
        duals, targets = eq.rewards, eq.earnings
    if not verdict.ok:
        raise PreconditionError(f"input is not an equilibrium: {verdict.failures}")

    x = _snap(eq.allocation.x)
    n, m = x.shape
    owner = np.full(m, -1, dtype=int)

    if goods:
        mbb_sets = [mbb_set(norm, duals, i)[0] for i in range(n)]
    else:
        mbb_sets = [mrc_set(norm, duals, i)[0] for i in range(n)]

    # free items: price/reward zero; give to an MBB/MRC member,
    # preferring agents with positive value (goods) / zero cost (chores)
    for j in np.flatnonzero(duals <= _ZERO_PRICE):
        members = [i for i in range(n) if j in mbb_sets[i]]
        if not members:
            members = list(range(n))
        if goods:
            ranked = sorted(members, key=lambda i: -norm.values[i, j])
        else:
            ranked = sorted(members, key=lambda i: norm.values[i, j])
        owner[j] = ranked[0]

    priced = np.flatnonzero(duals > _ZERO_PRICE)
    shared = []
    for j in priced:
        holders = np.flatnonzero(x[:, j] > 0)
        if holders.size == 1:
            owner[j] = int(holders[0])
        else:
            shared.append(int(j))

    tree_witnesses: dict = {}
    if shared:
        q = x[:, shared] * duals[shared][None, :]
        eps = 1e-11 * max(float(np.max(duals)), 1.0)
        q = _cancel_cycles(q, eps)
        tree_witnesses = _assign_forest(
            instance, duals, targets, owner, q, shared, mbb_sets, goods
        )

    allocation = IntegralAllocation(owner)
    adjusted = np.zeros(n)
    for j in range(m):
        adjusted[owner[j]] += duals[j]

    # post-hoc contract validation (never trust the construction).
    # Targets come from a solver with per-agent money slack up to 5e-8,
    # so conservation can only hold up to n times that.
    if abs(adjusted.sum() - targets.sum()) > 1e-7 * n * max(1.0, targets.sum()):
        raise NumericalError("budget conservation violated after rounding")
    witnesses = dict(tree_witnesses)
    pmax = float(np.max(duals, initial=0.0))
    for i in range(n):
        dev = adjusted[i] - targets[i]
        tol = _CLAUSE_TOL * max(1.0, targets[i])
        bundle = {int(j) for j in np.flatnonzero(owner == i)}
        if goods:
            if abs(dev) > pmax + _CLAUSE_TOL:
                raise NumericalError("budget deviation exceeds the price bound")
            ok, w = _goods_clauses_ok(dev, duals, bundle, mbb_sets[i], tol)
        else:
            ok, w = _chores_clause_ok(dev, duals, bundle, tol)
        if not ok:
            raise NumericalError("rounding contract clause failed post-hoc")
        if w is not None and i not in witnesses:
            witnesses[i] = w
    return RoundingOutcome(allocation=allocation, adjusted=adjusted, witness=witnesses)


def round_goods(eq: GoodsEquilibrium, instance: Instance) -> RoundingOutcome:
    """Round a goods equilibrium; output is PROP1 and fPO."""
    return _round(instance, eq, goods=True)


def round_chores(eq: ChoresEquilibrium, instance: Instance, p: float) -> RoundingOutcome:
    """Round a chores equilibrium; output is n^(1/p)-PROP1 and fPO."""
    if p < 1:
        raise PreconditionError("chores rounding requires p >= 1")
    return _round(instance, eq, goods=False)
