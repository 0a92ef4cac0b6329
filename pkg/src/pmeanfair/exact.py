"""Brute-force oracles and algebraic predicates.

enumerate_optima walks all n^m integral allocations, so "every optimum"
statements can be tested against the full tie set rather than a single
argmax.  grid_oracle_divisible is an independent check on the convex
solver and the only way this package evaluates the non-convex regimes
(goods p > 0, chores p < 1).  The lemma predicates expose the algebraic
facts behind the two-agent EF1 arguments as testable booleans.
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
    IntegralAllocation,
    normalize,
)
from .errors import PreconditionError, ScaleError
from .welfare import p_mean

_ENUM_LIMIT = 10**7
_TIE_TOL = 1e-12
_BATCH = 1 << 15


@dataclass(frozen=True)
class OptimaSet:
    optima: tuple
    objective: float
    tie_tolerance: float


def _pmean_batch(util: np.ndarray, p: float) -> np.ndarray:
    """Row-wise p-mean of a batch of nonnegative utility vectors."""
    if p == math.inf:
        return util.max(axis=1)
    if p == -math.inf:
        return util.min(axis=1)
    if p == 0:
        safe = np.where(util > 0, util, 1.0)
        gm = np.exp(np.mean(np.log(safe), axis=1))
        return np.where(np.all(util > 0, axis=1), gm, 0.0)
    if p < 0:
        out = np.zeros(util.shape[0])
        pos = np.all(util > 0, axis=1)
        if np.any(pos):
            out[pos] = np.mean(util[pos] ** p, axis=1) ** (1.0 / p)
        return out
    return np.mean(util**p, axis=1) ** (1.0 / p)


def _owner_batches(n: int, m: int):
    total = n**m
    shape = (n,) * m
    for start in range(0, total, _BATCH):
        idx = np.arange(start, min(start + _BATCH, total))
        yield np.stack(np.unravel_index(idx, shape), axis=1)


def enumerate_optima(instance: Instance, p: float) -> OptimaSet:
    """All integral allocations achieving the optimal normalized p-mean.

    Goods maximize, chores minimize; ties within 1e-12 relative.
    """
    n, m = instance.n, instance.m
    if n**m > _ENUM_LIMIT:
        raise ScaleError(f"{n}^{m} allocations exceed the enumeration limit")
    V = normalize(instance).values
    sign = 1.0 if instance.kind == GOODS else -1.0

    best = -math.inf
    for owners in _owner_batches(n, m):
        util = np.empty((owners.shape[0], n))
        for i in range(n):
            util[:, i] = (owners == i) @ V[i]
        obj = sign * _pmean_batch(util, p)
        best = max(best, float(obj.max()))

    cut = best - _TIE_TOL * max(abs(best), 1e-300)
    optima = []
    for owners in _owner_batches(n, m):
        util = np.empty((owners.shape[0], n))
        for i in range(n):
            util[:, i] = (owners == i) @ V[i]
        obj = sign * _pmean_batch(util, p)
        for b in np.flatnonzero(obj >= cut):
            optima.append(IntegralAllocation(owners[b]))
    return OptimaSet(
        optima=tuple(optima),
        objective=sign * best,
        tie_tolerance=_TIE_TOL,
    )


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of given length summing to total."""
    if parts == 1:
        return np.array([[total]])
    rows = []
    for first in range(total + 1):
        rest = _compositions(total - first, parts - 1)
        rows.append(
            np.hstack([np.full((rest.shape[0], 1), first), rest])
        )
    return np.vstack(rows)


def _grid_best(V: np.ndarray, kind: str, p: float, resolution: int):
    n, m = V.shape
    comps = _compositions(resolution, n) / resolution  # (c, n)
    c = comps.shape[0]
    total = c**m
    if total > _ENUM_LIMIT:
        raise ScaleError("grid too large")
    sign = 1.0 if kind == GOODS else -1.0
    shape = (c,) * m
    best_obj, best_digits = -math.inf, None
    for start in range(0, total, _BATCH):
        idx = np.arange(start, min(start + _BATCH, total))
        digits = np.stack(np.unravel_index(idx, shape), axis=1)  # (B, m)
        util = np.zeros((idx.size, n))
        for j in range(m):
            util += comps[digits[:, j]] * V[:, j][None, :]
        obj = sign * _pmean_batch(util, p)
        b = int(np.argmax(obj))
        if obj[b] > best_obj:
            best_obj, best_digits = float(obj[b]), digits[b]
    x = np.stack([comps[d] for d in best_digits], axis=1)  # n x m
    return x, sign * best_obj


def _golden_refine(V, kind, p, x, free_col, lo, hi, tol):
    """Golden-section search on agent 1's share of one column (n=2)."""
    sign = 1.0 if kind == GOODS else -1.0

    def value(t):
        y = x.copy()
        y[0, free_col] = t
        y[1, free_col] = 1.0 - t
        util = np.einsum("ij,ij->i", V, y)
        return sign * p_mean(np.maximum(util, 0.0), p)

    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c1, c2 = b - invphi * (b - a), a + invphi * (b - a)
    f1, f2 = value(c1), value(c2)
    while b - a > tol:
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = value(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = value(c2)
    t = (a + b) / 2
    y = x.copy()
    y[0, free_col] = t
    y[1, free_col] = 1.0 - t
    return y, sign * value(t)


def grid_oracle_divisible(instance: Instance, p: float, resolution: int):
    """Best fractional allocation on a regular simplex grid.

    For 2-agent, 2-item instances where the coarse optimum pins one item
    entirely to one agent (the structure the negative-result proofs
    establish), the other item's split is refined by golden-section
    search to the requested resolution.
    """
    if resolution < 1:
        raise ScaleError("resolution must be >= 1")
    n, m = instance.n, instance.m
    V = normalize(instance).values
    coarse = resolution
    # keep the full grid under the enumeration budget
    while math.comb(coarse + n - 1, n - 1) ** m > _ENUM_LIMIT and coarse > 8:
        coarse //= 2
    if math.comb(coarse + n - 1, n - 1) ** m > _ENUM_LIMIT:
        raise ScaleError("grid too large even after coarsening")
    x, obj = _grid_best(V, instance.kind, p, coarse)
    if coarse < resolution and n == 2 and m == 2:
        h = 1.0 / coarse
        # refine whichever column is free once the other sits at a bound
        for fixed in range(2):
            if min(x[0, fixed], 1.0 - x[0, fixed]) <= h / 2:
                y = x.copy()
                y[0, fixed] = round(y[0, fixed])
                y[1, fixed] = 1.0 - y[0, fixed]
                free = 1 - fixed
                lo = max(0.0, x[0, free] - 2 * h)
                hi = min(1.0, x[0, free] + 2 * h)
                y2, obj2 = _golden_refine(
                    V, instance.kind, p, y, free, lo, hi, 0.1 / resolution
                )
                sign = 1.0 if instance.kind == GOODS else -1.0
                if sign * obj2 >= sign * obj:
                    x, obj = y2, obj2
                break
    return FractionalAllocation(x), obj


def lemma_squeeze_predicate(a, b, alpha, beta, p) -> bool:
    """a^p + b^p > alpha^p + beta^p for p > 2, given the squeeze premise
    max{a,b} >= max{alpha,beta} and a^2 + b^2 > alpha^2 + beta^2."""
    if min(a, b, alpha, beta) <= 0:
        raise PreconditionError("all four arguments must be positive")
    if p <= 2:
        raise PreconditionError("p must exceed 2")
    if max(a, b) < max(alpha, beta):
        raise PreconditionError("max{a,b} >= max{alpha,beta} required")
    if a**2 + b**2 <= alpha**2 + beta**2:
        raise PreconditionError("a^2 + b^2 > alpha^2 + beta^2 required")
    return a**p + b**p > alpha**p + beta**p


def lemma_chores_algebra_predicate(a, alpha, beta):
    """The two transfer inequalities, given a < alpha < 1, 0 < beta < 1-2*alpha.

    (1) (a + beta*(1-a)/(1-alpha))^2 + (1-alpha-beta)^2 < a^2 + (1-alpha)^2
    (2)  a + beta*(1-a)/(1-alpha) < 1 - alpha
    """
    if not (a < alpha < 1):
        raise PreconditionError("a < alpha < 1 required")
    if not (0 < beta < 1 - 2 * alpha):
        raise PreconditionError("0 < beta < 1 - 2*alpha required")
    lhs = a + (1 - a) / (1 - alpha) * beta
    ineq1 = lhs**2 + (1 - alpha - beta) ** 2 < a**2 + (1 - alpha) ** 2
    ineq2 = lhs < 1 - alpha
    return ineq1, ineq2


def lemma_goods_algebra_predicate(a, b, alpha, beta, p) -> bool:
    """w_p(a,b) < w_p(alpha,beta) for p <= 0, given min{a,b} <= min{alpha,beta}
    and ab < alpha*beta."""
    if min(a, b, alpha, beta) <= 0:
        raise PreconditionError("all four arguments must be positive")
    if p > 0:
        raise PreconditionError("p must be <= 0")
    if min(a, b) > min(alpha, beta):
        raise PreconditionError("min{a,b} <= min{alpha,beta} required")
    if a * b >= alpha * beta:
        raise PreconditionError("ab < alpha*beta required")
    return p_mean([a, b], p) < p_mean([alpha, beta], p)


def ef1_transfer_step(
    instance: Instance, allocation: IntegralAllocation
) -> IntegralAllocation:
    """One step of the two-agent chores EF1 repair argument.

    Preconditions: n = 2 chores instance; agent 2 (index 1) envies agent
    1 even after removing their own largest chore; and the normalized
    costs satisfy c1(a_1) <= c2(a_1) (otherwise the repair is to swap
    the bundles, not to transfer).  Transfers
    t* = argmin over a_2 of c1(t)/c2(t) from agent 2 to agent 1; this
    strictly decreases both the sum of squared normalized costs and
    their max.
    """
    if instance.kind != CHORES:
        raise PreconditionError("chores instance required")
    if instance.n != 2:
        raise PreconditionError("exactly two agents required")
    V = normalize(instance).values
    owner = allocation.owner
    a1 = np.flatnonzero(owner == 0)
    a2 = np.flatnonzero(owner == 1)
    c1a1, c2a1 = float(V[0, a1].sum()), float(V[1, a1].sum())
    c2a2 = float(V[1, a2].sum())
    if a2.size == 0:
        raise PreconditionError("agent 2 holds nothing; cannot be envious")
    worst = float(np.max(V[1, a2]))
    if c2a2 - worst <= c2a1 + 1e-12:
        raise PreconditionError("allocation is already EF1 for agent 2")
    if c1a1 > c2a1 + 1e-12:
        raise PreconditionError("swap rule applies (c1(a_1) > c2(a_1))")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(V[1, a2] > 0, V[0, a2] / np.maximum(V[1, a2], 1e-300), math.inf)
    t_star = int(a2[int(np.argmin(ratios))])
    new_owner = owner.copy()
    new_owner[t_star] = 0
    return IntegralAllocation(new_owner)


def sample_instance(rng: np.random.Generator, n: int, m: int, kind: str) -> Instance:
    """Entries i.i.d. uniform(0.05, 1), rows renormalized to sum 1.

    Bounded away from zero so p < 0 objectives stay finite.
    """
    v = rng.uniform(0.05, 1.0, size=(n, m))
    v = v / v.sum(axis=1)[:, None]
    return Instance(kind, v)


def sample_sparse_goods(
    rng: np.random.Generator, n: int, m: int, zero_prob: float = 0.3
) -> Instance:
    """Goods instance with ~30% zero entries, exercising zero handling."""
    while True:
        v = rng.uniform(0.05, 1.0, size=(n, m))
        v[rng.random(size=(n, m)) < zero_prob] = 0.0
        if np.all(v.sum(axis=1) > 0) and np.all(v.sum(axis=0) > 0):
            return Instance(GOODS, v / v.sum(axis=1)[:, None])
