"""The generalized p-mean family and the solver surrogates.

w_p(s) = ((1/n) * sum s_i^p)^(1/p) for finite nonzero p, with the usual
continuous limits: geometric mean at p = 0, min at p = -inf, max at
p = +inf.  The normalized p-mean applies w_p to bundle values of the
row-normalized instance.

The solvers never optimize w_p directly.  For goods with p < 0 they
minimize sum_i v_i(x_i)^p (writing k = -p, this is sum v_i^{-k}); for
p = 0 they minimize -sum_i log v_i(x_i); for chores with p >= 1 they
minimize sum_i c_i(x_i)^p.  Each surrogate is a strictly monotone
transform of w_p on its regime, so the optima coincide.
"""

from __future__ import annotations

import math

import numpy as np

from .core import GOODS, Instance, bundle_values, normalize
from .errors import DomainError, ParamError, UnsupportedRegime

#: |p| beyond this overflows binary64 powers for typical inputs;
#: such p are clamped to the corresponding infinite limit.
P_CLAMP = 700.0


def _clamp(p: float) -> float:
    if p > P_CLAMP:
        return math.inf
    if p < -P_CLAMP:
        return -math.inf
    return p


def p_mean(values, p: float) -> float:
    """((1/n) sum s_i^p)^(1/p) with limits at p in {0, -inf, +inf}.

    Zero entries with p <= 0 give 0, the continuous limit.
    """
    s = np.asarray(values, dtype=float)
    if s.size == 0:
        raise DomainError("p_mean of an empty vector")
    if np.any(s < 0):
        raise DomainError("p_mean arguments must be nonnegative")
    p = _clamp(p)
    if p == math.inf:
        return float(np.max(s))
    if p == -math.inf:
        return float(np.min(s))
    if p <= 0 and np.any(s == 0):
        return 0.0
    if abs(p) < 1e-150:
        # exp of mean log, never a limit of powers (cancellation-safe).
        # Below 1e-150 the p-mean differs from the geometric mean by
        # O(p * var(log s)), far under one ulp, while computing with
        # such p risks subnormal intermediates with reduced precision.
        return float(np.exp(np.mean(np.log(s))))
    if abs(p) < 0.5:
        # s**p collapses toward 1 for tiny p; expm1/log1p keep the
        # O(p) information that the final 1/p root amplifies
        mean = np.mean(np.expm1(p * np.log(s)))
        return float(np.exp(np.log1p(mean) / p))
    return float(np.mean(s**p) ** (1.0 / p))


def normalized_p_mean(instance: Instance, allocation, p: float) -> float:
    """p-mean of the normalized bundle values under the allocation."""
    s = bundle_values(normalize(instance), allocation)
    return p_mean(np.maximum(s, 0.0), p)


def surrogate_objective(instance: Instance, allocation, p: float) -> float:
    """The convex objective the solver minimizes; see module docstring.

    Accepts goods with p <= 0 and chores with p >= 1 only.
    """
    norm = instance if _is_normalized(instance) else normalize(instance)
    s = bundle_values(norm, allocation)
    if instance.kind == GOODS:
        if p > 0:
            raise UnsupportedRegime("goods surrogate requires p <= 0")
        if np.any(s <= 0):
            return math.inf
        if p == 0:
            return float(-np.sum(np.log(s)))
        return float(np.sum(s**p))
    if p < 1:
        raise UnsupportedRegime("chores surrogate requires p >= 1")
    return float(np.sum(np.maximum(s, 0.0) ** p))


def _is_normalized(instance: Instance) -> bool:
    return bool(np.all(np.abs(instance.row_sums - 1.0) <= 1e-12))


def prop_bound(n: int, p: float) -> float:
    """n^(1/p), the proportionality factor for chores with p >= 1."""
    if n < 1:
        raise ParamError("n must be >= 1")
    if p < 1:
        raise ParamError("prop_bound requires p >= 1")
    return float(n ** (1.0 / p))
