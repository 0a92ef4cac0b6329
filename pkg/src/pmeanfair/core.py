"""Instances and allocations.

An instance is a nonnegative n x m matrix of values (goods) or costs
(chores).  Rows are agents, columns are items.  Normalizing divides each
row by its sum, so every agent's stake in the full item set is 1; all
fairness and welfare quantities downstream are computed on these
normalized rows.

Everything here is immutable after construction and all operations are
pure, so instances and allocations can be shared freely across threads.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInstance

GOODS = "goods"
CHORES = "chores"

#: Desk scale: instances are validated to be at most 64 x 64.
MAX_AGENTS = 64
MAX_ITEMS = 64


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


class Instance:
    """A goods or chores instance with a dense nonnegative matrix.

    Goods columns with no positive entry are dropped at construction
    (with a warning): no agent wants them, and keeping them would make
    zero-utility outcomes look unavoidable.  For chores, zero-cost
    entries are recorded in ``zero_cost`` so solvers can pre-assign
    those chores to agents who do not mind them.
    """

    def __init__(self, kind: str, values) -> None:
        if kind not in (GOODS, CHORES):
            raise InvalidInstance(f"unknown kind {kind!r}")
        values = np.array(values, dtype=float)
        if values.ndim != 2:
            raise InvalidInstance("values must be a 2-D matrix")
        n, m = values.shape
        if n < 1 or m < 1:
            raise InvalidInstance("need at least one agent and one item")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise InvalidInstance(f"non-finite entry at row {i}, column {j}")
        if np.any(values < 0):
            i, j = np.argwhere(values < 0)[0]
            raise InvalidInstance(f"negative entry at row {i}, column {j}")
        if kind == GOODS:
            dead = np.all(values == 0, axis=0)
            if np.any(dead):
                cols = np.flatnonzero(dead)
                warnings.warn(
                    f"dropping all-zero goods column(s) {cols.tolist()}",
                    stacklevel=2,
                )
                values = values[:, ~dead]
                if values.shape[1] == 0:
                    raise InvalidInstance("all goods columns are zero")
        row_sums = values.sum(axis=1)
        if np.any(row_sums <= 0):
            i = int(np.argmax(row_sums <= 0))
            raise InvalidInstance(f"row {i} sums to zero")
        self._kind = kind
        self._values = _frozen(values)
        if kind == CHORES:
            self._zero_cost = tuple(
                (int(i), int(j)) for i, j in np.argwhere(values == 0)
            )
        else:
            self._zero_cost = ()

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.shape[0]

    @property
    def m(self) -> int:
        return self._values.shape[1]

    @property
    def zero_cost(self) -> tuple:
        """(agent, chore) pairs with zero cost; empty for goods."""
        return self._zero_cost

    @property
    def row_sums(self) -> np.ndarray:
        return self._values.sum(axis=1)

    def to_dict(self) -> dict:
        return {"kind": self._kind, "values": self._values.tolist()}

    def __repr__(self) -> str:  # pragma: no cover
        return f"Instance(kind={self._kind!r}, n={self.n}, m={self.m})"


class NormalizedInstance(Instance):
    """An instance whose rows each sum to 1."""

    def __init__(self, kind: str, values) -> None:
        super().__init__(kind, values)
        if np.any(np.abs(self.row_sums - 1.0) > 1e-12):
            i = int(np.argmax(np.abs(self.row_sums - 1.0)))
            raise InvalidInstance(f"row {i} of normalized instance does not sum to 1")


def normalize(instance: Instance) -> NormalizedInstance:
    """Divide each row by its sum.  Idempotent."""
    v = instance.values / instance.row_sums[:, None]
    # Guard against accumulated rounding: force exact row sums.
    v = v / v.sum(axis=1)[:, None]
    return NormalizedInstance(instance.kind, v)


@dataclass(frozen=True)
class FractionalAllocation:
    """x[i, j] = fraction of item j held by agent i; columns sum to 1."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise DimensionError("allocation must be a 2-D matrix")
        if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
            raise InvalidInstance("allocation entries must lie in [0, 1]")
        col = x.sum(axis=0)
        if np.any(np.abs(col - 1.0) > 1e-9):
            j = int(np.argmax(np.abs(col - 1.0)))
            raise InvalidInstance(f"column {j} sums to {col[j]}, expected 1")
        object.__setattr__(self, "x", _frozen(np.clip(x, 0.0, 1.0)))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class IntegralAllocation:
    """owner[j] = the agent holding item j."""

    owner: np.ndarray

    def __post_init__(self):
        owner = np.asarray(self.owner, dtype=int)
        if owner.ndim != 1:
            raise DimensionError("owner must be a 1-D array")
        if np.any(owner < 0):
            raise InvalidInstance("owner indices must be nonnegative")
        owner = owner.copy()
        owner.setflags(write=False)
        object.__setattr__(self, "owner", owner)

    @property
    def m(self) -> int:
        return self.owner.shape[0]

    def matrix(self, n: int) -> np.ndarray:
        """The 0/1 allocation matrix with n agent rows."""
        if np.any(self.owner >= n):
            raise DimensionError("owner index out of range")
        x = np.zeros((n, self.m))
        x[self.owner, np.arange(self.m)] = 1.0
        return x

    def bundle(self, agent: int) -> list:
        return [int(j) for j in np.flatnonzero(self.owner == agent)]

    def as_fractional(self, n: int) -> FractionalAllocation:
        return FractionalAllocation(self.matrix(n))


def allocation_matrix(instance: Instance, allocation) -> np.ndarray:
    """The n x m matrix of either allocation flavor."""
    if isinstance(allocation, IntegralAllocation):
        return allocation.matrix(instance.n)
    if isinstance(allocation, FractionalAllocation):
        x = allocation.x
    else:
        x = np.asarray(allocation, dtype=float)
    if x.shape != (instance.n, instance.m):
        raise DimensionError(
            f"allocation shape {x.shape} does not match instance "
            f"({instance.n}, {instance.m})"
        )
    return x


def bundle_value(instance: Instance, allocation, agent: int) -> float:
    """Sum of x_ij * values_ij over items, for one agent (additive)."""
    if not 0 <= agent < instance.n:
        raise DimensionError(f"agent index {agent} out of range")
    x = allocation_matrix(instance, allocation)
    return float(x[agent] @ instance.values[agent])


def bundle_values(instance: Instance, allocation) -> np.ndarray:
    """All agents' bundle values at once."""
    x = allocation_matrix(instance, allocation)
    return np.einsum("ij,ij->i", x, instance.values)


def prop_share(instance: Instance, agent: int) -> float:
    """The agent's 1/n share of their total value/cost."""
    if not 0 <= agent < instance.n:
        raise DimensionError(f"agent index {agent} out of range")
    return float(instance.row_sums[agent] / instance.n)


def instance_from_dict(data: dict) -> Instance:
    try:
        kind = data["kind"]
        values = data["values"]
    except (KeyError, TypeError) as exc:
        raise InvalidInstance(f"missing field in instance JSON: {exc}") from exc
    arr = np.asarray(values, dtype=float)
    # desk-scale bound applies to externally loaded instances
    if arr.ndim == 2 and (arr.shape[0] > MAX_AGENTS or arr.shape[1] > MAX_ITEMS):
        raise InvalidInstance(
            f"instance {arr.shape[0]}x{arr.shape[1]} exceeds the supported "
            f"{MAX_AGENTS}x{MAX_ITEMS}"
        )
    return Instance(kind, values)


def load_instance(path) -> Instance:
    """Read {"kind": ..., "values": [[...], ...]} from a JSON file."""
    with open(path) as fh:
        data = json.load(fh)
    return instance_from_dict(data)


def save_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance.to_dict(), fh, indent=2)
        fh.write("\n")
