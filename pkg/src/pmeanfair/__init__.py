"""Normalized p-mean fair division toolkit.

Compute p-mean optimal divisible allocations of goods and chores,
extract Fisher market equilibria from the KKT certificates, round them
to fair integral allocations, audit fairness and efficiency notions,
and reproduce the theorem-level experiments.
"""

from .core import (
    CHORES,
    GOODS,
    FractionalAllocation,
    Instance,
    IntegralAllocation,
    NormalizedInstance,
    bundle_value,
    bundle_values,
    instance_from_dict,
    load_instance,
    normalize,
    prop_share,
    save_instance,
)
from .errors import (
    ConvergenceError,
    DegenerateOptimum,
    DimensionError,
    DomainError,
    InvalidInstance,
    NumericalError,
    ParamError,
    PMeanFairError,
    PreconditionError,
    ScaleError,
    UnsupportedRegime,
)
from .exact import (
    OptimaSet,
    ef1_transfer_step,
    enumerate_optima,
    grid_oracle_divisible,
    lemma_chores_algebra_predicate,
    lemma_goods_algebra_predicate,
    lemma_squeeze_predicate,
    sample_instance,
    sample_sparse_goods,
)
from .fairness import (
    FairnessReport,
    Witness,
    check_ef,
    check_efk,
    check_fpo,
    check_po_integral,
    check_prop,
    check_propk,
)
from .market import (
    ChoresEquilibrium,
    EquilibriumVerdict,
    GoodsEquilibrium,
    check_chores_equilibrium,
    check_goods_equilibrium,
    mbb_set,
    mrc_set,
)
from .paperlab import (
    EXPERIMENTS,
    GENERATORS,
    ExperimentReport,
    Row,
    discretize,
    generate,
    maximin_allocation,
    run_all,
    run_experiment,
)
from .rounding import RoundingOutcome, round_chores, round_goods
from .solver import (
    KktCertificate,
    SolverConfig,
    extract_chores_equilibrium,
    extract_goods_equilibrium,
    kkt_certificate,
    kkt_residual,
    solve_chores,
    solve_goods,
)
from .welfare import normalized_p_mean, p_mean, prop_bound, surrogate_objective

__version__ = "0.1.0"

__all__ = [
    "CHORES",
    "GOODS",
    "ChoresEquilibrium",
    "ConvergenceError",
    "DegenerateOptimum",
    "DimensionError",
    "DomainError",
    "EquilibriumVerdict",
    "ExperimentReport",
    "EXPERIMENTS",
    "FairnessReport",
    "FractionalAllocation",
    "GENERATORS",
    "GoodsEquilibrium",
    "Instance",
    "IntegralAllocation",
    "InvalidInstance",
    "KktCertificate",
    "NormalizedInstance",
    "NumericalError",
    "OptimaSet",
    "ParamError",
    "PMeanFairError",
    "PreconditionError",
    "RoundingOutcome",
    "Row",
    "ScaleError",
    "SolverConfig",
    "UnsupportedRegime",
    "Witness",
    "bundle_value",
    "bundle_values",
    "check_chores_equilibrium",
    "check_ef",
    "check_efk",
    "check_fpo",
    "check_goods_equilibrium",
    "check_po_integral",
    "check_prop",
    "check_propk",
    "discretize",
    "ef1_transfer_step",
    "enumerate_optima",
    "extract_chores_equilibrium",
    "extract_goods_equilibrium",
    "generate",
    "grid_oracle_divisible",
    "instance_from_dict",
    "kkt_certificate",
    "kkt_residual",
    "lemma_chores_algebra_predicate",
    "lemma_goods_algebra_predicate",
    "lemma_squeeze_predicate",
    "load_instance",
    "maximin_allocation",
    "mbb_set",
    "mrc_set",
    "normalize",
    "normalized_p_mean",
    "p_mean",
    "prop_bound",
    "prop_share",
    "round_chores",
    "round_goods",
    "run_all",
    "run_experiment",
    "sample_instance",
    "sample_sparse_goods",
    "save_instance",
    "solve_chores",
    "solve_goods",
    "surrogate_objective",
]
