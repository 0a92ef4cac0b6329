"""Command-line interface.

Subcommands:

  solve      optimize the normalized p-mean of a divisible instance
  round      round a solved equilibrium to an integral allocation
  enumerate  brute-force the best integral allocation(s)
  oracle     grid-search the best fractional allocation
  reproduce  run the experiment suite and emit a CSV report
  generate   write a named instance to a JSON file

Instance files are JSON: {"kind": "goods"|"chores", "values": [[...]]}.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys

import numpy as np

from .core import (
    GOODS,
    FractionalAllocation,
    Instance,
    instance_from_dict,
    load_instance,
    save_instance,
)
from .errors import PMeanFairError
from .fairness import check_ef, check_fpo, check_prop, check_propk
from .market import ChoresEquilibrium, GoodsEquilibrium
from .paperlab import EXPERIMENTS, GENERATORS, generate, run_experiment
from .report import render_figures, write_csv
from .rounding import round_chores, round_goods
from .solver import (
    SolverConfig,
    extract_chores_equilibrium,
    extract_goods_equilibrium,
    solve_chores,
    solve_goods,
)
from .welfare import P_CLAMP, normalized_p_mean, prop_bound

_P_HELP = (
    "p-mean exponent; |p| > 700 is treated as the limit (min for "
    "p = -inf, max for +inf) when evaluating welfare, and is rejected "
    "by the solver, which needs finite p"
)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _report_dict(report) -> dict:
    return json.loads(report.to_json())


def _audit(instance: Instance, allocation: FractionalAllocation, p: float) -> dict:
    beta = 1.0 if instance.kind == GOODS else prop_bound(instance.n, p)
    return {
        "prop": _report_dict(check_prop(instance, allocation, beta)),
        "ef": _report_dict(check_ef(instance, allocation, 1.0)),
        "fpo": _report_dict(check_fpo(instance, allocation)),
    }


def _cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    p = args.p
    if abs(p) > P_CLAMP:
        print(
            f"error: solver requires finite p with |p| <= {P_CLAMP}; "
            "use 'oracle' for extreme exponents",
            file=sys.stderr,
        )
        return 2
    config = SolverConfig(kkt_tolerance=args.tol, max_iterations=args.max_iterations)
    if instance.kind == GOODS:
        allocation, cert = solve_goods(instance, p, config)
        eq = extract_goods_equilibrium(instance, allocation, p)
        market = {"prices": eq.prices.tolist(), "budgets": eq.budgets.tolist()}
    else:
        allocation, cert = solve_chores(instance, p, config)
        eq = extract_chores_equilibrium(instance, allocation, p)
        market = {"rewards": eq.rewards.tolist(), "earnings": eq.earnings.tolist()}
    _emit(
        {
            "instance": instance.to_dict(),
            "p": p,
            "objective": normalized_p_mean(instance, allocation, p),
            "allocation": allocation.x.tolist(),
            "certificate": {
                "stationarity_residual": cert.stationarity_residual,
                "complementarity_residual": cert.complementarity_residual,
                "residual": cert.residual,
            },
            "equilibrium": market,
            "fairness": _audit(instance, allocation, p),
        },
        args.out,
    )
    return 0


def _cmd_round(args) -> int:
    with open(args.equilibrium) as fh:
        data = json.load(fh)
    instance = instance_from_dict(data["instance"])
    p = float(data["p"])
    allocation = FractionalAllocation(np.asarray(data["allocation"], float))
    market = data["equilibrium"]
    if instance.kind == GOODS:
        eq = GoodsEquilibrium(
            allocation=allocation,
            prices=np.asarray(market["prices"], float),
            budgets=np.asarray(market["budgets"], float),
        )
        outcome = round_goods(eq, instance)
        beta = 1.0
    else:
        eq = ChoresEquilibrium(
            allocation=allocation,
            rewards=np.asarray(market["rewards"], float),
            earnings=np.asarray(market["earnings"], float),
        )
        outcome = round_chores(eq, instance, p)
        beta = prop_bound(instance.n, p)
    _emit(
        {
            "instance": instance.to_dict(),
            "p": p,
            "owner": outcome.allocation.owner.tolist(),
            "adjusted": outcome.adjusted.tolist(),
            "witness": {str(k): int(v) for k, v in outcome.witness.items()},
            "prop1": _report_dict(check_propk(instance, outcome.allocation, beta, 1)),
            "fpo": _report_dict(
                check_fpo(instance, outcome.allocation.as_fractional(instance.n))
            ),
        },
        args.out,
    )
    return 0


def _cmd_enumerate(args) -> int:
    from .exact import enumerate_optima

    instance = load_instance(args.instance)
    p = args.p
    if abs(p) > P_CLAMP:
        p = float("inf") if p > 0 else float("-inf")
    result = enumerate_optima(instance, p)
    optima = result.optima if args.all_optima else result.optima[:1]
    _emit(
        {
            "objective": result.objective,
            "count": len(result.optima),
            "optima": [a.owner.tolist() for a in optima],
        },
        args.out,
    )
    return 0


def _cmd_oracle(args) -> int:
    from .exact import grid_oracle_divisible

    instance = load_instance(args.instance)
    p = args.p
    if abs(p) > P_CLAMP:
        p = float("inf") if p > 0 else float("-inf")
    allocation, objective = grid_oracle_divisible(instance, p, args.resolution)
    _emit(
        {"objective": objective, "allocation": allocation.x.tolist()},
        args.out,
    )
    return 0


def _cmd_reproduce(args) -> int:
    if args.all:
        names = list(EXPERIMENTS)
    elif args.experiment:
        names = [args.experiment]
    else:
        print("error: pass --all or --experiment <id>", file=sys.stderr)
        return 2
    reports = []
    for name in names:
        report = run_experiment(name, args.seed)
        reports.append(report)
        for r in report.rows:
            print(f"[{r.verdict:4s}] {r.experiment}: {r.claim} "
                  f"(measured {r.measured:.6g}, bound {r.bound:.6g})")
    if args.csv:
        from pathlib import Path

        csv_path = Path(args.csv) / "report.csv"
        write_csv(reports, csv_path)
        print(f"wrote {csv_path}")
        if args.figures:
            for f in render_figures(reports, csv_path.parent):
                print(f"wrote {f}")
    return 0 if all(rep.passed for rep in reports) else 1


def _cmd_generate(args) -> int:
    fn = GENERATORS[args.name]
    accepted = set(inspect.signature(fn).parameters)
    supplied = {
        k: v
        for k, v in {
            "beta": args.beta, "n": args.n, "m": args.m, "p": args.p,
            "eps": args.eps, "delta": args.delta,
            "v11": args.v11, "v21": args.v21,
        }.items()
        if v is not None
    }
    unknown = set(supplied) - accepted
    if unknown:
        print(f"error: {args.name} does not take {sorted(unknown)}; "
              f"it takes {sorted(accepted)}", file=sys.stderr)
        return 2
    instance = generate(args.name, **supplied)
    if args.out:
        save_instance(instance, args.out)
    else:
        print(json.dumps(instance.to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmeanfair",
        description="Normalized p-mean fair division toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="optimize a divisible instance")
    sp.add_argument("--instance", required=True, help="instance JSON file")
    sp.add_argument("--p", type=float, required=True, help=_P_HELP)
    sp.add_argument("--tol", type=float, default=1e-8, help="KKT tolerance")
    sp.add_argument("--max-iterations", type=int, default=200000)
    sp.add_argument("--out", help="write result JSON here (default: stdout)")
    sp.set_defaults(func=_cmd_solve)

    rp = sub.add_parser("round", help="round a solved equilibrium")
    rp.add_argument("--equilibrium", required=True,
                    help="JSON produced by 'solve'")
    rp.add_argument("--out", help="write result JSON here (default: stdout)")
    rp.set_defaults(func=_cmd_round)

    ep = sub.add_parser("enumerate", help="brute-force integral optima")
    ep.add_argument("--instance", required=True)
    ep.add_argument("--p", type=float, required=True, help=_P_HELP)
    ep.add_argument("--all-optima", action="store_true",
                    help="report the full tie set, not just one optimum")
    ep.add_argument("--out")
    ep.set_defaults(func=_cmd_enumerate)

    op = sub.add_parser("oracle", help="grid-search fractional optimum")
    op.add_argument("--instance", required=True)
    op.add_argument("--p", type=float, required=True, help=_P_HELP)
    op.add_argument("--resolution", type=int, default=1000)
    op.add_argument("--out")
    op.set_defaults(func=_cmd_oracle)

    xp = sub.add_parser("reproduce", help="run the experiment suite")
    xp.add_argument("--all", action="store_true", help="run every experiment")
    xp.add_argument("--experiment", choices=sorted(EXPERIMENTS),
                    help="run a single experiment")
    xp.add_argument("--seed", type=int, default=42)
    xp.add_argument("--csv", help="directory for report.csv")
    xp.add_argument("--figures", action="store_true",
                    help="also render one PNG per experiment next to the CSV")
    xp.set_defaults(func=_cmd_reproduce)

    gp = sub.add_parser("generate", help="write a named instance")
    gp.add_argument("--name", required=True, choices=sorted(GENERATORS))
    gp.add_argument("--beta", type=int)
    gp.add_argument("--n", type=int)
    gp.add_argument("--m", type=int)
    gp.add_argument("--p", type=float)
    gp.add_argument("--eps", type=float)
    gp.add_argument("--delta", type=float)
    gp.add_argument("--v11", type=float)
    gp.add_argument("--v21", type=float)
    gp.add_argument("--out", help="instance JSON path (default: stdout)")
    gp.set_defaults(func=_cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PMeanFairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
