"""Command-line front end.

    wfusion fuse  --n 2 --m 2 --gate fgf [--json|--csv] [--branches]
    wfusion table --gate fg --n 3 --m 3
    wfusion sweep --gate fgf --n-range 2..4 --m-range 2..4 --output sweep.csv
    wfusion cost  --target 6 --gate fgf --policy discard --mc 100000 --seed 42

Every command emits one JSON document (default) or CSV table on stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from .fusion import BranchClass, Gate, enumerate_input_cases, fuse, target_state
from .qcore import fidelity
from .strategy.closed_form import p_success
from .strategy.cost import SEED_SCHEMES, STRATEGIES, CostModel, expected_cost
from .strategy.montecarlo import monte_carlo_growth

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = Path(__file__).with_name("report.schema.json")
SIM_MAX = 12
CLOSED_FORM_MAX = 10_000


def package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def prob(value: float, exact: Fraction | None = None) -> dict:
    return {"float": float(value), "exact": None if exact is None else rational(exact)}


def _finite(x: float | None):
    return x if x is None or math.isfinite(x) else None


def document(command: str, parameters: dict, results: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "parameters": parameters, "results": results}


def fmt_float(x: float) -> str:
    return format(x, ".17g")


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(v) for k, v in row.items()})
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt_float(v)
    return v


def flatten(obj: dict, prefix: str = "") -> dict:
    """Flatten nested dicts into ``a.b`` keys; probability objects become two columns."""
    out = {}
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = value
    return out


# -- command bodies ---------------------------------------------------------


def fuse_results(n: int, m: int, gate: Gate, branches: bool) -> dict:
    report = fuse(n, m, gate)
    targets = {BranchClass.SUCCESS: "W", BranchClass.RECYCLE: "W(n-1)xW(m-1)", BranchClass.FAILURE: "all-H"}
    classes = []
    for cls in BranchClass:
        members = [b for b in report.branches if b.cls is cls]
        classes.append({
            "class": cls.value,
            "probability": prob(report.probability(cls), report.exact[cls]),
            "branches": len(members),
            "min_fidelity": _finite(min((b.fidelity for b in members), default=math.nan)),
            "target": targets[cls],
        })
    results = {
        "n": n,
        "m": m,
        "gate": gate.value,
        "fused_size": report.fused_size,
        "p_success": prob(report.p_success, report.exact[BranchClass.SUCCESS]),
        "p_recycle": prob(report.p_recycle, report.exact[BranchClass.RECYCLE]),
        "p_failure": prob(report.p_failure, report.exact[BranchClass.FAILURE]),
        "success_fidelity": report.success_fidelity,
        "classes": classes,
    }
    if branches:
        rows = []
        for b in report.branches:
            rows.append({
                "occupancy_d1": b.occupancy[0],
                "occupancy_d2": b.occupancy[1],
                "pattern": b.pattern,
                "class": b.cls.value,
                "probability": prob(b.probability, b.probability_exact),
                "corrected": b.final_state is not b.post_state,
                "fidelity_uncorrected": fidelity(b.post_state, target_state(b.cls, n, m, gate)),
                "fidelity": b.fidelity,
            })
        results["branches"] = rows
    return results


def table_rows(n: int, m: int, gate: Gate) -> list[dict]:
    return [
        {"pattern": c.pattern, "probability": prob(float(c.probability), c.probability), "class": c.cls.value}
        for c in enumerate_input_cases(n, m, gate)
    ]


def sweep_rows(gate: Gate, n_range: range, m_range: range, closed_form_only: bool) -> list[dict]:
    rows = []
    for n in n_range:
        for m in m_range:
            closed = p_success(n, m, gate)
            row = {"n": n, "m": m, "gate": gate.value}
            if closed_form_only:
                row.update(p_simulated=None, p_closed_form=float(closed), p_closed_form_exact=rational(closed),
                           abs_diff=None, min_success_fidelity=None)
            else:
                report = fuse(n, m, gate, exact=False)
                row.update(
                    p_simulated=report.p_success,
                    p_closed_form=float(closed),
                    p_closed_form_exact=rational(closed),
                    abs_diff=abs(report.p_success - float(closed)),
                    min_success_fidelity=report.success_fidelity,
                )
            rows.append(row)
    return rows


def cost_results(args) -> dict:
    model = CostModel(recycle_policy=args.policy, ancilla_cost=args.ancilla_cost, fg_seed=args.fg_seed)
    result = expected_cost(args.target, args.gate, model, args.strategy)
    cost = {
        "target_size": result.target_size,
        "strategy_name": result.strategy_name,
        "gate": result.gate.value,
        "policy": result.policy.value,
        "reachable": result.reachable,
        "expected_bell_pairs": _finite(result.expected_bell_pairs),
        "expected_ancillas": _finite(result.expected_ancillas),
        "expected_attempts": _finite(result.expected_attempts),
        "expected_seed_attempts": _finite(result.expected_seed_attempts),
        "expected_cost_units": _finite(result.expected_cost_units),
        "exact": None if result.exact is None else {k: rational(v) for k, v in result.exact.items()},
    }
    out = {"cost": cost}
    if args.mc:
        stats = monte_carlo_growth(args.target, args.gate, model, args.strategy,
                                   trials=args.mc, seed=args.seed, workers=args.workers)
        out["monte_carlo"] = asdict(stats)
        se_cost = math.sqrt(stats.var_cost_units / stats.trials)
        se_bell = stats.stderr("bell_pairs")
        out["discrepancy_se"] = {
            "cost_units": _finite((stats.mean_cost_units - result.expected_cost_units) / se_cost) if se_cost else None,
            "bell_pairs": _finite((stats.mean_bell_pairs - result.expected_bell_pairs) / se_bell) if se_bell else None,
        }
    return out


# -- argument parsing -------------------------------------------------------


def size_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"W state size must be an integer, got {text!r}") from None
    if value < 2:
        raise argparse.ArgumentTypeError(f"W state size must be at least the minimum size 2, got {value}")
    return value


def target_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"target must be an integer, got {text!r}") from None
    if value < 3:
        raise argparse.ArgumentTypeError(f"target size must be at least 3, got {value}")
    return value


def range_arg(text: str) -> range:
    for sep in ("..", ":", "-"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            break
    else:
        lo = hi = text
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like 2..8, got {text!r}") from None
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError(f"range {text!r} must satisfy 2 <= lo <= hi")
    return range(lo, hi + 1)


def nonneg_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"cost must be nonnegative, got {text}")
    return value


def _add_format(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON document (default)")
    g.add_argument("--csv", dest="fmt", action="store_const", const="csv", help="CSV table")
    p.set_defaults(fmt="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wfusion", description="Exact W-state fusion simulator and cost analyzer.")
    parser.add_argument("--version", action="version",
                        version=f"wfusion {package_version()} (schema {SCHEMA_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)
    gate = dict(type=Gate, choices=list(Gate), metavar="{fg,fgf}")

    p = sub.add_parser("fuse", help="simulate one fusion and report every branch class")
    p.add_argument("--n", type=size_arg, required=True)
    p.add_argument("--m", type=size_arg, required=True)
    p.add_argument("--gate", required=True, **gate)
    p.add_argument("--branches", action="store_true", help="include every detection branch")
    _add_format(p)

    p = sub.add_parser("table", help="four-row input case table")
    p.add_argument("--n", type=size_arg, required=True)
    p.add_argument("--m", type=size_arg, required=True)
    p.add_argument("--gate", required=True, **gate)
    _add_format(p)

    p = sub.add_parser("sweep", help="simulated vs closed-form success over an (n, m) grid")
    p.add_argument("--gate", required=True, **gate)
    p.add_argument("--n-range", type=range_arg, required=True)
    p.add_argument("--m-range", type=range_arg, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--closed-form-only", action="store_true",
                   help=f"skip simulation; allows sizes up to {CLOSED_FORM_MAX}")

    p = sub.add_parser("cost", help="expected resources to grow a W state")
    p.add_argument("--target", type=target_arg, required=True)
    p.add_argument("--gate", default=Gate.FGF, **gate)
    p.add_argument("--policy", choices=("discard", "reuse"), default="discard")
    p.add_argument("--strategy", choices=STRATEGIES, default="balanced-tree")
    p.add_argument("--ancilla-cost", type=nonneg_float, default=0.1)
    p.add_argument("--fg-seed", choices=sorted(SEED_SCHEMES), default="single-photon+bell")
    p.add_argument("--mc", type=int, default=0, metavar="TRIALS", help="also run a Monte Carlo check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_format(p)
    return parser


def _atomic_write(path: Path, text: str) -> None:
    path = path.resolve()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render(doc: dict, fmt: str, rows: list[dict] | None = None) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    return to_csv([flatten(r) for r in (rows if rows is not None else [doc["results"]])])


def run(argv: list[str] | None = None) -> tuple[int, str]:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "fuse":
        params = {"n": args.n, "m": args.m, "gate": args.gate.value, "branches": args.branches}
        results = fuse_results(args.n, args.m, args.gate, args.branches)
        doc = document("fuse", params, results)
        return 0, render(doc, args.fmt, results["branches"] if args.branches else results["classes"])

    if args.command == "table":
        params = {"n": args.n, "m": args.m, "gate": args.gate.value}
        rows = table_rows(args.n, args.m, args.gate)
        return 0, render(document("table", params, {"rows": rows}), args.fmt, rows)

    if args.command == "sweep":
        limit = CLOSED_FORM_MAX if args.closed_form_only else SIM_MAX
        if args.n_range[-1] > limit or args.m_range[-1] > limit:
            parser.error(f"sweep sizes must not exceed {limit} in this mode")
        params = {
            "gate": args.gate.value,
            "n_range": [args.n_range[0], args.n_range[-1]],
            "m_range": [args.m_range[0], args.m_range[-1]],
            "closed_form_only": args.closed_form_only,
        }
        rows = sweep_rows(args.gate, args.n_range, args.m_range, args.closed_form_only)
        text = render(document("sweep", params, {"rows": rows}), args.format, rows)
        try:
            _atomic_write(args.output, text)
        except OSError as exc:
            print(f"wfusion: cannot write {args.output}: {exc}", file=sys.stderr)
            return 1, ""
        return 0, ""

    if args.mc < 0:
        parser.error("--mc must be a positive number of trials")
    params = {
        "target": args.target,
        "gate": args.gate.value,
        "policy": args.policy,
        "strategy": args.strategy,
        "ancilla_cost": args.ancilla_cost,
        "fg_seed": args.fg_seed,
        "mc_trials": args.mc,
        "seed": args.seed,
    }
    results = cost_results(args)
    return 0, render(document("cost", params, results), args.fmt)


def main(argv: list[str] | None = None) -> int:
    code, text = run(argv)
    if text:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
