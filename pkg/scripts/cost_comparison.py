"""Expected cost of growing W_N with FG vs FGF, optionally checked by Monte Carlo."""
import argparse

from wfusion.fusion import Gate
from wfusion.strategy.cost import STRATEGIES, CostModel, RecyclePolicy, expected_cost
from wfusion.strategy.montecarlo import monte_carlo_growth


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-target", type=int, default=16)
    ap.add_argument("--ancilla-cost", type=float, default=0.1)
    ap.add_argument("--policy", choices=[p.value for p in RecyclePolicy], default="discard")
    ap.add_argument("--strategy", choices=STRATEGIES, default="balanced-tree")
    ap.add_argument("--mc", type=int, default=0, help="Monte Carlo trials per row (0 = skip)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    model = CostModel(recycle_policy=args.policy, ancilla_cost=args.ancilla_cost)
    header = f"{'N':>3} {'FG':>12} {'FGF':>12} {'ratio':>7}"
    if args.mc:
        header += f" {'z(FG)':>7} {'z(FGF)':>7}"
    print(header)
    for n in range(3, args.max_target + 1):
        row = {g: expected_cost(n, g, model, args.strategy).expected_cost_units for g in Gate}
        line = f"{n:>3} {row[Gate.FG]:>12.4f} {row[Gate.FGF]:>12.4f} {row[Gate.FGF] / row[Gate.FG]:>7.3f}"
        if args.mc:
            for g in Gate:
                s = monte_carlo_growth(n, g, model, args.strategy, trials=args.mc, seed=args.seed)
                line += f" {(s.mean_cost_units - row[g]) / s.stderr('cost_units'):>7.2f}"
        print(line)


if __name__ == "__main__":
    main()
