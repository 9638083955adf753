"""Print the FG and FGF input-case tables and the simulated vs closed-form success grid."""
import argparse

from wfusion.fusion import BranchClass, Gate, enumerate_input_cases, fuse
from wfusion.strategy.closed_form import p_success


def case_table(n, m):
    fg = enumerate_input_cases(n, m, Gate.FG)
    fgf = {c.pattern: c for c in enumerate_input_cases(n, m, Gate.FGF)}
    print(f"input cases for n={n}, m={m}")
    print(f"{'pattern':>8} {'prob':>8} {'FG':>9} {'FGF':>9}")
    for c in fg:
        print(f"{c.pattern:>8} {str(c.probability):>8} {c.cls.value:>9} {fgf[c.pattern].cls.value:>9}")


def grid(max_size):
    print(f"\n{'n':>3} {'m':>3} {'FG sim':>10} {'FGF sim':>10} {'gain':>8} {'max err':>9}")
    for n in range(2, max_size + 1):
        for m in range(n, max_size + 1):
            fg, fgf = fuse(n, m, Gate.FG), fuse(n, m, Gate.FGF)
            err = max(abs(fg.p_success - float(p_success(n, m, Gate.FG))),
                      abs(fgf.p_success - float(p_success(n, m, Gate.FGF))))
            gain = fgf.exact[BranchClass.SUCCESS] - fg.exact[BranchClass.SUCCESS]
            print(f"{n:>3} {m:>3} {fg.p_success:>10.6f} {fgf.p_success:>10.6f} {str(gain):>8} {err:>9.1e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--max-size", type=int, default=6)
    args = ap.parse_args()
    case_table(args.n, args.m)
    grid(args.max_size)


if __name__ == "__main__":
    main()
