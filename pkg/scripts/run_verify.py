#!/usr/bin/env python3
"""Compare Howard's trace on P_n with both predicted policy families.

Prints one line per n: iteration count, whether the trace matches the
sequence built from the literal sigma definition, and whether it matches
the "persistent" sigma family, plus the first divergence of the former.

    python3 scripts/run_verify.py --n-max 15
"""

import argparse
import sys

from howard_lb.lowerbound import PnLayout, verify_lemma, verify_theorem


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-max", type=int, default=12)
    args = parser.parse_args()

    print(f"{'n':>3} {'iters':>6} {'expected':>8}  literal  persistent  first literal divergence (expected vs actual)")
    all_persistent = True
    for n in range(1, args.n_max + 1):
        lit = verify_theorem(n, variant="literal")
        per = verify_theorem(n, variant="persistent")
        per_ok = per.matched and verify_lemma(n, "persistent").ok
        all_persistent &= per_ok
        where = ""
        if lit.first_divergence is not None:
            div = lit.first_divergence
            diffs = [f"{v}: {e} vs {a}" for v, e, a in zip(
                PnLayout(n).names(), div["expected"], div["actual"]) if e != a]
            where = f"step {div['step']} ({'; '.join(diffs)})"
        print(f"{n:>3} {lit.iteration_count:>6} {lit.expected:>8}  "
              f"{str(lit.matched):<7}  {str(per_ok):<10}  {where}")
    return 0 if all_persistent else 1


if __name__ == "__main__":
    sys.exit(main())
