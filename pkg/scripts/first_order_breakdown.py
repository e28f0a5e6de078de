"""Where the first-order MSEs stop tracking simulation.

A 200-unit population is sampled at n = 50 over a grid of C_y and C_x.
The deviation hardly changes between C_y = 0.1 and C_y = 15 and grows with
C_x, so a large C_x (2 in the highly skewed published population) is what
makes such a population a poor simulation target.
"""

import sys

from auxmean.montecarlo import first_order_breakdown


def main(argv):
    reps = int(argv[0]) if argv else 50_000
    rows = first_order_breakdown(replications=reps)
    print("| C_y | C_x | estimator | analytic MSE | empirical MSE | rel. dev. |")
    print("|---|---|---|---|---|---|")
    for r in rows:
        print(f"| {r.cy:g} | {r.cx:g} | {r.estimator} | {r.analytic_mse:.6g} | {r.emp_mse:.6g} | {r.rel_deviation:+.4f} |")


if __name__ == "__main__":
    main(sys.argv[1:])
