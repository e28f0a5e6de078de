"""Monte Carlo check of the first-order MSEs on a moderate-CV synthetic population.

Usage: python scripts/mc_validation.py [replications] [seed]
"""

import sys
import time

from auxmean import report
from auxmean.montecarlo import McConfig, generate_synthetic, standard_estimators, validate_first_order
from auxmean.sampling import MomentSummary, summarize


def main(argv):
    reps = int(argv[0]) if argv else 200_000
    seed = int(argv[1]) if len(argv) > 1 else 7
    target = MomentSummary.from_coefficients(100.0, 50.0, 0.3, 0.3, 0.8, 3.0)
    frame = generate_synthetic(1000, target, seed=1)
    m = summarize(frame)
    t0 = time.perf_counter()
    table = validate_first_order(frame, McConfig(reps, 50, seed, standard_estimators(m, 50, frame.N)), m)
    sys.stdout.write(report.validation_to_markdown(table))
    print(f"\n{reps} replications in {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main(sys.argv[1:])
