"""Refit the closed-form order estimate to a fresh sweep.

Sweep minimal orders for NRTZ in the first band on a 15 x 10 grid, then fit
the nine-parameter estimate from the generic starting point and compare the
worst-case error with the built-in parameters on the same grid.
"""
import time

import numpy as np

from daceq import FitProblem, builtin_params, fit, max_estimation_error, sweep
from daceq.fitting import default_init


def main():
    t0 = time.perf_counter()
    grid = sweep("nrtz", 1, "I", workers=None)
    print(f"sweep {grid.shape[0]}x{grid.shape[1]} in {time.perf_counter() - t0:.1f}s, "
          f"{grid.metadata['design_calls']} designs")
    print("N_min, rows are B/pi, columns delta:")
    print("        " + " ".join(f"{d:7.0e}" for d in grid.delta_values))
    for B, row in zip(grid.B_values, grid.n_min):
        print(f"  {B / np.pi:5.3f} " + " ".join(f"{n:7d}" for n in row))

    builtin, table_eps = builtin_params("nrtz", 1, "I")
    ref, _ = max_estimation_error(builtin, grid)

    t0 = time.perf_counter()
    res = fit(FitProblem(grid, default_init("nrtz", 1, "I")), seed=0)
    print(f"\nbuilt-in parameters: max |N_est - N_min| = {ref:.2f} (table value {table_eps})")
    print(f"fitted parameters:   max |N_est - N_min| = {res.eps:.2f} ({time.perf_counter() - t0:.1f}s)")
    for name, value in res.params.to_dict().items():
        if name != "provenance":
            print(f"  {name} = {value: .4f}")


if __name__ == "__main__":  # the sweep runs rows in worker processes
    main()
