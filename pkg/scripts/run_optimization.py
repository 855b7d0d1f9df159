"""Grid-search experiment: both objectives over the default policy grid.

Prints the per-T row minima and the two-dimensional argmin for the
asymptotic cost rate and the transient cost rate, and writes the full
objective matrices as CSV.
"""

import argparse
import time
from pathlib import Path

from cbmlife.cli import parse_config
from cbmlife.optimize import (
    optimize_asymptotic,
    optimize_transient,
    write_matrix_csv,
    write_report_json,
)
from cbmlife.simulate import SimulationConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="configs/default.cfg")
    parser.add_argument("--samples", type=int, default=50_000)
    parser.add_argument("--seed", type=int, default=20_260_824)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out-dir", default="out")
    args = parser.parse_args()

    rc = parse_config(args.config)
    cfg = SimulationConfig(n_samples=args.samples, master_seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    for name, run in (
        ("asymptotic", lambda: optimize_asymptotic(
            rc.model, rc.costs, rc.grid, cfg, rc.life, processes=args.workers)),
        ("transient", lambda: optimize_transient(
            rc.model, rc.costs, rc.life, rc.grid, cfg, processes=args.workers)),
    ):
        start = time.perf_counter()
        result = run()
        elapsed = time.perf_counter() - start
        print(f"\n== {name} objective ({elapsed:.1f}s) ==")
        for i, T in enumerate(result.T_values):
            j = result.values[i].argmin()
            print(
                f"  T={T:5.1f}: min over M at M={result.M_values[j]:5.1f} "
                f"value={result.values[i, j]:.4f} "
                f"(stderr {result.stderr[i, j]:.4f})"
            )
        print(
            f"  argmin: T={result.T_opt:g}, M={result.M_opt:g}, "
            f"minimum={result.minimum:.4f}"
        )
        write_matrix_csv(result, out / f"{name}_matrix.csv")
        write_report_json(result, out / f"{name}_report.json")


if __name__ == "__main__":
    main()
