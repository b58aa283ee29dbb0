"""
Generate resonance files with missing levels for robustness studies
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from modules import euler_estimator as ee  # noqa: E402
from modules import graph_model as gm  # noqa: E402
from modules import resonance_io as rio  # noqa: E402
from modules import spectrum_solver as ss  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__.strip())
    parser.add_argument("--complete", type=int, default=5)
    parser.add_argument("--lmin", type=float, default=0.202)
    parser.add_argument("--total", type=float, default=3.949)
    parser.add_argument("--count", type=int, default=132)
    parser.add_argument("--drop-count", type=int, default=2)
    parser.add_argument("--drop-min-index", type=int, default=81)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    parser.add_argument("--out-dir", default="data")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)

    print("=" * 80)
    print("GENERATING RESONANCE FILES WITH MISSING LEVELS")
    print("=" * 80)

    print(f"\n1. Solving K_{args.complete} (l_min={args.lmin} m, L={args.total} m) for {args.count} levels")
    graph = gm.gen_complete(args.complete, (args.lmin, args.total), seed=7)
    summary = gm.summarize(graph)
    spectrum = ss.solve(graph, args.count)
    clean = rio.spectrum_to_resonances(spectrum, label=f"K{args.complete} clean")
    rio.write_resonance_file(clean, out_dir / "resonances_clean.csv")
    print(f"   [OK] {len(spectrum)} levels, written to {out_dir / 'resonances_clean.csv'}")

    print(f"\n2. Dropping {args.drop_count} level(s) with index >= {args.drop_min_index}")
    grid = ee.default_t_grid(summary.t0)
    for seed in args.seeds:
        policy = rio.PerturbPolicy(drop_min_index=args.drop_min_index, drop_count=args.drop_count, seed=seed)
        corrupted = rio.perturb(spectrum, policy)
        plateau = ee.detect_plateau(ee.chi_curve(corrupted, len(corrupted), grid))
        flags = rio.flag_gaps(rio.counting_fluctuation(corrupted))
        path = out_dir / f"resonances_missing_seed{seed}.csv"
        rio.write_resonance_file(rio.spectrum_to_resonances(corrupted, label=f"seed {seed}"), path)
        print(f"   [OK] seed {seed}: {len(corrupted)} levels, chi={plateau.chi_estimate}, "
              f"{len(flags)} gap flag(s) -> {path}")

    print("\n" + "=" * 80)
    print("[SUCCESS] Datasets generated")
    print("=" * 80)


if __name__ == "__main__":
    main()
