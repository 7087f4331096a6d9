#!/usr/bin/env python3
"""Smoke test for the spikelab Python extension.

Builds the cdylib with cargo, copies it next to this script as
spikelab.so, imports it, and exercises the main types and operations.

Usage: python3 python/smoke_test.py [--release]
"""

import math
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = 0.618033988749895


def build_module(release: bool) -> Path:
    args = ["cargo", "build", "-p", "spikelab-py"]
    profile = "debug"
    if release:
        args.append("--release")
        profile = "release"
    subprocess.run(args, cwd=ROOT, check=True)
    built = ROOT / "target" / profile / "libspikelab.so"
    dest = Path(__file__).resolve().parent / "spikelab.so"
    shutil.copyfile(built, dest)
    return dest


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main() -> None:
    release = "--release" in sys.argv
    module_path = build_module(release)
    sys.path.insert(0, str(module_path.parent))
    import spikelab

    # flows and lattices
    flow = spikelab.FlowSpec.standard_2d()
    assert flow.exponents() == [1.0, -1.0]
    approx(flow.expansion_rate(), 1.0)

    z2 = spikelab.Lattice.standard(2)
    approx(z2.lambda1("sup"), 1.0)
    e = math.e
    flowed = z2.flow(flow, 1.0)
    approx(flowed.lambda1("sup"), 1.0 / e, 1e-12)

    xv = spikelab.Lattice.from_vector([GOLDEN])
    approx(xv.lambda1("sup"), 1.0, 1e-12)
    assert xv.is_exact()

    # grids and shortest points
    grid = z2.grid([0.5, 0.5])
    approx(grid.sigma("sup"), 0.5, 1e-12)

    # hit times in closed form: (ln 4, ln 5)
    region = spikelab.BoxRegion.cube(2, 0.5)
    times = spikelab.hit_times(flow, [0.1, 2.0], region)
    assert len(times) == 1
    approx(times[0][0], math.log(4), 1e-12)
    approx(times[0][1], math.log(5), 1e-12)

    # spike points of Z^2 against the quarter cube
    quarter = spikelab.BoxRegion.cube(2, 0.25)
    hits = spikelab.grid_spike_points(flow, z2.grid([0.0, 0.0]), quarter, 5.0)
    assert len(hits) == 75, f"expected 75 spike points, got {len(hits)}"
    assert spikelab.avoid_test(flow, z2.grid([0.5, 0.5]), quarter, 0.0, 3.0)

    # orbit analysis through the exact ladder
    golden = spikelab.Lattice.from_quotients([1] * 120)
    series = spikelab.lambda1_series(flow, golden, [k * 0.01 for k in range(2001)])
    assert min(l for _, l in series) >= 0.4
    above, dips = spikelab.excursions(flow, golden, 0.1, 20.0)
    assert above == [(0.0, 20.0)] and dips == []

    masses, min_l1 = spikelab.empirical_masses(flow, golden, 50, 4)
    assert all(abs(m - 1.0) < 1e-12 for m in masses)
    assert min_l1 > 0.5

    approx(spikelab.cf_heaviness([1] * 10, 1.0, 10), 0.0)

    # bad targets and scans
    verdict, min_value, argmin_k = spikelab.bad_target_test([GOLDEN], [0.0], 0.35, 10_000)
    assert verdict and argmin_k == 1
    approx(min_value, 1.0 - GOLDEN, 1e-9)

    scan = spikelab.bad_set_scan([0.0], 0.1, 1000, 10)
    assert scan["survivor_count"] == 820

    bad, spikes, consistent = spikelab.spike_correspondence([0.5], [0.0], 0.0, 0.2, 10)
    assert not bad and spikes >= 1 and consistent

    # geometry of numbers
    sols = spikelab.minkowski_solutions([[1.0, (1 + math.sqrt(5)) / 2]], 100.0)
    assert [3, 5] in sols and [5, 8] in sols
    verdict, min_value, argmin = spikelab.bad_subspace_test(
        [[1.0, 0.0]], [0.0, 0.5], 0.4, 1000.0
    )
    assert verdict
    approx(min_value, 0.5, 1e-9)

    # anisotropic dimension
    slope = spikelab.quasi_box_dimension([1.0, 0.5, -1.5])
    approx(slope, 1.5, 0.05)

    # fractal pipeline at depth 2
    summary = spikelab.fractal_pipeline([10, 100, 1000, 10_000], 2, 20, 5)
    assert summary["min_sigma"] >= 1.0 - 1e-9
    approx(summary["sharpness_lambda1"], 0.1, 1e-9)
    assert all(abs(l - 10.0) < 1e-9 for l in summary["ell"])
    assert summary["mass_ratio"] <= 1.0

    # one acceptance criterion end to end
    ok, details = spikelab.run_criterion(2, 1)
    assert ok, details

    print("smoke test passed:", module_path)


if __name__ == "__main__":
    main()
