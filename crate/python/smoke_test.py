#!/usr/bin/env python3
"""Smoke test for the cachecalc_py extension module.

Build the extension first:

    cargo build --release -p cachecalc-py

then run this script from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import sysconfig
import tempfile
from pathlib import Path


def load_module():
    repo = Path(__file__).resolve().parent.parent
    candidates = [
        repo / "target" / "release" / "libcachecalc_py.so",
        repo / "target" / "release" / "libcachecalc_py.dylib",
        repo / "target" / "debug" / "libcachecalc_py.so",
        repo / "target" / "debug" / "libcachecalc_py.dylib",
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("extension not found; run: cargo build --release -p cachecalc-py")
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    staging = Path(tempfile.mkdtemp(prefix="cachecalc-py-"))
    shutil.copy2(built, staging / f"cachecalc_py{suffix}")
    sys.path.insert(0, str(staging))
    import cachecalc_py

    return cachecalc_py


def approx(a, b, tol=1e-10):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    cc = load_module()

    # combinatorics
    assert cc.binomial(40, 8) == 76904685.0
    approx(cc.log_factorial(5), math.log(120.0), 1e-12)
    assert cc.partition_count(50, 10) == 62740
    profiles = cc.enumerate_profiles(3, 2)
    assert profiles == [[3, 0], [2, 1]]
    assert cc.multiplicity_groups([5, 5, 3, 3, 3, 2, 1, 0, 0]) == [2, 3, 1, 1, 2]
    approx(cc.binomial_cdf(2, 0.5, 1), 0.75, 1e-14)

    # exact analysis
    cfg = cc.NetworkConfig(2, 2, 1)
    approx(cc.exact_average_delay(cfg), 0.75, 1e-12)
    approx(cc.brute_force_average_delay(cfg), 0.75, 1e-12)
    approx(cc.deterioration(cfg), 1.5, 1e-12)
    eight = cc.NetworkConfig(8, 4, 1)
    approx(cc.t_min(eight), 3.0, 1e-12)
    approx(cc.delay_of_profile([2, 2, 2, 2], eight), 3.0, 1e-12)
    three = cc.NetworkConfig(3, 3, 1)
    approx(cc.profile_probability([1, 1, 1], three), 2.0 / 9.0, 1e-12)

    # bounds sandwich the exact value
    exact = cc.exact_average_delay(eight)
    aub = cc.analytical_upper_bound(eight)
    alb = cc.analytical_lower_bound(eight)
    assert alb <= exact <= aub, (alb, exact, aub)
    tb = cc.threshold_bounds(eight, 0.9)
    assert tb.lower <= exact <= tb.upper
    assert tb.coverage >= 0.9
    gap = (1.0 - tb.coverage) * (eight.worst_case_delay() - cc.t_min(eight))
    approx(tb.upper - tb.lower, gap, 1e-10)

    # zipf intensities and non-uniform bounds
    z = cc.zipf_intensities(4, 1.0)
    approx(z[0], 12.0 / 25.0, 1e-12)
    approx(sum(z), 1.0, 1e-12)
    six = cc.NetworkConfig(6, 4, 1)
    approx(cc.nonuniform_upper_bound(six, z), 4.2413507942399997, 1e-10)
    approx(cc.nonuniform_lower_bound(six, z), 2.94, 1e-12)
    assert cc.proximity_upper_bound(eight, 2) > 0

    # seeded simulation agrees with the exact value and reproduces exactly
    report = cc.sbn_estimate(eight, 50_000, 7)
    assert abs(report.mean - exact) <= 3.0 * report.std_error
    again = cc.sbn_estimate(eight, 50_000, 7)
    assert report.mean == again.mean
    assert report.policy == "uniform"
    approx(sum(report.rank_means), 8.0, 1e-9)

    # h-choice improves on plain association
    choosy = cc.sbn_estimate(eight, 50_000, 7, policy="hchoice", h=4)
    assert choosy.mean <= report.mean
    v = cc.sample_association(8, 4, seed=1, index=0)
    assert sum(v) == 8 and len(v) == 4

    # scaling probe table
    rows = cc.scaling_probe([16, 32], "quadratic", 200, 5)
    assert len(rows) == 2 and rows[0]["users"] == 256

    print("cachecalc_py smoke test passed")


if __name__ == "__main__":
    main()
