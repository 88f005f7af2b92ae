#!/usr/bin/env python3
"""
Lane-Emden Lab Demo Runner

Walks through the laboratory at modest resolution: the first Dirichlet
eigenvalue, one solve with its diagnostics, the shooting cross-check, and a
short p = 1 sweep with the logarithmic fit of max v.
"""

import json
import os

from lane_emden_lab import (
    DomainSpec,
    ExponentPair,
    FixedP,
    RadialGrid,
    SweepPlan,
    create_sample_config,
    first_dirichlet_eigenpair,
    fit_logarithmic,
    run_diagnostics,
    run_sweep,
    solve_shooting,
    solve_with_fallback,
)
from lane_emden_lab.errors import InsufficientDataError, SolverError
from lane_emden_lab.radial_solver import branch_agreement
from lane_emden_lab.spectral import exact_first_eigenvalue
from lane_emden_lab.sweeps import dyadic, energy_contrast, l1_floor_summary


def run_demo(n: int = 512, q_max_power: int = 7) -> None:
    """
    Run the demo on the unit disk.

    Args:
        n: radial grid intervals (default: 512)
        q_max_power: the p = 1 sweep runs over q = 4, 8, ..., 2^q_max_power
    """
    print("🚀 Starting Lane-Emden Lab Demo")
    print("=" * 50)

    disk = DomainSpec.disk(1.0)
    grid = RadialGrid(1.0, n)

    ep = first_dirichlet_eigenpair(disk, grid)
    exact = exact_first_eigenvalue(disk)
    print(f"🎵 λ₁ on the unit disk: {ep.lambda_:.10f} (closed form {exact:.10f})")

    e = ExponentPair(1.0, 16.0)
    print(f"\n🔍 Solving (p, q) = ({e.p:g}, {e.q:g}) on {n} intervals...")
    s = solve_with_fallback(e, grid)
    print(f"   M = max u = {s.M:.10f}, N = max v = {s.N:.10f}, iterations = {s.newton_iterations}")

    report = run_diagnostics(s, ep)
    print("\n📋 Diagnostics:")
    for check in report.checks():
        print("  " + check.line())

    try:
        oracle = solve_shooting(e, grid=grid)
        gap_M, gap_N = branch_agreement(s, oracle)
        print(f"\n🎯 Shooting oracle: M = {oracle.M:.10f}, N = {oracle.N:.10f} (gaps {gap_M:.1e}, {gap_N:.1e})")
    except SolverError as err:
        print(f"\n⚠️ Shooting oracle failed: {err}")

    print(f"\n📈 Sweeping p = 1, q = 4 ... {2 ** q_max_power}")
    table = run_sweep(SweepPlan(FixedP(1.0, tuple(dyadic(2, q_max_power))), domain=disk, resolution=n))
    print(table.frame[["q", "M", "N", "energy", "L1_uq1", "converged"]].to_string(index=False))

    try:
        fit = fit_logarithmic(table)
        print(f"\n📐 N ≈ {fit.slope:.4f}·log q + {fit.intercept:.4f} (correlation {fit.correlation:.5f})")
    except InsufficientDataError as err:
        print(f"\n⚠️ No logarithmic fit: {err}")

    print("\n🧱 L¹ floors:")
    print(l1_floor_summary(table).to_string())
    contrast = energy_contrast(table)
    print(f"\n⚡ q·∫u^(q+1) grew by a factor {contrast.uq1_growth:.3g} across the sweep")

    print("\n✅ Demo completed!")


if __name__ == "__main__":
    import argparse
    import sys

    try:
        parser = argparse.ArgumentParser(description="Run the Lane-Emden lab demo")
        parser.add_argument("--grid", type=int, default=512, help="Radial grid intervals")
        parser.add_argument("--q-max-power", type=int, default=7, help="Sweep up to q = 2^k")
        parser.add_argument("--create-config", action="store_true", help="Create sample configuration file")

        args = parser.parse_args()

        if args.create_config:
            path = create_sample_config(os.getenv("LANE_EMDEN_CONFIG", "lab_config.json"))
            print(f"📝 Sample configuration saved to {path}")
            with open(path, "r", encoding="utf-8") as f:
                print(json.dumps(json.load(f), indent=2))
        else:
            run_demo(args.grid, args.q_max_power)

    except KeyboardInterrupt:
        print("\n❌ Demo interrupted by user")
        sys.exit(1)
    except Exception as e:
        print(f"❌ Error running demo: {e}")
        import traceback

        traceback.print_exc()
        sys.exit(1)
