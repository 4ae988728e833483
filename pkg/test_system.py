#!/usr/bin/env python3
"""System test to verify all components import and wire together."""
from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

SAMPLES = Path(__file__).parent / "sample_data"


def test_imports():
    """Test that all modules can be imported."""
    print("Testing imports...")

    from marginal_metrics import cli, models, settings
    print("  OK: Core modules")

    from marginal_metrics.commands import cov_bounds, linear_process, lp_selftest, metrics, verify
    print("  OK: All commands")

    from marginal_metrics.services import inequalities, io, lp, measure, processes, transform
    from marginal_metrics.services import metrics as metric_service
    from marginal_metrics.services import verify as verify_service
    print("  OK: All services")
    return True


def test_parser():
    """Test that every command registers on the CLI parser."""
    print("Testing CLI wiring...")

    from marginal_metrics.cli import build_parser

    parser = build_parser()
    commands = sorted(parser._subparsers._group_actions[0].choices)  # type: ignore[union-attr]
    print(f"  OK: Parser built ({len(commands)} commands: {', '.join(commands)})")
    return True


def test_certificate():
    """Test the Bernoulli certificate end to end from the sample files."""
    print("Testing sample measures...")

    from marginal_metrics.services.io import load_measure
    from marginal_metrics.services.metrics import bl1_distance, m1_distance

    p_co = load_measure(SAMPLES / "p_co.json")
    p_ind = load_measure(SAMPLES / "p_ind.json")
    m1 = m1_distance(p_co, p_ind)
    bl = bl1_distance(p_co, p_ind).value
    print(f"  OK: m1 = {m1:.6f}, bl1 = {bl:.6f}")
    return abs(m1 - 0.25) < 1e-12 and abs(bl - 1.0 / 3.0) < 1e-9


def main():
    """Run all tests."""
    print("=" * 50)
    print("MARGINAL METRICS - SYSTEM TEST")
    print("=" * 50)

    tests = [test_imports, test_parser, test_certificate]
    passed = 0

    for test in tests:
        try:
            if test():
                passed += 1
        except Exception as e:
            print(f"  FAILED: {e}")

    print("=" * 50)
    print(f"RESULTS: {passed}/{len(tests)} passed")
    print("=" * 50)

    return 0 if passed == len(tests) else 1


if __name__ == "__main__":
    sys.exit(main())
