#!/usr/bin/env python
"""
Test runner script for all services in the abelian Toda project.
Each service is tested from its own directory so its conftest.py stays isolated.
"""

import os
import subprocess
import sys
from pathlib import Path

SERVICES = [
    ("Abelian Toda Service", "abelian-toda-service"),
]

# Parallel workers from pytest-xdist, line coverage from pytest-cov
PYTEST_ARGS = ["--tb=short", "--color=yes", "-n", "auto", "--cov=.", "--cov-report=term-missing"]


def run_tests_for_service(service_name, service_path, extra_args):
    """Run tests for a specific service."""
    print(f"\n{'=' * 60}")
    print(f"Running tests for {service_name}")
    print(f"{'=' * 60}")

    original_dir = os.getcwd()
    os.chdir(service_path)

    try:
        result = subprocess.run(
            [sys.executable, "-m", "pytest", "tests/", *PYTEST_ARGS, *extra_args],
            capture_output=False,
        )
        return result.returncode == 0

    except Exception as e:
        print(f"Error running tests for {service_name}: {e}")
        return False
    finally:
        os.chdir(original_dir)


def main():
    """Run tests for all services, forwarding extra arguments to pytest."""
    project_root = Path(__file__).parent
    extra_args = sys.argv[1:]

    print("Abelian Toda - Multi-Service Test Runner")
    print("=" * 60)

    results = {}
    for service_name, directory in SERVICES:
        service_path = project_root / directory
        if service_path.exists() and (service_path / "tests").exists():
            results[service_name] = run_tests_for_service(service_name, service_path, extra_args)
        else:
            print(f"Skipping {service_name} - no tests directory found")
            results[service_name] = None

    print(f"\n{'=' * 60}")
    print("TEST SUMMARY")
    print(f"{'=' * 60}")

    for service_name, success in results.items():
        status = "SKIPPED" if success is None else ("PASSED" if success else "FAILED")
        print(f"{service_name:<25} : {status}")

    if all(success is not False for success in results.values()):
        print("\nAll tests passed!")
        sys.exit(0)
    print("\nSome tests failed!")
    sys.exit(1)


if __name__ == "__main__":
    main()
