"""
Abelian Toda Experiment Driver

Batch command-line driver for the numerical experiments on theta and
elliptic solutions of the 2D Toda lattice and the bilinear discrete Hirota
equation. It loads a YAML/JSON experiment configuration, runs one named
suite and writes CSV tables plus a summary.json.

Exit codes:
- 0: every asserted tolerance was met
- 1: at least one check failed (the failing table row is printed)
- 2: the configuration could not be loaded or validated
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import yaml
from pydantic import ValidationError

# Add the service directory to Python path for imports
sys.path.append(str(Path(__file__).parent))

from config_manager import ConfigManager  # noqa: E402
from config_schema import SUITES  # noqa: E402
from experiment_runner import ExperimentRunner  # noqa: E402
from utils.reporting_utils import ReportingUtils  # noqa: E402

LOG_FILE = "abelian_toda.log"


def setup_logging(log_level: str = "INFO", output_dir: Optional[Path] = None) -> None:
    """
    Set up logging configuration for the driver.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        output_dir: Directory for the log file (current directory if None)
    """
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(output_dir / LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


def format_validation_error(error: ValidationError) -> str:
    """One line per offending field, dotted location first."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Abelian Toda experiment driver")
    parser.add_argument("--config", required=True, help="Path to the YAML/JSON experiment configuration")
    parser.add_argument("--suite", choices=SUITES, help="Suite to run (defaults to the config's suite)")
    parser.add_argument("--out", help="Output directory for tables and summary")
    parser.add_argument("--seed", type=int, help="Random seed overriding the config")
    parser.add_argument("--depth", type=int, help="Expansion depth S overriding the config")
    parser.add_argument("--log-level", help="Logging level", default="INFO")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point for the experiment driver.

    Args:
        argv: Command-line arguments (sys.argv[1:] if None)

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "depth": args.depth, "output_dir": args.out}
    config_manager = ConfigManager(Path(args.config), overrides)

    try:
        config = config_manager.validate_config()
        suite = args.suite or config.suite
        if suite is None:
            raise ValueError("No suite given on the command line or in the configuration")
        runner = ExperimentRunner(config_manager, Path(config.output_dir))
        runner.check_requirements(suite)
    except ValidationError as e:
        setup_logging(args.log_level)
        message = f"Invalid configuration: {format_validation_error(e)}"
        logging.getLogger(__name__).error(message)
        print(message, file=sys.stderr)
        return 2
    except (ValueError, OSError, yaml.YAMLError) as e:
        setup_logging(args.log_level)
        message = f"Configuration could not be loaded: {e}"
        logging.getLogger(__name__).error(message)
        print(message, file=sys.stderr)
        return 2

    output_dir = Path(config.output_dir)
    setup_logging(args.log_level, output_dir)
    logger = logging.getLogger(__name__)
    logger.info(f"Starting suite {suite} (config {args.config}, seed {config.seed}, output {output_dir})")

    try:
        result = runner.run(suite)
    except Exception:
        logger.exception(f"Suite {suite} failed")
        return 1

    ReportingUtils.print_suite_summary(suite, [check.to_dict() for check in result.checks])
    if not result.passed:
        for check in result.failed:
            print(f"FAILED {check.name}: value {check.value} tolerance {check.tolerance:.1e}")
            if check.row:
                print(f"  worst row: {check.row}")
        return 1

    logger.info(f"Suite {suite} completed successfully")
    return 0


if __name__ == "__main__":
    sys.exit(main())
