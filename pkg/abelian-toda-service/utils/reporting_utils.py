"""
Reporting utility functions for the experiment suites.

This module writes residual tables as CSV (complex values split into re/im
columns, 17 significant digits, timestamp only in a header comment) and the
per-suite summary.json, and prints the short console summaries.
"""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class ReportingUtils:
    """
    Utility class for report files and console summaries.

    Every method is a static helper; the runner calls them once per table
    and once per suite.
    """

    @staticmethod
    def print_section_header(title: str, width: int = 60) -> None:
        """
        Print a formatted section header.

        Args:
            title: Title of the section
            width: Width of the header line
        """
        print("\n" + "=" * width)
        print(title.upper())
        print("=" * width)

    @staticmethod
    def split_complex(frame: pd.DataFrame) -> pd.DataFrame:
        """
        Replace every complex column by a pair of re_/im_ float columns.

        Args:
            frame: Table that may hold complex values

        Returns:
            Table with only real-valued columns, order preserved
        """
        columns: Dict[str, Any] = {}
        for name in frame.columns:
            values = frame[name]
            if np.iscomplexobj(values.to_numpy()):
                array = values.to_numpy(dtype=complex)
                columns[f"re_{name}"] = array.real
                columns[f"im_{name}"] = array.imag
            else:
                columns[name] = values.to_numpy()
        return pd.DataFrame(columns, index=frame.index)

    @staticmethod
    def write_table(
        frame: pd.DataFrame, path: Union[str, Path], timestamp: Optional[str] = None, seed: Optional[int] = None
    ) -> Path:
        """
        Write a table as RFC-4180 CSV preceded by a '# generated' comment line.

        The body depends only on the data, so reruns produce identical bodies.

        Args:
            frame: Table to write
            path: Target file
            timestamp: Header timestamp (current UTC time by default)
            seed: Seed recorded in the header when given

        Returns:
            Path of the written file
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        stamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
        body = ReportingUtils.split_complex(frame).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        header = f"# generated {stamp}" if seed is None else f"# generated {stamp} seed={seed}"
        path.write_text(f"{header}\n{body}")
        logger.debug(f"Wrote {len(frame)} rows to {path}")
        return path

    @staticmethod
    def read_table(path: Union[str, Path]) -> pd.DataFrame:
        """Read a table written by write_table, skipping the comment line."""
        return pd.read_csv(path, comment="#")

    @staticmethod
    def to_jsonable(value: Any) -> Any:
        """Convert numpy scalars and arrays and complex numbers to JSON values."""
        if isinstance(value, dict):
            return {str(k): ReportingUtils.to_jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [ReportingUtils.to_jsonable(v) for v in value]
        if isinstance(value, np.ndarray):
            return ReportingUtils.to_jsonable(value.tolist())
        if isinstance(value, (complex, np.complexfloating)):
            return [float(np.real(value)), float(np.imag(value))]
        if isinstance(value, np.integer):
            return int(value)
        if isinstance(value, np.floating):
            return float(value)
        if isinstance(value, np.bool_):
            return bool(value)
        if isinstance(value, Path):
            return str(value)
        return value

    @staticmethod
    def write_summary(summary: Dict[str, Any], path: Union[str, Path]) -> Path:
        """
        Write a suite summary as indented JSON.

        Args:
            summary: Summary dictionary (config echo, seed, checks, tables)
            path: Target file

        Returns:
            Path of the written file
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(ReportingUtils.to_jsonable(summary), indent=2, sort_keys=True))
        logger.info(f"Summary written to {path}")
        return path

    @staticmethod
    def print_suite_summary(suite: str, checks: Iterable[Dict[str, Any]]) -> None:
        """
        Print one line per check with its value, tolerance and status.

        Args:
            suite: Suite name
            checks: Check records with name, value, tolerance and status
        """
        ReportingUtils.print_section_header(f"{suite} checks")
        for check in checks:
            value = check.get("value")
            shown = "n/a" if value is None else f"{value:.3e}"
            print(f"{check['status']:>8}  {check['name']:<36} {shown:>10}  (tol {check['tolerance']:.1e})")
        print("=" * 60)
