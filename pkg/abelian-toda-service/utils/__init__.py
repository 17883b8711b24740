"""
Utility modules: numerical helpers shared by the packages and report writers.
"""

from utils.numeric_utils import NumericUtils
from utils.reporting_utils import ReportingUtils

__all__ = ["NumericUtils", "ReportingUtils"]
