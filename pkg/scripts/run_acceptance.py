"""Run the acceptance suite; one pass/fail line per criterion is printed at the end."""
import pathlib
import sys

import pytest

root = pathlib.Path(__file__).resolve().parents[1]
sys.exit(pytest.main([str(root / "tests" / "test_acceptance.py"), "-q"]))
