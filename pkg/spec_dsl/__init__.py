"""
Spec Language Package
=====================
Text front end for the probe engine.

Modules:
- lexer: tokens with line/column positions
- parser: declarations, validation, diagnostics (total, never raises)
- evaluator: builds declarations and answers queries
- results: query records and their text / JSON / CSV renderings
- cli: argparse front end (run / check)
"""

import os
import sys

# Ensure project root is on sys.path for probe_helpers and utils imports
_SD_BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _SD_BASE_DIR not in sys.path:
    sys.path.insert(0, _SD_BASE_DIR)

from .diagnostics import Diagnostic
from .parser import Declaration, Field, Name, ParseOutcome, SpecAst, parse, validate
from .results import QueryRecord, format_json, format_text, save_csv
from .evaluator import SpecEvaluator, eval_spec
from .cli import cli_main
