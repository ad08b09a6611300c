"""Decide finite-field goals via natural numbers, bitvectors and SAT."""
from .context import ProofContext, RuleTrace
from .errors import (BudgetExceeded, ConstraintViolation, FieldBVError, NonPrimeField, ParseError,
                     PipelineTimeout, SortMismatch, Unsupported)
from .ff2nat import to_nat_strategy
from .nat2bv import clc_bv_width, to_bv_strategy
from .pipeline import Options, Verdict, emit_report, run_pipeline
from .problem import Problem
from .range_analysis import RangeAnalyzer, rng_analyze
from .sexpr import parse_problem, print_problem

__version__ = "0.1.0"
