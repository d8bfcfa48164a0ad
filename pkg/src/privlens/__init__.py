"""Privacy analysis of message traces over a layered model of personal information."""
from .deduction import KnowledgeBase, derivable, deducer
from .dsl import ParseError, ResolutionError, ModelInvalid, ScenarioBundle, parse_scenario, parse_term
from .model import Atom, InfoModel, Property, validate_model
from .pipeline import Analysis, RunConfig, SuiteMismatch, TraceInvalid, analyze, analyze_bundle
from .report import render_report
from .requirements import RequirementSuite, check_suite, eval_formula
from .terms import cat, item, pk
from .traces import State, Transmission, determinable, evolve
from .views import View, coalition_kb, view_of

__version__ = "0.1.0"
