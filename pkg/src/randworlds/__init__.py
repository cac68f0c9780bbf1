"""Degrees of belief by exact counting of finite random worlds.

Pipeline: parse a knowledge base with statistical assertions and
approximate comparisons, translate the approximations into exact
inequalities over tolerance variables, count satisfying worlds exactly
at a schedule of domain sizes and tolerance stages, and read the
limiting degree of belief off the stabilized grid.  A maximum-entropy
shortcut answers unary queries without counting, and a default-inference
layer sits on top.
"""

from .lang import Vocabulary, Formula
from .parser import parse_kb, parse_kb_file, parse_formula, format_formula
from .translate import ToleranceVector, translate_to_exact, \
    instantiate_tolerances, ground_kb
from .counting import CondProb, WorldCount, cond_prob, count_worlds, \
    count_many, unary_count_many, naive_count_many
from .limits import Schedule, Thresholds, BeliefEstimate, \
    degree_of_belief, default_schedule, eventually_consistent
from .defaults import DefaultRule, default_entails, dempster_combine, \
    run_property_suite, load_corpus

__all__ = [
    "Vocabulary", "Formula",
    "parse_kb", "parse_kb_file", "parse_formula", "format_formula",
    "ToleranceVector", "translate_to_exact", "instantiate_tolerances",
    "ground_kb",
    "CondProb", "WorldCount", "cond_prob", "count_worlds", "count_many",
    "unary_count_many", "naive_count_many",
    "Schedule", "Thresholds", "BeliefEstimate", "degree_of_belief",
    "default_schedule", "eventually_consistent",
    "DefaultRule", "default_entails", "dempster_combine",
    "run_property_suite", "load_corpus",
]

__version__ = "0.1.0"
