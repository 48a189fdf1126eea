"""Learning step-bounded probabilistic temporal properties of relational MDPs from examples."""

from .formula import Formula, PathOp, parse_formula, render_formula
from .learner import ExampleSet, LearnConfig, Solution, check_consistency, learn, learn_with_policy, most_specific
from .logic import Atom, IntegrityConstraint, RelationSchema, Schema
from .rmdp import Policy, RMDPModel, RuleGroup

__version__ = "0.1.0"
