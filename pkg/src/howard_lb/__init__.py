"""Howard's policy iteration on mean-payoff DMDPs and its quadratic lower-bound family."""

from .dmdp import Dmdp, DmdpError, Policy, PolicyError, export_dot, parse_dmdp, serialize_dmdp, size_bits
from .evaluation import Evaluation, LassoRun, decompose, evaluate, values_equal
from .howard import Appraisal, IterationTrace, appraise, bellman, initial_policy, run_howard, solve
from .lowerbound import (
    PnLayout,
    expected_iteration_count,
    expected_sequence,
    gen_pn,
    policy_pi,
    policy_sigma,
    policy_tau,
    verify_lemma,
    verify_theorem,
)
from .oracles import RandomSpec, brute_force_values, karp_max_mean_cycle, optimal_values, random_dmdp

__version__ = "0.1.0"
