"""General Lotto games with scouts: solvers, certification, and analyses.

The package mirrors the structure of the problem:

* :mod:`lotto_scouts.single_field` -- exact values and optimal strategies
  for the one-field game with asymmetric information;
* :mod:`lotto_scouts.verification` -- Monte Carlo play-outs and discretised
  best-response oracles that certify the closed forms independently;
* :mod:`lotto_scouts.multistage` -- upper/lower value bounds for the
  two-stage multi-field game via convex-envelope surrogates;
* :mod:`lotto_scouts.analysis` -- influence ratio, value contours and the
  weapons-mix budget optimiser;
* :mod:`lotto_scouts.cli` -- the ``lotto-scouts`` command-line interface.
"""

__version__ = "0.1.0"

from .analysis import (
    BudgetProblem,
    MixSolution,
    influence_ratio,
    required_ratio,
    sweep,
    value_partial_B,
    value_partial_u,
    weapons_mix,
)
from .multistage import (
    BoundsResult,
    Field,
    MultistageInstance,
    bounds,
    bounds_coincide,
    closed_form_upper_sorted,
    envelope_breakpoints,
    lower_bound,
    phi,
    phi_dagger,
    phi_dagger_prime,
    phi_prime,
    psi,
    psi_dagger,
    upper_bound,
)
from .single_field import (
    Atom,
    BlueStrategy,
    CallPolicy,
    Case,
    GameParams,
    MixedAllocation,
    Solution,
    Uniform,
    blue_budget_usage,
    classify_case,
    game_value,
    payoff_exact,
    solve,
)
from .verification import (
    BestResponseReport,
    SimConfig,
    blue_best_response,
    exploitability,
    monte_carlo_value,
    red_best_response,
    sample_allocation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
