"""Graphon mean field games: equivalence-class solvers and finite-graph verification."""

__version__ = "0.1.0"

from .env import GameModel, InvestmentModel, SISModel, investment_graphon_model, make_model, sis_graphon_model
from .graphon import Graphon, SampledGraph, sample_w_random_graph, step_graphon_from_graph
from .meanfield import (
    ClassGrid,
    MeanFieldEnsemble,
    PolicyEnsemble,
    forward_simulate,
    lift_policy_gamma_n,
    neighborhood_mf,
    uniform_grid,
)
from .solver import (
    QEnsemble,
    SolveReport,
    backwards_induction,
    boltzmann_policy,
    exploitability,
    fixed_point_solve,
    policy_evaluation,
    temperature_sweep,
)
