"""Backwards induction, Boltzmann policies, policy evaluation, exploitability and
the fixed-point iteration over (policy, mean field) ensembles."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .env import GameModel
from .graphon import Graphon
from .meanfield import (
    ClassGrid,
    MeanFieldEnsemble,
    PolicyEnsemble,
    class_neighborhoods,
    forward_simulate,
    make_grid,
)

log = logging.getLogger(__name__)


@dataclass
class QEnsemble:
    grid: ClassGrid
    values: np.ndarray  # [m, t, x, u], t = 0..T with values[:, T] == 0

    @property
    def horizon(self) -> int:
        return self.values.shape[1] - 1

    def greedy_values(self) -> np.ndarray:
        return self.values.max(axis=-1)


def _kernels(model: GameModel, g: Graphon, mf: MeanFieldEnsemble):
    G = class_neighborhoods(g, mf)  # (M, T, X)
    return model.reward_batch(G), model.transition_batch(G)


def backwards_induction(model: GameModel, g: Graphon, mf: MeanFieldEnsemble) -> QEnsemble:
    """Optimal action values of every class representative against a fixed mean field."""
    r, P = _kernels(model, g, mf)
    M, T = mf.grid.M, model.horizon
    Q = np.zeros((M, T + 1, model.num_states, model.num_actions))
    for t in range(T - 1, -1, -1):
        V_next = Q[:, t + 1].max(axis=-1)
        Q[:, t] = r[:, t] + np.einsum("mxuy,my->mxu", P[:, t], V_next)
    return QEnsemble(mf.grid, Q)


def policy_evaluation(model: GameModel, g: Graphon, mf: MeanFieldEnsemble, pol: PolicyEnsemble) -> QEnsemble:
    """Action values of following ``pol`` from t+1 on, against a fixed mean field."""
    r, P = _kernels(model, g, mf)
    M, T = mf.grid.M, model.horizon
    Q = np.zeros((M, T + 1, model.num_states, model.num_actions))
    for t in range(T - 1, -1, -1):
        if t + 1 < T:
            V_next = np.einsum("mxu,mxu->mx", pol.probs[:, t + 1], Q[:, t + 1])
        else:
            V_next = np.zeros((M, model.num_states))
        Q[:, t] = r[:, t] + np.einsum("mxuy,my->mxu", P[:, t], V_next)
    return QEnsemble(mf.grid, Q)


def softmax_rows(q: np.ndarray, eta: float) -> np.ndarray:
    """Boltzmann distribution over the last axis; eta=0 gives the lowest-index argmax."""
    if eta < 0:
        raise ValueError("temperature must be non-negative")
    if eta == 0:
        out = np.zeros_like(q, dtype=float)
        np.put_along_axis(out, np.argmax(q, axis=-1)[..., None], 1.0, axis=-1)
        return out
    with np.errstate(over="ignore"):
        z = np.exp((q - q.max(axis=-1, keepdims=True)) / eta)
    return z / z.sum(axis=-1, keepdims=True)


def boltzmann_policy(q: QEnsemble, eta: float) -> PolicyEnsemble:
    return PolicyEnsemble(q.grid, softmax_rows(q.values[:, :-1], eta))


def expected_initial_value(model: GameModel, pol: PolicyEnsemble, q: QEnsemble) -> np.ndarray:
    """Per-class E_{x~mu0} sum_u pi_0(u|x) Q(0, x, u)."""
    v0 = np.einsum("mxu,mxu->mx", pol.probs[:, 0], q.values[:, 0])
    return v0 @ model.initial_distribution


def exploitability_per_class(model: GameModel, g: Graphon, pol: PolicyEnsemble, mf: MeanFieldEnsemble) -> np.ndarray:
    q_star = backwards_induction(model, g, mf)
    q_pol = policy_evaluation(model, g, mf, pol)
    best = q_star.values[:, 0].max(axis=-1) @ model.initial_distribution
    return best - expected_initial_value(model, pol, q_pol)


def exploitability(model: GameModel, g: Graphon, pol: PolicyEnsemble, mf: Optional[MeanFieldEnsemble] = None) -> float:
    """Average best-response gain over the classes under the mean field ``mf``.

    If ``mf`` is omitted it is the mean field induced by ``pol``.
    """
    if mf is None:
        mf = forward_simulate(model, g, pol)
    return float(exploitability_per_class(model, g, pol, mf).mean())


@dataclass
class SolveReport:
    iterations: int
    converged: bool
    residual_history: list
    final_policy: PolicyEnsemble = field(repr=False)
    final_mean_field: MeanFieldEnsemble = field(repr=False)
    eta: float = 0.0
    tol: float = 1e-8
    exploitability_history: Optional[list] = None

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]

    def to_dict(self) -> dict:
        out = {
            "iterations": self.iterations,
            "converged": self.converged,
            "eta": self.eta,
            "tol": self.tol,
            "M": self.final_policy.grid.M,
            "grid_scheme": self.final_policy.grid.scheme,
            "final_residual": self.final_residual,
            "residual_history": [float(r) for r in self.residual_history],
        }
        if self.exploitability_history is not None:
            out["exploitability_history"] = [float(e) for e in self.exploitability_history]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def fixed_point_solve(
    model: GameModel,
    g: Graphon,
    M: int,
    eta: float,
    max_iters: int = 250,
    tol: float = 1e-8,
    grid_scheme: str = "midpoint",
    track_exploitability: bool = False,
) -> SolveReport:
    """Picard iteration mu -> softmax(Q^mu) -> induced mean field, started from the uniform policy."""
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid = make_grid(M, grid_scheme)
    pol = PolicyEnsemble.uniform(model, grid)
    mf = forward_simulate(model, g, pol)
    residuals, expl = [], []
    for k in range(1, max_iters + 1):
        q = backwards_induction(model, g, mf)
        pol = boltzmann_policy(q, eta)
        new_mf = forward_simulate(model, g, pol)
        res = float(np.max(np.abs(new_mf.marginals - mf.marginals)))
        residuals.append(res)
        mf = new_mf
        if track_exploitability:
            expl.append(exploitability(model, g, pol, mf))
        log.debug("iter %d residual %.3e", k, res)
        if res < tol:
            break
    return SolveReport(
        iterations=len(residuals),
        converged=residuals[-1] < tol,
        residual_history=residuals,
        final_policy=pol,
        final_mean_field=mf,
        eta=eta,
        tol=tol,
        exploitability_history=expl if track_exploitability else None,
    )


@dataclass
class SweepRow:
    eta: float
    mean_expl: float
    min_expl: float
    max_expl: float


def _sweep_one(args) -> SweepRow:
    model, g, M, eta, iters, grid_scheme = args
    # fixed iteration count: tol below any attainable residual
    rep = fixed_point_solve(model, g, M, eta, iters, tol=1e-300, grid_scheme=grid_scheme, track_exploitability=True)
    tail = np.array(rep.exploitability_history[-10:])
    return SweepRow(eta, float(tail.mean()), float(tail.min()), float(tail.max()))


def temperature_sweep(
    model: GameModel,
    g: Graphon,
    M: int,
    etas: Sequence[float],
    iters: int,
    grid_scheme: str = "midpoint",
    workers: int = 1,
) -> list[SweepRow]:
    """Exploitability statistics over the last 10 fixed-point iterations, one row per temperature."""
    if iters < 10:
        raise ValueError("need at least 10 iterations")
    if not etas:
        raise ValueError("empty temperature list")
    jobs = [(model, g, M, float(e), iters, grid_scheme) for e in etas]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]
