"""Finite N-agent simulation on sampled graphs and the mean field deviation experiment."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import csvio
from .env import GameModel
from .graphon import Graphon, SampledGraph, sample_w_random_graph
from .meanfield import MeanFieldEnsemble, PolicyEnsemble, lift_policy_gamma_n
from .smc import categorical
from .solver import expected_initial_value, policy_evaluation

CHUNK = 250


@dataclass
class EpisodeBatch:
    graph: SampledGraph
    returns: np.ndarray  # [episode, agent]

    @property
    def num_episodes(self) -> int:
        return self.returns.shape[0]

    def mean_returns(self) -> np.ndarray:
        return self.returns.mean(axis=0)

    def stderr(self) -> np.ndarray:
        if self.num_episodes < 2:
            return np.full(self.graph.n, np.nan)
        return self.returns.std(axis=0, ddof=1) / np.sqrt(self.num_episodes)

    def to_csv(self, path, meta=None) -> None:
        rows = ((e, i, self.returns[e, i]) for e in range(self.num_episodes) for i in range(self.graph.n))
        csvio.write(path, ("episode", "agent", "return"), rows, meta)


def episode_uniforms(seed: int, episode: int, T: int, N: int) -> np.ndarray:
    """Uniforms [t, agent, (init, action, transition)] for one episode."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, episode]))
    return rng.uniform(size=(T, N, 3))


def _run_chunk(model: GameModel, adjacency: np.ndarray, lifted: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Simulate a block of episodes; draws is [e, t, i, 3]. Returns per-agent returns [e, i]."""
    E, T, N, _ = draws.shape
    X = model.num_states
    A = adjacency.astype(float)
    ep = np.arange(E)[:, None]
    agents = np.arange(N)[None, :]
    eye = np.eye(X)
    x = categorical(np.broadcast_to(model.initial_distribution, (E, N, X)), draws[:, 0, :, 0])
    ret = np.zeros((E, N))
    for t in range(T):
        u = categorical(lifted[agents, t, x], draws[:, t, :, 1])
        G = (A @ eye[x]) / N  # (E, N, X), integer neighbor counts from the time-t snapshot
        ret += model.reward_batch(G)[ep, agents, x, u]
        if t + 1 < T:
            x = categorical(model.transition_batch(G)[ep, agents, x, u], draws[:, t, :, 2])
    return ret


def simulate_episodes(model: GameModel, graph: SampledGraph, pol: PolicyEnsemble, num_episodes: int, seed: int) -> EpisodeBatch:
    """Each agent follows the class policy nearest its graphon index; all agents move simultaneously."""
    if num_episodes < 1:
        raise ValueError("num_episodes must be positive")
    lifted = lift_policy_gamma_n(pol, graph.alphas)
    T, N = model.horizon, graph.n
    out = np.empty((num_episodes, N))
    for start in range(0, num_episodes, CHUNK):
        eps = range(start, min(start + CHUNK, num_episodes))
        draws = np.stack([episode_uniforms(seed, e, T, N) for e in eps])
        out[start : start + len(eps)] = _run_chunk(model, graph.adjacency, lifted, draws)
    return EpisodeBatch(graph, out)


def class_objectives(model: GameModel, g: Graphon, mf: MeanFieldEnsemble, pol: PolicyEnsemble) -> np.ndarray:
    """Mean field objective of every class under (pol, mf)."""
    return expected_initial_value(model, pol, policy_evaluation(model, g, mf, pol))


def mean_field_objective(model: GameModel, g: Graphon, mf: MeanFieldEnsemble, pol: PolicyEnsemble, alpha: float) -> float:
    return float(class_objectives(model, g, mf, pol)[pol.grid.nearest(alpha)])


@dataclass
class DeviationRow:
    n: int
    graph_seed: int
    max_dev: float
    mean_dev: float
    stderr: float


COLUMNS = ("n", "graph_seed", "max_dev", "mean_dev", "stderr")


def graph_seed_for(seed: int, n: int, j: int) -> int:
    return int(np.random.SeedSequence([seed, n, j]).generate_state(1)[0])


def _deviation_job(args) -> DeviationRow:
    model, g, pol, objectives, n, j, episodes, seed = args
    gseed = graph_seed_for(seed, n, j)
    graph = sample_w_random_graph(g, n, gseed)
    batch = simulate_episodes(model, graph, pol, episodes, gseed + 1)
    dev = np.abs(batch.mean_returns() - objectives[pol.grid.nearest(graph.alphas)])
    return DeviationRow(n, gseed, float(dev.max()), float(dev.mean()), float(np.mean(batch.stderr())))


def deviation_experiment(
    model: GameModel,
    g: Graphon,
    pol: PolicyEnsemble,
    mf: MeanFieldEnsemble,
    Ns: Sequence[int],
    graphs_per_N: int,
    episodes: int,
    seed: int,
    workers: int = 1,
) -> list[DeviationRow]:
    """|J_i^N - J_{alpha_i}| statistics for several N, one row per sampled graph."""
    if not Ns:
        raise ValueError("Ns must be non-empty")
    objectives = class_objectives(model, g, mf, pol)
    jobs = [(model, g, pol, objectives, int(n), j, episodes, seed) for n in Ns for j in range(graphs_per_N)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_deviation_job, jobs))
    return [_deviation_job(job) for job in jobs]


def deviation_rows(table: Sequence[DeviationRow]):
    return [(r.n, r.graph_seed, r.max_dev, r.mean_dev, r.stderr) for r in table]
