"""Particle estimate of the neighborhood mean fields under a fixed policy ensemble."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import csvio
from .env import GameModel
from .graphon import Graphon
from .meanfield import PolicyEnsemble

DEFAULT_PROBES = np.linspace(0.0, 1.0, 11)


def categorical(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw over the last axis of ``probs`` using uniforms ``u``."""
    cdf = np.cumsum(probs, axis=-1)
    idx = (cdf <= (u * cdf[..., -1])[..., None]).sum(axis=-1)
    return np.minimum(idx, probs.shape[-1] - 1)


@dataclass
class ParticleCloud:
    alphas: np.ndarray  # [k, m]
    states: np.ndarray  # [k, t, m]

    @property
    def K(self) -> int:
        return self.alphas.shape[0]

    @property
    def L(self) -> int:
        return self.alphas.shape[1]


@dataclass
class SMCEstimate:
    graphon: Graphon
    cloud: ParticleCloud
    num_states: int
    probes: np.ndarray
    table: np.ndarray  # [probe, t, x]

    def query(self, alpha, t: Optional[int] = None) -> np.ndarray:
        """Estimated neighborhood mean field at ``alpha``; all times if ``t`` is None."""
        w = self.graphon(alpha, self.cloud.alphas)  # (K, L)
        onehot = np.eye(self.num_states)[self.cloud.states]  # (K, T, L, X)
        est = np.einsum("km,ktmx->tx", w, onehot) / (self.cloud.K * self.cloud.L)
        return est if t is None else est[t]

    def rows(self):
        P, T, X = self.table.shape
        for p in range(P):
            for t in range(T):
                for x in range(X):
                    yield (self.probes[p], t, x, self.table[p, t, x])

    def to_csv(self, path, meta=None) -> None:
        csvio.write(path, ("alpha", "t", "x", "mass"), self.rows(), meta)


def simulate_cloud(model: GameModel, g: Graphon, pol: PolicyEnsemble, L: int, rng: np.random.Generator):
    """One trajectory of L particles; returns (alphas, states[t, m])."""
    T, X = model.horizon, model.num_states
    alphas = rng.uniform(0.0, 1.0, size=L)
    lifted = pol.probs[pol.grid.nearest(alphas)]  # (L, T, X, U)
    W = g.matrix(alphas) / L
    idx = np.arange(L)
    states = np.empty((T, L), dtype=np.int64)
    states[0] = categorical(np.broadcast_to(model.initial_distribution, (L, X)), rng.uniform(size=L))
    for t in range(T - 1):
        x = states[t]
        u = categorical(lifted[idx, t, x], rng.uniform(size=L))
        G = W @ np.eye(X)[x]  # snapshot at time t for every particle
        P = model.transition_batch(G)[idx, x, u]
        states[t + 1] = categorical(P, rng.uniform(size=L))
    return alphas, states


def smc_estimate(
    model: GameModel,
    g: Graphon,
    pol: PolicyEnsemble,
    K: int = 5,
    L: int = 200,
    seed: int = 0,
    probes=None,
) -> SMCEstimate:
    if K < 1 or L < 1:
        raise ValueError("K and L must be positive")
    probes = DEFAULT_PROBES if probes is None else np.asarray(probes, dtype=float)
    alphas = np.empty((K, L))
    states = np.empty((K, model.horizon, L), dtype=np.int64)
    for k in range(K):
        # fresh particle indices for every trajectory
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        alphas[k], states[k] = simulate_cloud(model, g, pol, L, rng)
    est = SMCEstimate(g, ParticleCloud(alphas, states), model.num_states, probes, np.empty(0))
    est.table = np.stack([est.query(a) for a in probes])
    return est
