"""Game models: finite state/action graphon mean field games.

A model exposes batched kernels so the solvers can evaluate every
(class, time) pair at once. ``G`` arrays carry the neighborhood mean field
in their last axis (a dense sub-probability vector over states).
"""

from __future__ import annotations

import numpy as np

MASS_TOL = 1e-9


class GameModel:
    """Base class. Subclasses implement :meth:`transition_batch` and :meth:`reward_batch`."""

    name = "base"
    state_labels: tuple = ()
    action_labels: tuple = ()

    def __init__(self, num_states: int, num_actions: int, horizon: int, initial_distribution):
        self.num_states = int(num_states)
        self.num_actions = int(num_actions)
        self.horizon = int(horizon)
        mu0 = np.asarray(initial_distribution, dtype=float)
        if mu0.shape != (self.num_states,) or np.any(mu0 < 0) or abs(mu0.sum() - 1.0) > 1e-12:
            raise ValueError("initial distribution must be a probability vector over states")
        mu0.setflags(write=False)
        self.initial_distribution = mu0

    def transition_batch(self, G: np.ndarray) -> np.ndarray:
        """Map G of shape (..., X) to P of shape (..., X, U, X')."""
        raise NotImplementedError

    def reward_batch(self, G: np.ndarray) -> np.ndarray:
        """Map G of shape (..., X) to r of shape (..., X, U)."""
        raise NotImplementedError

    def transition(self, x: int, u: int, G) -> np.ndarray:
        return self.transition_batch(np.asarray(G, dtype=float))[x, u]

    def reward(self, x: int, u: int, G) -> float:
        return float(self.reward_batch(np.asarray(G, dtype=float))[x, u])

    def __repr__(self):
        return f"{type(self).__name__}(X={self.num_states}, U={self.num_actions}, T={self.horizon})"


def check_sub_probability(G, tol: float = MASS_TOL) -> None:
    G = np.asarray(G, dtype=float)
    if np.any(G < 0) or np.any(G > 1) or np.any(G.sum(axis=-1) > 1 + tol):
        raise ValueError("neighborhood mean field must be a sub-probability vector")


class SISModel(GameModel):
    """Epidemic control: susceptible/infected agents choosing whether to take precautions."""

    name = "sis"
    S, I = 0, 1
    UNPROTECTED, PRECAUTION = 0, 1
    state_labels = ("S", "I")
    action_labels = ("U", "D")

    def __init__(
        self,
        horizon: int = 50,
        infected0: float = 0.5,
        infection_rate: float = 0.8,
        recovery_rate: float = 0.2,
        infected_cost: float = 2.0,
        precaution_cost: float = 0.5,
    ):
        super().__init__(2, 2, horizon, [1.0 - infected0, infected0])
        self.infection_rate = infection_rate
        self.recovery_rate = recovery_rate
        self.infected_cost = infected_cost
        self.precaution_cost = precaution_cost

    def transition_batch(self, G):
        G = np.asarray(G, dtype=float)
        P = np.zeros(G.shape[:-1] + (2, 2, 2))
        p_inf = self.infection_rate * G[..., self.I]
        P[..., self.S, self.UNPROTECTED, self.I] = p_inf
        P[..., self.S, self.UNPROTECTED, self.S] = 1.0 - p_inf
        P[..., self.S, self.PRECAUTION, self.S] = 1.0
        P[..., self.I, :, self.S] = self.recovery_rate
        P[..., self.I, :, self.I] = 1.0 - self.recovery_rate
        return P

    def reward_batch(self, G):
        G = np.asarray(G, dtype=float)
        r = np.array(
            [[0.0, -self.precaution_cost], [-self.infected_cost, -self.infected_cost - self.precaution_cost]]
        )
        return np.broadcast_to(r, G.shape[:-1] + (2, 2)).copy()


class InvestmentModel(GameModel):
    """Firms investing in product quality 0..9; profit shrinks with neighborhood quality."""

    name = "investment"
    INVEST, OPT_OUT = 0, 1
    action_labels = ("I", "O")

    def __init__(self, horizon: int = 50, levels: int = 10, profit: float = 0.3, invest_cost: float = 2.0):
        mu0 = np.zeros(levels)
        mu0[0] = 1.0
        super().__init__(levels, 2, horizon, mu0)
        self.state_labels = tuple(str(x) for x in range(levels))
        self.profit = profit
        self.invest_cost = invest_cost
        top = levels - 1
        P = np.zeros((levels, 2, levels))
        for x in range(top):
            P[x, self.INVEST, x + 1] = (top - x) / 10
            P[x, self.INVEST, x] = (1 + x) / 10
            P[x, self.OPT_OUT, x] = 1.0
        P[top, :, top] = 1.0
        P.setflags(write=False)
        self._P = P

    def transition_batch(self, G):
        G = np.asarray(G, dtype=float)
        return np.broadcast_to(self._P, G.shape[:-1] + self._P.shape).copy()

    def reward_batch(self, G):
        G = np.asarray(G, dtype=float)
        x = np.arange(self.num_states, dtype=float)
        quality = G @ x
        r = np.empty(G.shape[:-1] + (self.num_states, 2))
        r[..., :, self.OPT_OUT] = self.profit * x / (1.0 + quality[..., None])
        r[..., :, self.INVEST] = r[..., :, self.OPT_OUT] - self.invest_cost
        return r


class TabularModel(GameModel):
    """Small explicit model, mainly for tests.

    The reward is ``base_reward[x, u] + coupling[x, u] @ G``; transitions are
    ``base_transition`` unless ``infection`` is given, in which case mass
    ``infection[x, u] * G.sum()`` is moved from the base row onto state 0.
    """

    name = "tabular"

    def __init__(self, base_transition, base_reward, initial_distribution, horizon, coupling=None, infection=None):
        P = np.asarray(base_transition, dtype=float)
        X, U, _ = P.shape
        super().__init__(X, U, horizon, initial_distribution)
        if not np.allclose(P.sum(axis=-1), 1.0, atol=1e-12, rtol=0):
            raise ValueError("base transition rows must sum to 1")
        self._P = P
        self._r = np.asarray(base_reward, dtype=float)
        self._c = np.zeros((X, U, X)) if coupling is None else np.asarray(coupling, dtype=float)
        self._inf = np.zeros((X, U)) if infection is None else np.asarray(infection, dtype=float)
        if np.any(self._inf < 0) or np.any(self._inf > 1):
            raise ValueError("infection weights must lie in [0, 1]")

    def transition_batch(self, G):
        G = np.asarray(G, dtype=float)
        lam = self._inf * G.sum(axis=-1)[..., None, None]
        target = np.zeros(self.num_states)
        target[0] = 1.0
        return (1.0 - lam[..., None]) * self._P + lam[..., None] * target

    def reward_batch(self, G):
        G = np.asarray(G, dtype=float)
        return self._r + np.einsum("xuy,...y->...xu", self._c, G)


MODELS = {"sis": SISModel, "investment": InvestmentModel}


def sis_graphon_model() -> SISModel:
    return SISModel()


def investment_graphon_model() -> InvestmentModel:
    return InvestmentModel()


def make_model(name: str) -> GameModel:
    try:
        return MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
