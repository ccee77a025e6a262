"""Equivalence-class discretization: class grids, policy and mean field ensembles,
and the exact forward evolution of the per-class state marginals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import csvio
from .env import GameModel
from .graphon import Graphon

GRID_SCHEMES = ("midpoint", "endpoint")


@dataclass(frozen=True)
class ClassGrid:
    """M representatives with equal class measure 1/M."""

    representatives: np.ndarray
    scheme: str = "midpoint"

    def __post_init__(self):
        reps = np.asarray(self.representatives, dtype=float)
        if reps.ndim != 1 or reps.size < 1:
            raise ValueError("need at least one representative")
        if np.any(reps < 0) or np.any(reps > 1) or np.any(np.diff(reps) <= 0):
            raise ValueError("representatives must be strictly increasing inside [0, 1]")
        reps.setflags(write=False)
        object.__setattr__(self, "representatives", reps)

    @property
    def M(self) -> int:
        return self.representatives.size

    @property
    def class_measure(self) -> float:
        return 1.0 / self.M

    def nearest(self, alphas) -> np.ndarray:
        """Index of the nearest representative; ties go to the lower index."""
        a = np.asarray(alphas, dtype=float)
        dist = np.abs(a[..., None] - self.representatives)
        return np.argmin(dist, axis=-1)

    def __eq__(self, other):
        return isinstance(other, ClassGrid) and np.array_equal(self.representatives, other.representatives)

    def __hash__(self):
        return hash(self.representatives.tobytes())


def uniform_grid(M: int) -> ClassGrid:
    if M < 1:
        raise ValueError("M must be positive")
    return ClassGrid((np.arange(1, M + 1) - 0.5) / M, "midpoint")


def endpoint_grid(M: int) -> ClassGrid:
    """Evenly spaced points including 0 and 1 (M=101 gives the 0, 0.01, ..., 1 grid)."""
    if M < 1:
        raise ValueError("M must be positive")
    return ClassGrid(np.linspace(0.0, 1.0, M), "endpoint")


def make_grid(M: int, scheme: str = "midpoint") -> ClassGrid:
    if scheme == "midpoint":
        return uniform_grid(M)
    if scheme == "endpoint":
        return endpoint_grid(M)
    raise ValueError(f"unknown grid scheme {scheme!r}")


@dataclass
class PolicyEnsemble:
    grid: ClassGrid
    probs: np.ndarray  # [m, t, x, u]

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != 4 or self.probs.shape[0] != self.grid.M:
            raise ValueError("policy array must be indexed [class, t, x, u]")

    @property
    def horizon(self) -> int:
        return self.probs.shape[1]

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return bool(np.all(self.probs >= 0) and np.all(np.abs(self.probs.sum(axis=-1) - 1) <= tol))

    @classmethod
    def uniform(cls, model: GameModel, grid: ClassGrid) -> "PolicyEnsemble":
        U = model.num_actions
        return cls(grid, np.full((grid.M, model.horizon, model.num_states, U), 1.0 / U))

    @classmethod
    def constant_action(cls, model: GameModel, grid: ClassGrid, action: int) -> "PolicyEnsemble":
        probs = np.zeros((grid.M, model.horizon, model.num_states, model.num_actions))
        probs[..., action] = 1.0
        return cls(grid, probs)

    def rows(self):
        M, T, X, U = self.probs.shape
        for m in range(M):
            a = self.grid.representatives[m]
            for t in range(T):
                for x in range(X):
                    for u in range(U):
                        yield (m, a, t, x, u, self.probs[m, t, x, u])

    def to_csv(self, path, meta=None) -> None:
        csvio.write(path, ("class", "alpha", "t", "x", "u", "value"), self.rows(), meta)

    @classmethod
    def from_csv(cls, path) -> "PolicyEnsemble":
        meta, rows = csvio.read(path)
        if not rows:
            raise ValueError(f"{path}: no policy rows")
        idx = np.array([[int(r["class"]), int(r["t"]), int(r["x"]), int(r["u"])] for r in rows])
        vals = np.array([float(r["value"]) for r in rows])
        shape = tuple(idx.max(axis=0) + 1)
        probs = np.full(shape, np.nan)
        probs[tuple(idx.T)] = vals
        if np.isnan(probs).any():
            raise ValueError(f"{path}: incomplete policy table")
        reps = np.zeros(shape[0])
        for r in rows:
            reps[int(r["class"])] = float(r["alpha"])
        return cls(ClassGrid(reps, meta.get("grid_scheme", "midpoint")), probs)


@dataclass
class MeanFieldEnsemble:
    grid: ClassGrid
    marginals: np.ndarray  # [m, t, x]

    def __post_init__(self):
        self.marginals = np.asarray(self.marginals, dtype=float)
        if self.marginals.ndim != 3 or self.marginals.shape[0] != self.grid.M:
            raise ValueError("mean field array must be indexed [class, t, x]")

    @property
    def horizon(self) -> int:
        return self.marginals.shape[1]

    def rows(self):
        M, T, X = self.marginals.shape
        for m in range(M):
            a = self.grid.representatives[m]
            for t in range(T):
                for x in range(X):
                    yield (m, a, t, x, self.marginals[m, t, x])

    def to_csv(self, path, meta=None) -> None:
        csvio.write(path, ("class", "alpha", "t", "x", "value"), self.rows(), meta)


def neighborhood_weights(g: Graphon, grid: ClassGrid, alphas) -> np.ndarray:
    """Quadrature weights (1/M) W(alpha, alpha_m), shape (len(alphas), M)."""
    return g.matrix(np.atleast_1d(np.asarray(alphas, dtype=float)), grid.representatives) * grid.class_measure


def aggregate(weights: np.ndarray, marginals: np.ndarray) -> np.ndarray:
    """sum_m weights[a, m] * marginals[..., m, x] with a fixed, row-independent summation order.

    weights: (A, M); marginals: (..., M, X); returns (..., A, X).
    """
    return (weights[:, :, None] * marginals[..., None, :, :]).sum(axis=-2)


def neighborhood_mf(g: Graphon, mf: MeanFieldEnsemble, alpha: float, t: int) -> np.ndarray:
    if not 0 <= t < mf.horizon:
        raise IndexError(f"t={t} outside 0..{mf.horizon - 1}")
    w = neighborhood_weights(g, mf.grid, [alpha])
    return aggregate(w, mf.marginals[:, t, :])[0]


def class_neighborhoods(g: Graphon, mf: MeanFieldEnsemble) -> np.ndarray:
    """Neighborhood mean field felt by every class representative at every time, shape (M, T, X)."""
    w = neighborhood_weights(g, mf.grid, mf.grid.representatives)
    per_t = aggregate(w, np.swapaxes(mf.marginals, 0, 1))  # (T, M, X)
    return np.swapaxes(per_t, 0, 1)


def evolve(model: GameModel, weights: np.ndarray, policy: np.ndarray) -> np.ndarray:
    """Synchronous marginal recursion for arbitrary class weights.

    weights: (M, M) with weights[m, n] = (1/M) W(alpha_m, alpha_n);
    policy: (M, T, X, U). Returns marginals (M, T, X).
    """
    M, T, X, _ = policy.shape
    mu = np.empty((M, T, X))
    mu[:, 0, :] = model.initial_distribution
    for t in range(T - 1):
        G = aggregate(weights, mu[:, t, :])
        P = model.transition_batch(G)
        mu[:, t + 1, :] = np.einsum("mx,mxu,mxuy->my", mu[:, t, :], policy[:, t], P)
    return mu


def forward_simulate(model: GameModel, g: Graphon, pol: PolicyEnsemble) -> MeanFieldEnsemble:
    if pol.horizon != model.horizon or pol.probs.shape[2:] != (model.num_states, model.num_actions):
        raise ValueError("policy shape does not match the model")
    w = neighborhood_weights(g, pol.grid, pol.grid.representatives)
    return MeanFieldEnsemble(pol.grid, evolve(model, w, pol.probs))


def lift_policy_gamma_n(pol: PolicyEnsemble, alphas) -> np.ndarray:
    """Per-agent policy table [i, t, x, u] taken from the nearest class representative."""
    return pol.probs[pol.grid.nearest(alphas)]
