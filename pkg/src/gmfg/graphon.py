"""Graphons, W-random graph sampling and step graphons of finite graphs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

KINDS = ("uniform_attachment", "ranked_attachment", "erdos_renyi", "step")

# short names accepted in configs
ALIASES = {
    "unif": "uniform_attachment",
    "uniform": "uniform_attachment",
    "rank": "ranked_attachment",
    "ranked": "ranked_attachment",
    "er": "erdos_renyi",
}


@dataclass(frozen=True)
class Graphon:
    """A symmetric kernel W on the unit square with values in [0, 1].

    Analytic kinds are ``uniform_attachment`` (1 - max(x, y)),
    ``ranked_attachment`` (1 - xy) and ``erdos_renyi`` (constant ``p``).
    The ``step`` kind holds the adjacency matrix of a finite graph.
    """

    kind: str
    p: float = 0.0
    adjacency: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown graphon kind {self.kind!r}")
        if self.kind == "erdos_renyi" and not 0.0 <= self.p <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {self.p}")
        if self.kind == "step":
            adj = np.asarray(self.adjacency, dtype=np.int8)
            if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
                raise ValueError("step graphon needs a square, non-empty adjacency")
            if not np.array_equal(adj, adj.T):
                raise ValueError("adjacency must be symmetric")
            if np.any(np.diag(adj) != 0):
                raise ValueError("adjacency must have a zero diagonal")
            if np.any((adj != 0) & (adj != 1)):
                raise ValueError("adjacency must be binary")
            adj.setflags(write=False)
            object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_name(cls, name: str, p: float = 0.5) -> "Graphon":
        kind = ALIASES.get(name, name)
        if kind == "erdos_renyi":
            return cls(kind, p=float(p))
        return cls(kind)

    @property
    def n(self) -> int:
        return 0 if self.adjacency is None else self.adjacency.shape[0]

    def __call__(self, x, y):
        """Evaluate W elementwise with numpy broadcasting."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "uniform_attachment":
            return 1.0 - np.maximum(x, y)
        if self.kind == "ranked_attachment":
            return 1.0 - x * y
        if self.kind == "erdos_renyi":
            return np.full(np.broadcast(x, y).shape, self.p)
        i = cell_index(x, self.n)
        j = cell_index(y, self.n)
        return self.adjacency[i, j].astype(float)

    def matrix(self, xs, ys=None) -> np.ndarray:
        """Kernel matrix ``K[a, b] = W(xs[a], ys[b])``."""
        xs = np.asarray(xs, dtype=float)
        ys = xs if ys is None else np.asarray(ys, dtype=float)
        return self(xs[:, None], ys[None, :])

    def to_dict(self) -> dict:
        if self.kind == "erdos_renyi":
            return {"kind": self.kind, "p": self.p}
        if self.kind == "step":
            return {"kind": self.kind, "n": self.n}
        return {"kind": self.kind}


def cell_index(x, n: int):
    """0-based cell of x under the half-open cells ((i-1)/n, i/n]; x=0 goes to the first cell."""
    idx = np.ceil(np.asarray(x, dtype=float) * n).astype(np.int64) - 1
    return np.clip(idx, 0, n - 1)


def evaluate(g: Graphon, x: float, y: float) -> float:
    return float(g(x, y))


@dataclass
class SampledGraph:
    """A finite simple graph together with the graphon indices that generated it."""

    n: int
    alphas: np.ndarray
    adjacency: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.adjacency = np.asarray(self.adjacency, dtype=np.int8)
        if self.alphas.shape != (self.n,) or self.adjacency.shape != (self.n, self.n):
            raise ValueError("inconsistent graph dimensions")
        if not np.array_equal(self.adjacency, self.adjacency.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(self.adjacency) != 0):
            raise ValueError("adjacency must have a zero diagonal")

    @property
    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(a), int(b)) for a, b in zip(i, j)]

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "seed": self.seed,
                "alphas": [float(a) for a in self.alphas],
                "edges": [list(e) for e in self.edges],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SampledGraph":
        obj = json.loads(text)
        n = int(obj["n"])
        adj = np.zeros((n, n), dtype=np.int8)
        for i, j in obj["edges"]:
            if not 0 <= i < j < n:
                raise ValueError(f"bad edge {(i, j)}: need 0 <= i < j < n")
            adj[i, j] = adj[j, i] = 1
        return cls(n=n, alphas=np.array(obj["alphas"], dtype=float), adjacency=adj, seed=obj.get("seed"))


def sample_w_random_graph(g: Graphon, n: int, seed: int) -> SampledGraph:
    """Draw indices uniformly, then each unordered pair i<j independently with prob W(a_i, a_j)."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    alphas = rng.uniform(0.0, 1.0, size=n)
    probs = g.matrix(alphas)
    coins = rng.uniform(0.0, 1.0, size=(n, n))
    upper = np.triu(coins < probs, k=1)
    adj = (upper | upper.T).astype(np.int8)
    return SampledGraph(n=n, alphas=alphas, adjacency=adj, seed=seed)


def step_graphon_from_graph(graph: SampledGraph) -> Graphon:
    return Graphon("step", adjacency=graph.adjacency)
