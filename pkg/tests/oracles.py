"""Slow, loop-based reference computations kept independent of the vectorized solvers."""

import itertools

import numpy as np


def loop_neighborhood(g, reps, marginals_t, alpha):
    """(1/M) sum_n W(alpha, a_n) mu_n, one class at a time."""
    M = len(reps)
    out = np.zeros(marginals_t.shape[1])
    for n in range(M):
        out += float(g(alpha, reps[n])) * marginals_t[n]
    return out / M


def loop_forward(model, g, reps, policy):
    """Plain-python marginal recursion over classes, states and actions."""
    M, T, X, U = policy.shape
    mu = np.zeros((M, T, X))
    mu[:, 0] = model.initial_distribution
    for t in range(T - 1):
        Gs = [loop_neighborhood(g, reps, mu[:, t], reps[m]) for m in range(M)]
        for m in range(M):
            for x in range(X):
                for u in range(U):
                    mu[m, t + 1] += mu[m, t, x] * policy[m, t, x, u] * model.transition(x, u, Gs[m])
    return mu


def policy_return(model, Gs, start, plan):
    """Expected return of a deterministic Markov plan[t][x] from state ``start`` with fixed G_t."""
    T, X = len(Gs), model.num_states
    dist = np.zeros(X)
    dist[start] = 1.0
    total = 0.0
    for t in range(T):
        nxt = np.zeros(X)
        for x in range(X):
            if dist[x] == 0:
                continue
            u = plan[t][x]
            total += dist[x] * model.reward(x, u, Gs[t])
            nxt += dist[x] * model.transition(x, u, Gs[t])
        dist = nxt
    return total


def brute_force_values(model, Gs):
    """Best expected return from each start state over all |U|^(|X| T) deterministic Markov policies."""
    T, X, U = len(Gs), model.num_states, model.num_actions
    best = np.full(X, -np.inf)
    for flat in itertools.product(range(U), repeat=X * T):
        plan = [flat[t * X : (t + 1) * X] for t in range(T)]
        for s in range(X):
            best[s] = max(best[s], policy_return(model, Gs, s, plan))
    return best
