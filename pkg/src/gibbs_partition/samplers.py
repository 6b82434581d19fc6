"""Sampling oracles for pi_b: exact enumeration and restart-Metropolis MCMC.

Every draw consumes a caller-supplied numpy Generator, and every draw is
tallied in the oracle's counter keyed by the b value it was served at; the
counter is the ground truth for all sample-complexity accounting.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .models import ENUMERATION_GUARD, GibbsModel, EnumerationGuardError

KIND_EXACT = "exact-enumeration"
KIND_MCMC = "mcmc"

_CACHE_CAP = 128


class DrawCounter:
    """Monotone tally of draws served, bucketed by b value."""

    __slots__ = ("by_b",)

    def __init__(self):
        self.by_b: dict[float, int] = {}

    def record(self, b: float, n: int = 1) -> None:
        self.by_b[b] = self.by_b.get(b, 0) + n

    @property
    def total(self) -> int:
        return sum(self.by_b.values())


@dataclass
class SamplerOracle:
    """Source of draws from pi_b for b in [0, beta].

    ``tv_budget_per_draw`` is a declared upper bound on the total-variation
    distance of each draw from pi_b (0 for exact sampling); the library only
    verifies the accounting arithmetic, not the bound itself.
    """

    model: GibbsModel
    kind: str
    tv_budget_per_draw: float = 0.0
    mcmc_steps: int = 0
    counter: DrawCounter = field(default_factory=DrawCounter)
    _cdf_cache: dict = field(default_factory=dict, repr=False)
    _accept_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in (KIND_EXACT, KIND_MCMC):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.kind == KIND_EXACT and self.tv_budget_per_draw != 0.0:
            raise ValueError("exact-enumeration oracles must declare tv budget 0")
        if self.tv_budget_per_draw < 0:
            raise ValueError("tv_budget_per_draw must be nonnegative")
        if self.kind == KIND_MCMC:
            if self.model.graph is None:
                raise ValueError("mcmc sampling requires an Ising model")
            if self.mcmc_steps < 0:
                raise ValueError("mcmc_steps must be nonnegative")

    def draw(self, b: float, rng: np.random.Generator) -> int:
        if self.kind == KIND_EXACT:
            return draw_exact(self, b, rng)
        return draw_mcmc(self, b, rng)

    def with_model(self, model: GibbsModel) -> "SamplerOracle":
        """View of this oracle on another model, sharing the draw counter.

        Shifting H by a constant leaves pi_b unchanged, so the shifted
        pipeline draws through a view and all draws land in one tally.
        """
        return SamplerOracle(
            model=model,
            kind=self.kind,
            tv_budget_per_draw=self.tv_budget_per_draw,
            mcmc_steps=self.mcmc_steps,
            counter=self.counter,
        )


def exact_oracle(model: GibbsModel) -> SamplerOracle:
    if model.num_states > ENUMERATION_GUARD:
        raise EnumerationGuardError("model too large for enumeration sampling")
    return SamplerOracle(model=model, kind=KIND_EXACT)


def mcmc_oracle(model: GibbsModel, mcmc_steps: int, tv_budget_per_draw: float) -> SamplerOracle:
    return SamplerOracle(
        model=model,
        kind=KIND_MCMC,
        tv_budget_per_draw=tv_budget_per_draw,
        mcmc_steps=mcmc_steps,
    )


def _cumweights(oracle: SamplerOracle, b: float) -> list[float]:
    cw = oracle._cdf_cache.get(b)
    if cw is None:
        logw = -b * oracle.model.hamiltonian
        logw = logw - logw.max()
        cw = np.cumsum(np.exp(logw)).tolist()
        if len(oracle._cdf_cache) >= _CACHE_CAP:
            oracle._cdf_cache.pop(next(iter(oracle._cdf_cache)))
        oracle._cdf_cache[b] = cw
    return cw


def draw_exact(oracle: SamplerOracle, b: float, rng: np.random.Generator) -> int:
    """One state from pi_b by CDF inversion over the enumerated weights."""
    if oracle.kind != KIND_EXACT:
        raise ValueError("draw_exact needs an exact-enumeration oracle")
    cw = _cumweights(oracle, b)
    u = rng.random() * cw[-1]
    idx = bisect_right(cw, u)
    oracle.counter.record(b)
    return min(idx, len(cw) - 1)


def _accept_tables(oracle: SamplerOracle, b: float):
    # accept[v][a] = min(1, exp(-b * deltaH)) for flipping site v with a
    # currently-aligned neighbors; deltaH = 2a - deg(v).
    tables = oracle._accept_cache.get(b)
    if tables is None:
        adj = oracle.model.graph.adjacency()
        tables = []
        for v in range(oracle.model.graph.num_vertices):
            deg = len(adj[v])
            row = []
            for a in range(deg + 1):
                delta = 2 * a - deg
                row.append(1.0 if delta <= 0 else math.exp(-b * delta))
            tables.append(row)
        if len(oracle._accept_cache) >= _CACHE_CAP:
            oracle._accept_cache.pop(next(iter(oracle._accept_cache)))
        oracle._accept_cache[b] = tables
    return tables


def draw_mcmc(oracle: SamplerOracle, b: float, rng: np.random.Generator) -> int:
    """State after mcmc_steps systematic Metropolis sweeps from a uniform start.

    Each draw restarts from a fresh uniform state so draws are independent,
    at the cost of re-running the burn-in every time.
    """
    if oracle.kind != KIND_MCMC:
        raise ValueError("draw_mcmc needs an mcmc oracle")
    graph = oracle.model.graph
    nv = graph.num_vertices
    adj = graph.adjacency()
    state = int(rng.integers(0, 2 ** nv))
    steps = oracle.mcmc_steps
    if steps > 0:
        accept = _accept_tables(oracle, b)
        us = rng.random(steps * nv)
        pos = 0
        for _ in range(steps):
            for v in range(nv):
                sv = (state >> v) & 1
                aligned = 0
                for u_ in adj[v]:
                    if ((state >> u_) & 1) == sv:
                        aligned += 1
                if us[pos] < accept[v][aligned]:
                    state ^= 1 << v
                pos += 1
    oracle.counter.record(b)
    return state


def coupling_failure_bound(tv_budget_per_draw: float, total_draws: int) -> float:
    """Union-bound failure mass added by approximate draws: min(1, S * tv)."""
    if tv_budget_per_draw < 0 or total_draws < 0:
        raise ValueError("inputs must be nonnegative")
    return min(1.0, total_draws * tv_budget_per_draw)


def metropolis_sweep_matrix(model: GibbsModel, b: float) -> np.ndarray:
    """Exact one-sweep transition matrix of the systematic Metropolis kernel.

    Row-stochastic over the enumerated state space; used to measure the MCMC
    sampler's true total-variation error by evolving the start distribution.
    """
    if model.graph is None:
        raise ValueError("sweep matrix requires an Ising model")
    nv = model.graph.num_vertices
    adj = model.graph.adjacency()
    size = 2 ** nv
    sweep = np.eye(size)
    for v in range(nv):
        site = np.zeros((size, size))
        for s in range(size):
            sv = (s >> v) & 1
            aligned = sum(1 for u in adj[v] if ((s >> u) & 1) == sv)
            delta = 2 * aligned - len(adj[v])
            acc = 1.0 if delta <= 0 else math.exp(-b * delta)
            site[s, s ^ (1 << v)] = acc
            site[s, s] = 1.0 - acc
        sweep = sweep @ site
    return sweep


def mcmc_draw_distribution(model: GibbsModel, b: float, sweeps: int) -> np.ndarray:
    """Exact distribution of a restart-MCMC draw after the given sweep count."""
    size = model.num_states
    dist = np.full(size, 1.0 / size)
    if sweeps > 0:
        dist = dist @ np.linalg.matrix_power(metropolis_sweep_matrix(model, b), sweeps)
    return dist


def gibbs_distribution(model: GibbsModel, b: float) -> np.ndarray:
    logw = -b * model.hamiltonian
    logw = logw - logw.max()
    w = np.exp(logw)
    return w / w.sum()


def mcmc_tv_error(model: GibbsModel, b: float, sweeps: int) -> float:
    """TV distance between the restart-MCMC draw distribution and pi_b."""
    return 0.5 * float(
        np.abs(mcmc_draw_distribution(model, b, sweeps) - gibbs_distribution(model, b)).sum()
    )
