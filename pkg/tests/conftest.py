"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the library's vectorized code paths:
partition sums run over explicit Boltzmann terms with math.fsum, and Ising
energies are recomputed from spin tuples via itertools.  Tests freeze
expected values computed from these oracles, never from the code they
check.
"""

import itertools
import math

import numpy as np
import pytest

from gibbs_partition import (
    constant_model,
    cycle_edges,
    grid_edges,
    ising_model,
    path_edges,
    table_model,
)


def brute_log_partition(values, beta):
    """ln sum exp(-beta*H) over an explicit energy list, via fsum."""
    terms = [-beta * float(h) for h in values]
    top = max(terms)
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


def brute_ising_energies(edges, num_vertices):
    """H(x) for every state, recomputed from explicit spin tuples.

    Matches the library's state indexing contract: spin(v) of state s is +1
    iff bit v of s is set.
    """
    energies = [None] * (2 ** num_vertices)
    for spins in itertools.product((-1, 1), repeat=num_vertices):
        s = sum(1 << v for v, spin in enumerate(spins) if spin == 1)
        energies[s] = -float(sum(1 for i, j in edges if spins[i] == spins[j]))
    return energies


def brute_z(model, beta):
    return brute_log_partition(model.hamiltonian.tolist(), beta)


@pytest.fixture
def k2():
    return ising_model([(0, 1)], num_vertices=2)


@pytest.fixture
def path3():
    return ising_model(path_edges(3), num_vertices=3)


@pytest.fixture
def c4():
    return ising_model(cycle_edges(4), num_vertices=4)


@pytest.fixture
def grid22():
    return ising_model(grid_edges(2, 2), num_vertices=4)


@pytest.fixture
def const1():
    return constant_model(1.0)


@pytest.fixture
def mixed_table():
    return table_model([-2.0, -1.0, 0.0, 1.0, 2.0], name="mixed-5")


def tiny_models():
    """The built-in desk-scale menagerie, as (label, model) pairs."""
    return [
        ("k2", ising_model([(0, 1)], num_vertices=2)),
        ("path-3", ising_model(path_edges(3), num_vertices=3)),
        ("cycle-4", ising_model(cycle_edges(4), num_vertices=4)),
        ("grid-2x2", ising_model(grid_edges(2, 2), num_vertices=4)),
        ("const-1", constant_model(1.0)),
        ("mixed-5", table_model([-2.0, -1.0, 0.0, 1.0, 2.0], name="mixed-5")),
    ]


def z_grid(model, betas):
    return np.array([brute_z(model, b) for b in betas])
