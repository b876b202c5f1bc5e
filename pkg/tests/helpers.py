"""Shared test utilities: independent brute-force oracles and tiny scenes."""

from __future__ import annotations

import numpy as np

from clickseg.mrf import EnergyProblem


def enumerate_minimum(
    problem: EnergyProblem, tie_tol: float = 1e-11
) -> tuple[float, np.ndarray]:
    """Exhaustive minimum of a binary pairwise energy.

    Returns the minimum energy and the elementwise AND of all minimizers,
    which (by submodularity) is itself a minimizer and matches the solver's
    prefer-label-0 tie-break.
    """
    n = problem.n_nodes
    assert n <= 22, "enumeration oracle is for small instances"
    count = 1 << n
    bits = (np.arange(count)[:, None] >> np.arange(n)[None, :]) & 1
    energies = bits @ problem.unary[:, 1] + (1 - bits) @ problem.unary[:, 0]
    if len(problem.pairwise):
        i = problem.edge_i
        j = problem.edge_j
        w = problem.edge_w
        energies = energies + (bits[:, i] != bits[:, j]) @ w
    best = energies.min()
    minimizers = bits[energies <= best + tie_tol]
    meet = minimizers.min(axis=0).astype(np.uint8)
    return float(best), meet


def random_problem(rng: np.random.Generator, max_nodes: int = 12) -> EnergyProblem:
    n = int(rng.integers(1, max_nodes + 1))
    unary = rng.uniform(0, 10, size=(n, 2))
    pw = []
    for _ in range(int(rng.integers(0, 2 * n + 1))):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            pw.append((int(i), int(j), float(rng.uniform(0, 5))))
    return EnergyProblem(n_nodes=n, unary=unary, pairwise=pw)
