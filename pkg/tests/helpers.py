"""Shared random-state constructors for the test suite."""

import numpy as np

from gmedyn.channel import XState
from gmedyn.qstate import DensityMatrix, permute_parties


def random_density_matrix(rng, dim, party_dims=None, rank=None):
    """Ginibre-random density matrix (full rank unless rank given)."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityMatrix(m, party_dims or (dim,))


def random_xstate(rng) -> XState:
    pops = rng.dirichlet(np.ones(4))
    r14 = rng.uniform(0, 0.999) * np.sqrt(pops[0] * pops[3])
    r23 = rng.uniform(0, 0.999) * np.sqrt(pops[1] * pops[2])
    phi14, phi23 = rng.uniform(0, 2 * np.pi, size=2)
    return XState(rho11=pops[0], rho22=pops[1], rho33=pops[2], rho44=pops[3],
                  rho14=r14 * np.exp(1j * phi14), rho23=r23 * np.exp(1j * phi23))


def random_product_state(rng, split, n_parties=4):
    """Product state across one bipartition of qubits, in global order."""
    split = sorted(split)
    rest = [i for i in range(n_parties) if i not in split]
    da, db = 2 ** len(split), 2 ** len(rest)
    a = random_density_matrix(rng, da).matrix
    b = random_density_matrix(rng, db).matrix
    m = np.kron(a, b)
    # kron order is (split parties, rest); permute legs back to global order
    order = split + rest
    perm = [order.index(i) for i in range(n_parties)]
    m = permute_parties(m, (2,) * n_parties, perm)
    return DensityMatrix(m, (2,) * n_parties)


def random_biseparable(rng, n_parties=4, components=4):
    """Random mixture of product states across random bipartitions.

    Biseparable by construction, but generally NOT PPT across cuts other
    than each component's own split.
    """
    weights = rng.dirichlet(np.ones(components))
    m = np.zeros((2 ** n_parties, 2 ** n_parties), dtype=complex)
    for w in weights:
        size = rng.integers(1, n_parties)
        split = list(rng.choice(n_parties, size=size, replace=False))
        m += w * random_product_state(rng, split, n_parties).matrix
    return DensityMatrix(m, (2,) * n_parties)


def random_fully_separable(rng, n_parties=4, components=5):
    """Mixture of full single-qubit products; PPT across every cut."""
    weights = rng.dirichlet(np.ones(components))
    m = np.zeros((2 ** n_parties, 2 ** n_parties), dtype=complex)
    for w in weights:
        factor = np.array([[1.0]], dtype=complex)
        for _ in range(n_parties):
            factor = np.kron(factor, random_density_matrix(rng, 2).matrix)
        m += w * factor
    return DensityMatrix(m, (2,) * n_parties)
