"""Small fixed graphs reused across the test suite."""

import numpy as np


def triangle():
    """Three mutually tied vertices with edge weights 20, 21, 22."""
    a = np.zeros((3, 3))
    a[0, 1] = a[1, 0] = 20.0
    a[0, 2] = a[2, 0] = 21.0
    a[1, 2] = a[2, 1] = 22.0
    return a


def five_node():
    """The triangle plus a strongly tied fourth vertex and a weak fifth."""
    a = np.zeros((5, 5))
    a[0, 1] = 20.0
    a[0, 2] = 21.0
    a[1, 2] = 22.0
    a[0, 3] = 30.0
    a[1, 3] = 35.0
    a[2, 3] = 41.0
    for i in range(4):
        a[i, 4] = 1.0
    return a + a.T


def k3():
    """Complete graph on three vertices, unit weights."""
    return np.ones((3, 3)) - np.eye(3)


def two_edges():
    """Two disjoint unit edges: {0,1} and {2,3}."""
    a = np.zeros((4, 4))
    a[0, 1] = a[1, 0] = 1.0
    a[2, 3] = a[3, 2] = 1.0
    return a


def random_affinity(rng, n, low=0.0, high=1.0):
    """Random symmetric nonnegative affinity with zero diagonal."""
    raw = rng.uniform(low, high, size=(n, n))
    a = (raw + raw.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a


def disjoint_cliques(k, size, weight=1.0):
    """k disjoint complete subgraphs of the given size."""
    n = k * size
    a = np.zeros((n, n))
    for c in range(k):
        lo = c * size
        a[lo : lo + size, lo : lo + size] = weight
    np.fill_diagonal(a, 0.0)
    return a
