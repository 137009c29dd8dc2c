import itertools

import numpy as np
import scipy.sparse
from hypothesis import given, strategies as st
from scipy.sparse.csgraph import maximum_bipartite_matching

from scrforge.matching import hopcroft_karp


def oracle_size(adj, n_right):
    rows = [u for u, vs in enumerate(adj) for _ in vs]
    cols = [v for vs in adj for v in vs]
    G = scipy.sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(adj), n_right))
    return int((maximum_bipartite_matching(G, perm_type="column") >= 0).sum())


def brute_size(adj, n_right):
    best = 0
    for r in range(len(adj), 0, -1):
        for left in itertools.combinations(range(len(adj)), r):
            for right in itertools.permutations(range(n_right), r):
                if all(v in adj[u] for u, v in zip(left, right)):
                    return r
    return best


def check_valid(adj, match):
    used = [v for v in match if v != -1]
    assert len(used) == len(set(used))
    for u, v in enumerate(match):
        assert v == -1 or v in adj[u]


def test_perfect_chain():
    adj = [[0, 1], [1, 2], [2]]
    m = hopcroft_karp(adj, 3)
    check_valid(adj, m)
    assert m == [0, 1, 2]


def test_needs_augmenting_path():
    # greedy on preference order would take 0 for both first vertices
    adj = [[0, 1], [0]]
    m = hopcroft_karp(adj, 2)
    assert m == [1, 0]


def test_deficient():
    adj = [[0], [0], [0]]
    m = hopcroft_karp(adj, 1)
    check_valid(adj, m)
    assert sum(v != -1 for v in m) == 1


def test_empty():
    assert hopcroft_karp([], 4) == []
    assert hopcroft_karp([[]], 4) == [-1]


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_size_matches_brute_force(n_left, n_right, seed):
    rng = np.random.default_rng(seed)
    adj = [sorted(set(rng.integers(0, n_right, rng.integers(0, n_right + 1)).tolist())) for _ in range(n_left)]
    m = hopcroft_karp(adj, n_right)
    check_valid(adj, m)
    assert sum(v != -1 for v in m) == brute_size(adj, n_right)


@given(st.integers(1, 60), st.integers(1, 60), st.floats(0.02, 0.4), st.integers(0, 2**31))
def test_size_matches_scipy(n_left, n_right, p, seed):
    rng = np.random.default_rng(seed)
    adj = [np.flatnonzero(rng.uniform(size=n_right) < p).tolist() for _ in range(n_left)]
    m = hopcroft_karp(adj, n_right)
    check_valid(adj, m)
    assert sum(v != -1 for v in m) == oracle_size(adj, n_right)
