import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scrforge.cyclic import (
    build_completion,
    cycle_block_matrix,
    cycle_canonical_basis,
    cyclic_approximate,
    embed_in_cycle,
    l0_bound,
    match_roots,
    matching_angles,
    min_cycle_dimension,
    perturbation_budget,
    theoretical_dimension,
)
from scrforge.dilation import dilate_system
from scrforge.errors import InvalidInputError, ResourceLimitError
from scrforge.linalg import block_diag, canonical_form, cycle_matrix, is_full_cycle, random_orthogonal, rotation
from scrforge.reservoir import InputStream, LinearReadout, LinearReservoir, drive, output_distance


def brute_feasible(angles, n_prime, delta):
    """Backtracking search for distinct roots, independent of the matcher."""
    roots = [2 * math.pi * a / n_prime for a in range(1, n_prime // 2)]
    options = [[a for a, r in enumerate(roots) if 2 * abs(math.sin((t - r) / 2)) < delta] for t in angles]

    def go(i, used):
        if i == len(angles):
            return True
        return any(go(i + 1, used | {a}) for a in options[i] if a not in used)

    return go(0, frozenset())


class TestBounds:
    def test_l0_values(self):
        assert l0_bound(0.1) == 32
        assert l0_bound(1.0) == 4
        assert l0_bound(math.sqrt(2)) == 3

    def test_l0_large_delta(self):
        assert l0_bound(2.0) == 2 and l0_bound(5.0) == 2

    def test_l0_rejects_nonpositive(self):
        with pytest.raises(InvalidInputError):
            l0_bound(0.0)

    @given(st.floats(1e-3, 1.99))
    def test_l0_definition(self, delta):
        l0 = l0_bound(delta)
        alpha = math.acos(1 - delta**2 / 2)
        assert math.pi / l0 < alpha
        assert l0 == 1 or not math.pi / (l0 - 1) < alpha * (1 - 1e-12)
        # equivalent chord form
        assert abs(1 - np.exp(1j * math.pi / l0)) < delta

    def test_theoretical_dimension(self):
        assert theoretical_dimension(2, 0.1) == 192
        assert theoretical_dimension(40, 0.1) == 2624
        assert theoretical_dimension(1, math.sqrt(2)) == 12


class TestMatchRoots:
    def test_exact_root(self):
        m = match_roots([math.pi / 2], 4, 0.01)
        assert m.assignment == (1,)

    def test_two_angles_one_root(self):
        assert match_roots([math.pi / 2, math.pi / 2], 4, 1.0) is None

    def test_empty(self):
        m = match_roots([], 8, 0.1)
        assert m.assignment == () and m.max_error == 0.0

    def test_rejects_odd(self):
        with pytest.raises(InvalidInputError):
            match_roots([1.0], 7, 0.1)

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidInputError):
            match_roots([4.0], 8, 0.1)

    @given(st.lists(st.floats(0, math.pi), min_size=1, max_size=5), st.integers(2, 12), st.floats(0.05, 1.5))
    def test_agrees_with_backtracking(self, angles, half, delta):
        n_prime = 2 * half
        m = match_roots(angles, n_prime, delta)
        assert (m is not None) == brute_feasible(angles, n_prime, delta)
        if m is not None:
            assert len(set(m.assignment)) == len(angles)
            assert all(0 < a < n_prime // 2 for a in m.assignment)
            assert np.all(m.errors < delta)

    @given(st.lists(st.floats(0, math.pi), min_size=2, max_size=6), st.integers(0, 2**31))
    def test_refinement_does_not_increase_error(self, angles, seed):
        n_prime, delta = 40, 0.5
        a = match_roots(angles, n_prime, delta, refine=False)
        b = match_roots(angles, n_prime, delta, refine=True)
        assert (a is None) == (b is None)
        if a is not None:
            assert np.sum(b.errors**2) <= np.sum(a.errors**2) + 1e-12


class TestMinCycleDimension:
    def test_quarter_turn(self):
        assert min_cycle_dimension([math.pi / 2], 0.01)[0] == 4

    def test_sixth_root(self):
        assert min_cycle_dimension([2 * math.pi / 6], 1e-9)[0] == 6

    def test_empty(self):
        assert min_cycle_dimension([], 0.1)[0] == 4

    def test_haar_far_below_bound(self):
        cf = canonical_form(random_orthogonal(20, 5))
        angles = matching_angles(cf)
        n_c, m = min_cycle_dimension(angles, 0.1)
        bound = theoretical_dimension(len(angles), 0.1)
        assert n_c <= bound and n_c < bound / 5
        assert m.n_prime == n_c and m.max_error < 0.1

    @given(st.lists(st.floats(0, math.pi), min_size=1, max_size=4), st.floats(0.1, 1.0))
    def test_minimal_against_scan(self, angles, delta):
        n_c, _ = min_cycle_dimension(angles, delta)
        start = max(2 * len(angles) + 2, 4)
        for n_prime in range(start, n_c, 2):
            assert not brute_feasible(angles, n_prime, delta)
        assert brute_feasible(angles, n_c, delta)

    def test_resource_limit(self):
        with pytest.raises(ResourceLimitError) as exc:
            min_cycle_dimension([0.001, 0.3, 1.0], 1e-4, max_dim=50)
        assert exc.value.quantity == "n_C"


class TestCompletion:
    def test_no_interior_roots_left(self):
        m = match_roots([math.pi / 2], 4, 0.01)
        assert np.array_equal(build_completion(m), np.diag([1.0, -1.0]))

    def test_missing_root(self):
        m = match_roots([math.pi / 3], 6, 0.01)
        expected = block_diag(rotation(2 * math.pi * 2 / 6), np.eye(1), -np.eye(1))
        assert np.allclose(build_completion(m), expected, atol=1e-15)

    @given(st.lists(st.floats(0, math.pi), min_size=1, max_size=5), st.floats(0.2, 1.0))
    def test_orthogonal(self, angles, delta):
        _, m = min_cycle_dimension(angles, delta)
        D = build_completion(m)
        assert D.shape[0] == m.n_prime - 2 * len(angles)
        assert np.linalg.norm(D.T @ D - np.eye(D.shape[0]), 2) <= 1e-12


class TestCycleBasis:
    def test_four(self):
        J, order = cycle_canonical_basis(4)
        T = J.T @ cycle_matrix(4) @ J
        assert np.abs(T - block_diag(rotation(math.pi / 2), np.eye(1), -np.eye(1))).max() <= 1e-12
        assert order == (1,)

    def test_orthonormal(self):
        J, _ = cycle_canonical_basis(6)
        assert np.abs(J.T @ J - np.eye(6)).max() <= 1e-12

    def test_eighth_roots(self):
        J, _ = cycle_canonical_basis(8)
        ev = np.sort_complex(np.linalg.eigvals(J @ cycle_block_matrix(8) @ J.T))
        roots = np.sort_complex(np.exp(2j * np.pi * np.arange(8) / 8))
        assert np.abs(ev - roots).max() <= 1e-10

    @pytest.mark.parametrize("n", [10, 64, 1000])
    def test_block_form(self, n):
        J, _ = cycle_canonical_basis(n)
        assert np.abs(J.T @ cycle_matrix(n) @ J - cycle_block_matrix(n)).max() <= 1e-10

    def test_rejects_odd(self):
        with pytest.raises(InvalidInputError):
            cycle_canonical_basis(5)


class TestEmbedding:
    @pytest.mark.parametrize("n,delta,seed", [(4, 0.3, 0), (7, 0.2, 1), (12, 0.1, 2), (9, 0.1, 3)])
    def test_perturbation_below_tolerance(self, n, delta, seed):
        U = random_orthogonal(n, seed)
        emb = embed_in_cycle(U, delta)
        P = emb.transform
        assert np.linalg.norm(P.T @ P - np.eye(emb.n_C), 2) <= 1e-9
        gap = np.linalg.norm(P.T @ cycle_matrix(emb.n_C) @ P - block_diag(U, emb.completion), 2)
        assert gap < delta
        assert gap == pytest.approx(emb.perturbation())
        assert emb.n_C <= emb.theoretical_bound

    def test_reflection_only(self):
        # one +1 pair is matched as angle 0, the lone +1 and -1 land on the cycle's own
        U = np.diag([1.0, 1.0, 1.0, -1.0])
        emb = embed_in_cycle(U, 0.1)
        assert emb.leftover == (1, -1) and emb.n_grouped == 1
        assert emb.perturbation() < 0.1
        assert emb.perturbation() == pytest.approx(emb.matching.max_error)

    def test_cycle_image_is_exact(self):
        S = random_orthogonal(6, 4)
        U = S.T @ cycle_matrix(6) @ S
        emb = embed_in_cycle(U, 0.5)
        assert emb.n_C == 6 and emb.completion.size == 0
        assert emb.perturbation() < 1e-9

    def test_rejects_non_orthogonal(self):
        with pytest.raises(InvalidInputError):
            embed_in_cycle(np.diag([0.5, 1.0]), 0.1)


def small_system(rng, n=3, lam=0.8, v_scale=0.1):
    W = rng.standard_normal((n, n))
    W *= lam / np.linalg.norm(W, 2)
    return LinearReservoir(W, rng.uniform(-v_scale, v_scale, (n, 1)),
                           LinearReadout(rng.standard_normal((1, n))), 1.0)


class TestCyclicApproximate:
    def test_budget(self):
        lam, M, v, delta = 0.8, 1.0, 0.2, 0.05
        N, d0 = perturbation_budget(lam, M, v, delta)
        assert 2 * M * v * lam ** (N + 1) / (1 - lam) < delta / 2
        k = np.arange(N + 1)
        assert M * v * np.sum((lam + d0) ** k - lam**k) < delta / 2
        assert M * v * np.sum((lam + d0 * (1 + 1e-6)) ** k - lam**k) >= delta / 2 * (1 - 1e-6)

    def test_budget_zero_input(self):
        assert perturbation_budget(0.5, 1.0, 0.0, 0.1) == (0, math.inf)

    def test_state_gap(self, rng):
        R = small_system(rng)
        R_U, _ = dilate_system(R, 0.01)
        delta = 0.02
        cyc = cyclic_approximate(R_U, delta)
        assert is_full_cycle(cycle_matrix(cyc.n_C))
        assert np.linalg.norm(cyc.coupling(), 2) == pytest.approx(R.lam, rel=1e-12)
        assert cyc.n_C <= cyc.theoretical_bound
        assert cyc.perturbation() < min(delta, cyc.delta0) / cyc.lam
        u = rng.uniform(-1, 1, (400, 1))
        Pn = cyc.state_map(R_U.n)
        x_c = cyc.simulate(u, 0, observe=lambda X: Pn @ X)[0]
        assert np.linalg.norm(drive(R_U, u, 0) - x_c, axis=1).max() < delta

    def test_perturbation_power_bound(self, rng):
        R = small_system(rng)
        R_U, _ = dilate_system(R, 0.01)
        cyc = cyclic_approximate(R_U, 0.05)
        P = cyc.transform
        lam = cyc.lam
        W0 = lam * P.T @ cycle_matrix(cyc.n_C) @ P
        W1 = lam * block_diag(R_U.W / lam, cyc.completion)
        d0 = cyc.delta0
        A, B = np.eye(cyc.n_C), np.eye(cyc.n_C)
        for j in range(1, cyc.tail_order + 1):
            A, B = A @ W0, B @ W1
            assert np.linalg.norm(A - B, 2) <= (lam + d0) ** j - lam**j + 1e-12

    def test_zero_input_coupling(self, rng):
        R = small_system(rng, v_scale=0.0)
        R_U, _ = dilate_system(R, 0.01)
        cyc = cyclic_approximate(R_U, 0.05)
        assert np.all(cyc.V_C == 0)
        u = [InputStream(rng.uniform(-1, 1, (50, 1)), 1.0)]
        assert output_distance(R_U, cyc, u, 0) == 0.0

    def test_similarity_equivalence(self, rng):
        R = small_system(rng)
        R_U, _ = dilate_system(R, 0.01)
        cyc = cyclic_approximate(R_U, 0.05)
        # the explicit dense system and the gather-based one agree
        u = [InputStream(rng.uniform(-1, 1, (80, 1)), 1.0)]
        assert output_distance(cyc, cyc.to_reservoir(), u, 0) <= 1e-12
