import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_contraction
from scrforge.dilation import (
    choose_order,
    coupling_unit,
    defect_operators,
    dilate_system,
    dilate_with_order,
    egervary_dilation,
    truncation_bound,
)
from scrforge.errors import InvalidInputError
from scrforge.linalg import is_full_cycle, random_orthogonal
from scrforge.reservoir import InputStream, LinearReadout, LinearReservoir, drive, output_distance


def brute_order(lam, M, v, delta):
    N = 1
    while 2 * M * v * lam ** (N + 1) / (1 - lam) >= delta:
        N += 1
    return N


class TestChooseOrder:
    def test_slow_decay(self):
        assert choose_order(0.9, 1.0, 1.0, 0.01) == 72

    def test_fast_decay(self):
        assert choose_order(0.5, 1.0, 2.0, 0.5) == 4

    def test_lower_cap(self):
        assert choose_order(0.5, 1.0, 1.0, 2 * 0.25 / 0.5 + 1e-9) == 1

    def test_rejects_unit_lambda(self):
        with pytest.raises(InvalidInputError):
            choose_order(1.0, 1.0, 1.0, 0.1)

    @given(st.floats(0.05, 0.98), st.floats(0.1, 5), st.floats(0.1, 5), st.floats(1e-6, 1.0))
    def test_matches_linear_scan(self, lam, M, v, delta):
        N = choose_order(lam, M, v, delta)
        assert N == brute_order(lam, M, v, delta)
        assert truncation_bound(lam, M, v, N) < delta


class TestEgervary:
    def test_orthogonal_source(self):
        W1 = random_orthogonal(4, 2)
        D_W, D_Wt = defect_operators(W1)
        assert np.abs(D_W).max() < 1e-7 and np.abs(D_Wt).max() < 1e-7
        U = egervary_dilation(W1, 3)
        for k in range(1, 4):
            assert np.abs(np.linalg.matrix_power(U, k)[:4, :4] - np.linalg.matrix_power(W1, k)).max() <= 1e-10

    def test_zero_scalar(self):
        U = egervary_dilation(np.zeros((1, 1)), 2)
        assert np.allclose(np.abs(U), np.abs(U).round())
        assert is_full_cycle(np.abs(U))
        for k in (1, 2):
            assert np.linalg.matrix_power(U, k)[0, 0] == 0.0

    def test_rejects_expansive(self):
        with pytest.raises(InvalidInputError):
            egervary_dilation(np.array([[1.1]]), 2)

    def test_rejects_zero_order(self):
        with pytest.raises(InvalidInputError):
            egervary_dilation(np.zeros((2, 2)), 0)

    def test_random_corner_powers(self, rng):
        W1 = random_contraction(rng, 5, 1.0)
        U = egervary_dilation(W1, 10)
        assert np.linalg.norm(U.T @ U - np.eye(55), 2) <= 1e-9
        P = np.eye(55)
        for k in range(1, 11):
            P = P @ U
            assert np.abs(P[:5, :5] - np.linalg.matrix_power(W1, k)).max() <= 1e-10

    @given(st.integers(1, 6), st.integers(1, 8), st.floats(0.1, 0.99), st.integers(0, 2**31))
    def test_corner_and_tail_bounds(self, n, N, lam, seed):
        W = random_contraction(np.random.default_rng(seed), n, lam)
        U = egervary_dilation(W / lam, N)
        assert np.linalg.norm(U.T @ U - np.eye(U.shape[0]), 2) <= 1e-9
        Uk = np.eye(U.shape[0])
        for k in range(1, 3 * N + 1):
            Uk = Uk @ U
            Ak = lam**k * Uk[:n, :n]
            if k <= N:
                assert np.abs(Ak - np.linalg.matrix_power(W, k)).max() <= 1e-10
            assert np.linalg.norm(Ak, 2) <= lam**k * (1 + 1e-12)


class TestDilateSystem:
    def make(self, rng, n=5, lam=0.8):
        return LinearReservoir(random_contraction(rng, n, lam), rng.uniform(-1, 1, (n, 1)),
                               LinearReadout(rng.standard_normal((2, n))), 1.0)

    def test_structure(self, rng):
        R = self.make(rng)
        R_U, plan = dilate_system(R, 1e-3)
        n = R.n
        assert plan.n_dilated == R_U.n == (plan.N + 1) * n
        assert plan.bound < 1e-3
        assert np.array_equal(R_U.V[:n], R.V) and np.all(R_U.V[n:] == 0)
        assert R_U.lam == pytest.approx(R.lam, rel=1e-12)
        Wu = coupling_unit(R_U)
        assert np.linalg.norm(Wu.T @ Wu - np.eye(R_U.n), 2) <= 1e-9

    def test_output_gap(self, rng):
        R = self.make(rng)
        delta = 1e-3
        R_U, _ = dilate_system(R, delta)
        streams = [InputStream(rng.uniform(-1, 1, (200, 1)), 1.0) for _ in range(5)]
        assert output_distance(R, R_U, streams, 0) < R.readout.lipschitz * delta

    def test_state_gap_below_bound(self, rng):
        R = self.make(rng, lam=0.9)
        for N in (1, 3, 8):
            R_U = dilate_with_order(R, N)
            u = rng.uniform(-1, 1, (300, 1))
            gap = np.linalg.norm(drive(R_U, u, 0)[:, :R.n] - drive(R, u, 0), axis=1).max()
            assert gap <= truncation_bound(R.lam, 1.0, np.linalg.norm(R.V, 2), N)

    def test_already_orthogonal_coupling(self, rng):
        R = LinearReservoir(0.7 * random_orthogonal(4, 1), rng.uniform(-1, 1, (4, 1)), None, 1.0)
        R_U = dilate_with_order(R, 1)
        u = [InputStream(rng.uniform(-1, 1, (100, 1)), 1.0)]
        assert output_distance(R, R_U, u, 0) <= 1e-12

    def test_rejects_zero_coupling(self):
        with pytest.raises(InvalidInputError):
            dilate_with_order(LinearReservoir(np.zeros((2, 2)), np.ones((2, 1))), 2)
