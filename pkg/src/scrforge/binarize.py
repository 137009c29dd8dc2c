"""From a cycle-coupled system to a simple cycle reservoir.

The input coupling is written as an average ``(1/N) sum_j F_j`` of k sign
matrices, and the cycle is stretched k-fold by a block permutation (which
is again a single cycle when ``gcd(n, k) = 1``). Stacking the ``F_j`` as
block rows gives a +-1 input matrix; averaging the state blocks in the
readout recovers the averaged input exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cyclic import CyclicApproximation
from .errors import InvalidInputError, ResourceLimitError
from .linalg import (
    SHIFT_CONVENTION,
    as_matrix,
    cycle_permutation,
    frozen,
    permutation_from_matrix,
    permutation_matrix,
)
from .reservoir import LinearReadout, StateSpaceSystem


@dataclass(frozen=True)
class Binarization:
    """``(1/N_avg) sum_j sign_matrices[j]`` approximates V entrywise to ``1/N_avg``."""

    k: int
    N_avg: int
    sign_matrices: np.ndarray  # (k, rows, cols) int8
    max_entry_error: float
    op_norm_error: float

    def average(self) -> np.ndarray:
        return self.sign_matrices.sum(axis=0, dtype=np.int64) / self.N_avg

    def stacked(self) -> np.ndarray:
        """Block rows ``[F_1; ...; F_k]``."""
        k, r, c = self.sign_matrices.shape
        return self.sign_matrices.reshape(k * r, c)


def _parity_round(x: np.ndarray, parity: int) -> np.ndarray:
    """Nearest integer of the given parity; ties go toward zero."""
    lo = 2 * np.floor((x - parity) / 2) + parity
    hi = lo + 2
    dlo, dhi = x - lo, hi - x
    pick_hi = (dhi < dlo) | ((dhi == dlo) & (np.abs(hi) < np.abs(lo)))
    return np.where(pick_hi, hi, lo).astype(np.int64)


def binarize(V, delta: float, n: int) -> Binarization:
    """Sign matrices whose average is within ``delta`` of V in operator norm.

    ``N_avg = ceil(sqrt(rows cols) / delta)``; k is the smallest integer at
    least ``ceil(N_avg max|V|) + 1`` that is coprime to ``n``. Each entry
    ``N_avg V_ij`` is rounded to ``q_ij`` with the parity of k, and the
    first ``(k + q_ij)/2`` sign matrices carry +1 there.
    """
    V = as_matrix(V, "V")
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    if n < 1:
        raise InvalidInputError("n must be positive")
    rows, cols = V.shape
    N_avg = math.ceil(math.sqrt(rows * cols) / delta)
    k = math.ceil(N_avg * float(np.abs(V).max(initial=0.0))) + 1
    while math.gcd(k, n) != 1:
        k += 1
    q = _parity_round(N_avg * V, k % 2)
    if np.abs(q).max(initial=0) > k:
        raise InvalidInputError("rounded entry exceeds the number of sign matrices")
    plus = (k + q) // 2  # number of leading +1's per entry
    j = np.arange(1, k + 1)[:, None, None]
    F = np.where(j <= plus[None], 1, -1).astype(np.int8)
    err = V - q / N_avg
    return Binarization(
        k=k, N_avg=N_avg, sign_matrices=frozen(F),
        max_entry_error=float(np.abs(err).max(initial=0.0)),
        op_norm_error=float(np.linalg.norm(err, 2)) if err.size else 0.0,
    )


def block_cycle_permutation(perm, k: int) -> np.ndarray:
    """Index array of the block permutation built from ``perm`` (length n).

    Block b of the image is ``P`` applied to block b-1 (block 0 takes block
    k-1), i.e. ``sigma(b, r) = (b - 1 mod k, perm[r])``.
    """
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.size
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    g = math.gcd(n, k)
    if g != 1:
        err = InvalidInputError(f"gcd(n, k) = {g}; the block matrix would not be a single cycle")
        err.gcd = g
        raise err
    return _block_perm(perm, k)


def _block_perm(perm: np.ndarray, k: int) -> np.ndarray:
    n = perm.size
    src_block = (np.arange(k) - 1) % k
    return (src_block[:, None] * n + perm[None, :]).reshape(-1)


def block_cycle(P, k: int, check_gcd: bool = True) -> np.ndarray:
    """The nk x nk block matrix with P in the top-right block and on the sub-block-diagonal."""
    perm = permutation_from_matrix(P)
    if perm is None:
        raise InvalidInputError("P is not a permutation matrix")
    if check_gcd:
        return permutation_matrix(block_cycle_permutation(perm, k))
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    return permutation_matrix(_block_perm(perm, k))


class SCRSystem(StateSpaceSystem):
    """Simple cycle reservoir ``(lam P1, [F_1; ...; F_k], h_C o L)``.

    P1 is the k-fold block cycle over the n_C-cycle and
    ``L(x) = (1/N_avg) sum_b block_b(x)``. The coupling is never formed
    densely: one step is a gather with :attr:`permutation`.
    """

    shift_convention = SHIFT_CONVENTION

    def __init__(self, *, lam: float, n_cycle: int, k: int, N_avg: int, V_scr, base_readout: LinearReadout,
                 input_bound: float):
        self.lam = float(lam)
        self.n_cycle = int(n_cycle)
        self.k = int(k)
        self.N_avg = int(N_avg)
        V_scr = np.asarray(V_scr)
        if V_scr.shape[0] != self.n_cycle * self.k:
            raise InvalidInputError("V_scr rows must equal n_cycle * k")
        if not np.all(np.abs(V_scr) == 1):
            raise InvalidInputError("V_scr entries must be exactly +-1")
        self.V_scr = frozen(V_scr.astype(np.int8))
        self._V_float = self.V_scr.astype(float)
        if base_readout.n != self.n_cycle:
            raise InvalidInputError("base readout must act on the cycle dimension")
        self.base_readout = base_readout
        self.input_bound = float(input_bound)
        self.permutation = frozen(block_cycle_permutation(cycle_permutation(self.n_cycle), self.k))

    @property
    def n(self) -> int:
        return self.n_cycle * self.k

    n_scr = n

    @property
    def m(self) -> int:
        return self.V_scr.shape[1]

    @property
    def d(self) -> int:
        return self.base_readout.d

    @property
    def input_matrix(self) -> np.ndarray:
        return self._V_float

    def input_norm(self) -> float:
        # the sign matrix's norm only enters washout sizing; Frobenius is a cheap upper bound
        return float(np.sqrt(self.V_scr.size))

    @property
    def readout(self) -> LinearReadout:
        """Dense ``h_C o L`` (d x n_scr)."""
        return LinearReadout(np.tile(self.base_readout.A, (1, self.k)) / self.N_avg, composed=True)

    def block_average(self, X: np.ndarray) -> np.ndarray:
        """``L``: average of the k state blocks, for (n_scr,) or (n_scr, B) input."""
        shp = X.shape
        return X.reshape((self.k, self.n_cycle) + shp[1:]).sum(axis=0) / self.N_avg

    def _advance(self, X):
        return self.lam * X[self.permutation]

    def _output(self, X):
        return self.base_readout.A @ self.block_average(X)

    def coupling(self) -> np.ndarray:
        if self.n > 4096:
            raise ResourceLimitError("dense coupling too large", quantity="n_scr", value=self.n)
        return self.lam * permutation_matrix(self.permutation)

    def __repr__(self) -> str:
        return f"SCRSystem(n_scr={self.n}, n_cycle={self.n_cycle}, k={self.k}, N_avg={self.N_avg}, lam={self.lam:.6g})"


def scr_construct(cyc: CyclicApproximation, delta: float, max_dim: int | None = None) -> tuple[SCRSystem, Binarization]:
    """SCR whose averaged state tracks ``cyc``'s state within ``delta``.

    The input coupling is binarized to operator-norm tolerance
    ``delta (1 - lam) / M``, so the state gap is at most
    ``sum_s lam^s ||V_C - V~|| M <= delta``.
    """
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    tol = delta * (1.0 - cyc.lam) / cyc.input_bound
    b = binarize(cyc.V_C, tol, cyc.n_C)
    n_scr = b.k * cyc.n_C
    if max_dim is not None and n_scr > max_dim:
        raise ResourceLimitError(f"SCR dimension {n_scr} exceeds the limit {max_dim}", quantity="n_scr", value=n_scr)
    scr = SCRSystem(lam=cyc.lam, n_cycle=cyc.n_C, k=b.k, N_avg=b.N_avg, V_scr=b.stacked(),
                    base_readout=cyc.readout, input_bound=cyc.input_bound)
    return scr, b
