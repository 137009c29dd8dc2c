"""Egervary orthogonal dilation of a contraction.

A contraction ``W1`` of size n embeds as the upper-left corner of an
orthogonal ``U`` of size (N+1)n whose powers keep that property up to order
N. Scaling by ``lam = ||W||`` turns any reservoir into one with coupling
``lam * U`` whose projected states stay within a chosen tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix, frozen, operator_norm
from .reservoir import LinearReservoir

NORM_SLACK = 1e-12


@dataclass(frozen=True)
class DilationPlan:
    N: int
    delta_state: float
    n_dilated: int
    bound: float  # 2 M ||V|| lam^(N+1) / (1 - lam)


def truncation_bound(lam: float, M: float, v_norm: float, N: int) -> float:
    return 2.0 * M * v_norm * lam ** (N + 1) / (1.0 - lam)


def choose_order(lam: float, M: float, v_norm: float, delta: float) -> int:
    """Smallest ``N >= 1`` with ``2 M v_norm lam^(N+1) / (1 - lam) < delta``."""
    if not 0.0 < lam < 1.0:
        raise InvalidInputError(f"lambda must lie in (0, 1), got {lam}")
    if M <= 0 or v_norm <= 0 or delta <= 0:
        raise InvalidInputError("M, ||V|| and delta must be positive")
    scale = 2.0 * M * v_norm / (1.0 - lam)
    if scale * lam**2 < delta:
        return 1
    N = max(1, math.floor(math.log(delta / scale) / math.log(lam)) - 2)
    while truncation_bound(lam, M, v_norm, N) >= delta:
        N += 1
    while N > 1 and truncation_bound(lam, M, v_norm, N - 1) < delta:
        N -= 1
    return N


def defect_operators(W1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(I - W1^T W1)^(1/2)`` and ``(I - W1 W1^T)^(1/2)`` from one SVD.

    Sharing singular vectors keeps the intertwining relation
    ``W1^T D_{W1^T} = D_{W1} W1^T`` exact to rounding, so the dilation is
    orthogonal to machine precision even when ``||W1|| = 1``.
    """
    X, s, Yt = np.linalg.svd(W1)
    s = np.minimum(s, 1.0)
    c = np.sqrt((1.0 - s) * (1.0 + s))
    D_W = (Yt.T * c) @ Yt
    D_Wt = (X * c) @ X.T
    return D_W, D_Wt


def egervary_dilation(W1, N: int) -> np.ndarray:
    """Orthogonal U of size (N+1)n whose corner of ``U^k`` is ``W1^k`` for k <= N.

    Block layout::

        [ W1    0 ... 0   D_{W1^T} ]
        [ D_W1  0 ... 0   -W1^T    ]
        [ 0     I         0        ]
        [          ...             ]
        [ 0     ...   I   0        ]
    """
    W1 = as_matrix(W1, "W1")
    n = W1.shape[0]
    if W1.shape != (n, n):
        raise InvalidInputError("W1 must be square")
    if N < 1:
        raise InvalidInputError("dilation order N must be >= 1")
    norm = operator_norm(W1)
    if norm > 1.0 + NORM_SLACK:
        raise InvalidInputError(f"||W1|| = {norm:.15g} exceeds 1")
    D_W, D_Wt = defect_operators(W1)
    size = (N + 1) * n
    U = np.zeros((size, size))
    U[:n, :n] = W1
    U[n:2 * n, :n] = D_W
    U[:n, N * n:] = D_Wt
    U[n:2 * n, N * n:] = -W1.T
    for b in range(2, N + 1):
        U[b * n:(b + 1) * n, (b - 1) * n:b * n] = np.eye(n)
    return U


def dilate_with_order(R: LinearReservoir, N: int) -> LinearReservoir:
    """``(lam U, [V; 0], h o P_n)`` for a fixed dilation order N."""
    lam = R.lam
    if lam <= 0.0:
        raise InvalidInputError("W = 0 needs no dilation; lambda must be positive")
    U = egervary_dilation(R.W / lam, N)
    n = R.n
    V_U = np.zeros((U.shape[0], R.m))
    V_U[:n] = R.V
    proj = np.zeros((n, U.shape[0]))
    proj[:, :n] = np.eye(n)
    return LinearReservoir(lam * U, V_U, R.readout.compose(proj), R.input_bound)


def dilate_system(R: LinearReservoir, delta: float) -> tuple[LinearReservoir, DilationPlan]:
    """Orthogonal-coupling system whose projected states are within ``delta``.

    Output gap is at most ``||A|| * delta`` for readout matrix A.
    """
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    v_norm = operator_norm(R.V)
    if v_norm == 0.0:
        N = 1
    else:
        N = choose_order(R.lam, R.input_bound, v_norm, delta)
    R_U = dilate_with_order(R, N)
    plan = DilationPlan(N, float(delta), R_U.n, truncation_bound(R.lam, R.input_bound, v_norm, N))
    return R_U, plan


def coupling_unit(R_U: LinearReservoir) -> np.ndarray:
    """``W / lam`` of a reservoir, frozen."""
    return frozen(R_U.W / R_U.lam)
