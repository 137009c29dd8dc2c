"""Dense real matrix kernels.

Norms, PSD square roots, Haar sampling, cycle permutations and the real
canonical form of an orthogonal matrix (rotation blocks plus +-1 entries).

Permutation convention used throughout the package: the permutation matrix
``P`` of ``sigma`` has ``P[i, sigma(i)] = 1``, so ``(P @ x)[i] = x[sigma(i)]``
and ``P @ x == x[perm]`` for the index array ``perm = sigma``. The cycle is
``sigma(i) = i + 1 mod n``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalFailureError

log = logging.getLogger(__name__)

SVD_NORM_LIMIT = 512
PM_TOL = 1e-12
PM_MAXITER = 100_000
UNIT_EIGEN_TOL = 1e-9
SHIFT_CONVENTION = "sigma(i) = i + 1 mod n"


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D float64 array (a copy)."""
    A = np.array(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def frozen(A: np.ndarray) -> np.ndarray:
    A.setflags(write=False)
    return A


def operator_norm(M) -> float:
    """Largest singular value.

    Full SVD up to 512 rows/cols, power iteration on the Gram matrix above.
    """
    A = as_matrix(M)
    if A.size == 0:
        return 0.0
    if max(A.shape) <= SVD_NORM_LIMIT:
        return float(np.linalg.norm(A, 2))
    G = A.T @ A if A.shape[1] <= A.shape[0] else A @ A.T
    return math.sqrt(_power_iteration(G))


def _power_iteration(G: np.ndarray) -> float:
    x = np.ones(G.shape[0]) / math.sqrt(G.shape[0])
    x = x + 1e-3 * np.random.default_rng(0).standard_normal(G.shape[0])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(PM_MAXITER):
        y = G @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new = float(x @ y)
        x = y / ny
        if abs(new - est) <= PM_TOL * max(new, 1e-300):
            return new
        est = new
    raise NumericalFailureError("power iteration did not converge", residual=abs(new - est))


def psd_sqrt(M, sym_tol: float = 1e-10, neg_tol: float = 1e-10) -> np.ndarray:
    """Symmetric square root of a positive semidefinite matrix.

    Eigenvalues in ``[-neg_tol, 0)`` are clamped to zero; anything more
    negative, or an asymmetric input, is rejected.
    """
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise InvalidInputError("psd_sqrt needs a square matrix")
    if np.abs(A - A.T).max(initial=0.0) > sym_tol:
        raise InvalidInputError("psd_sqrt input is not symmetric")
    w, Q = np.linalg.eigh((A + A.T) / 2)
    if w.size and w.min() < -neg_tol:
        raise InvalidInputError(f"psd_sqrt input is indefinite (eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (Q * np.sqrt(w)) @ Q.T


def random_orthogonal(n: int, seed: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix.

    QR of a standard Gaussian matrix with the triangular factor's diagonal
    made positive.
    """
    if n < 1:
        raise InvalidInputError("random_orthogonal needs n >= 1")
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d


def cycle_permutation(n: int) -> np.ndarray:
    """Index array of the fixed cycle: ``perm[i] = i + 1 mod n``."""
    if n < 2:
        raise InvalidInputError("a cycle needs n >= 2")
    return np.roll(np.arange(n), -1)


def permutation_matrix(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    P = np.zeros((perm.size, perm.size))
    P[np.arange(perm.size), perm] = 1.0
    return P


def cycle_matrix(n: int) -> np.ndarray:
    """Permutation matrix of ``sigma(i) = i + 1 mod n``."""
    return permutation_matrix(cycle_permutation(n))


def permutation_from_matrix(P, tol: float = 1e-12) -> np.ndarray | None:
    """Recover ``perm`` with ``P[i, perm[i]] = 1``; None if P is not a permutation."""
    A = np.asarray(P, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.all(np.isfinite(A)):
        return None
    ones = np.abs(A - 1.0) <= tol
    zeros = np.abs(A) <= tol
    if not np.all(ones | zeros):
        return None
    if not (np.all(ones.sum(axis=1) == 1) and np.all(ones.sum(axis=0) == 1)):
        return None
    return np.argmax(ones, axis=1)


def cycle_count(perm) -> int:
    """Number of disjoint cycles of a permutation given as an index array."""
    perm = np.asarray(perm, dtype=np.int64)
    seen = np.zeros(perm.size, dtype=bool)
    count = 0
    for start in range(perm.size):
        if seen[start]:
            continue
        count += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
    return count


def check_full_cycle(P) -> tuple[bool, str]:
    """Full-cycle test with a short diagnostic.

    ``P`` is a square 0/1 matrix or a 1-D index array of a permutation.
    """
    arr = np.asarray(P)
    if arr.ndim == 1:
        perm = arr.astype(np.int64)
        if perm.size == 0 or not np.array_equal(np.sort(perm), np.arange(perm.size)):
            return False, "not a permutation"
    else:
        perm = permutation_from_matrix(arr)
        if perm is None:
            return False, "not a permutation"
    cycles = cycle_count(perm)
    if cycles != 1:
        return False, f"permutation has {cycles} cycles"
    return True, "full cycle"


def is_full_cycle(P) -> bool:
    ok, why = check_full_cycle(P)
    if not ok:
        log.debug("is_full_cycle: %s", why)
    return ok


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def block_diag(*blocks) -> np.ndarray:
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    if not blocks:
        return np.zeros((0, 0))
    return scipy.linalg.block_diag(*blocks)


@dataclass(frozen=True)
class CanonicalForm:
    """Orthogonal ``basis`` S with ``S.T @ C @ S`` equal to :meth:`block_matrix`.

    The block matrix is ``R(angles[0]), ..., R(angles[-1])`` followed by
    ``plus_count`` entries +1 and ``minus_count`` entries -1.
    """

    basis: np.ndarray
    angles: tuple[float, ...]
    plus_count: int
    minus_count: int
    residual: float

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    def block_matrix(self) -> np.ndarray:
        return canonical_block_matrix(self.angles, self.plus_count, self.minus_count)

    def reconstruct(self) -> np.ndarray:
        S = self.basis
        return S @ self.block_matrix() @ S.T


def canonical_block_matrix(angles, plus_count: int, minus_count: int) -> np.ndarray:
    blocks = [rotation(t) for t in angles]
    blocks += [np.ones((1, 1))] * plus_count + [-np.ones((1, 1))] * minus_count
    return block_diag(*blocks)


def canonical_form(C, tol: float = 1e-8) -> CanonicalForm:
    """Real canonical form of an orthogonal matrix.

    Real Schur decomposition (LAPACK), then each 2x2 block is read as a
    rotation; a block of angle -t is flipped to +t by swapping its two basis
    vectors. Eigenvalues within 1e-9 of +-1 count as exactly +-1. Angles come
    out sorted ascending and strictly inside (0, pi).
    """
    A = as_matrix(C, "C")
    n = A.shape[0]
    if A.shape[1] != n:
        raise InvalidInputError("canonical_form needs a square matrix")
    orth = operator_norm(A.T @ A - np.eye(n))
    if orth > 1e-8:
        raise InvalidInputError(f"matrix is not orthogonal (||C^T C - I|| = {orth:.3e})")

    T, Z = scipy.linalg.schur(A, output="real")
    rotations: list[tuple[float, np.ndarray, np.ndarray]] = []
    plus: list[np.ndarray] = []
    minus: list[np.ndarray] = []
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            B = T[i:i + 2, i:i + 2]
            theta = math.atan2((B[1, 0] - B[0, 1]) / 2, (B[0, 0] + B[1, 1]) / 2)
            z1, z2 = Z[:, i], Z[:, i + 1]
            if abs(complex(math.cos(theta), math.sin(theta)) - 1) < UNIT_EIGEN_TOL:
                plus += [z1, z2]
            elif abs(complex(math.cos(theta), math.sin(theta)) + 1) < UNIT_EIGEN_TOL:
                minus += [z1, z2]
            elif theta < 0:
                rotations.append((-theta, z2, z1))
            else:
                rotations.append((theta, z1, z2))
            i += 2
        else:
            (plus if T[i, i] >= 0 else minus).append(Z[:, i])
            i += 1

    rotations.sort(key=lambda r: r[0])
    cols = [c for _, a, b in rotations for c in (a, b)] + plus + minus
    S = np.column_stack(cols) if cols else np.zeros((0, 0))
    angles = tuple(r[0] for r in rotations)
    Tc = canonical_block_matrix(angles, len(plus), len(minus))
    residual = operator_norm(S.T @ A @ S - Tc)
    if residual > tol:
        raise NumericalFailureError(
            f"canonical form residual {residual:.3e} exceeds tolerance {tol:.1e}", residual=residual
        )
    return CanonicalForm(frozen(S), angles, len(plus), len(minus), residual)
