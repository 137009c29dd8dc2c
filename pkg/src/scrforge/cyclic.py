"""Approximating an orthogonal coupling by a full-cycle permutation.

The rotation angles of the coupling's canonical form are matched to
distinct roots of unity of a cycle of even length ``n_C``. The unmatched
roots, together with the cycle's own +1 and -1 eigenvalues, form a
completion block ``D``. The result is a transform ``P`` such that
``P^T C P`` is within tolerance of ``U (+) D``, where C is the cycle matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import min_weight_full_bipartite_matching

from .dilation import choose_order
from .errors import InvalidInputError, NumericalFailureError, ResourceLimitError
from .linalg import (
    CanonicalForm,
    block_diag,
    canonical_form,
    cycle_matrix,
    cycle_permutation,
    frozen,
    operator_norm,
    rotation,
)
from .matching import hopcroft_karp
from .reservoir import LinearReservoir, StateSpaceSystem

# strict inequalities that hold with equality in exact arithmetic count as failing
BOUNDARY_RTOL = 1e-12
SEARCH_BATCH = 256


def chord(theta, phi):
    """``|e^{i theta} - e^{i phi}|``."""
    return 2.0 * np.abs(np.sin((np.asarray(theta) - np.asarray(phi)) / 2.0))


def l0_bound(delta: float) -> int:
    """Smallest integer ``l0`` with ``pi / l0 < arccos(1 - delta^2 / 2)``."""
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    if delta >= 2:
        return 2
    # arccos(1 - d^2/2) written as 2 asin(d/2), which stays accurate for tiny d
    alpha = 2.0 * math.asin(delta / 2.0) * (1.0 - BOUNDARY_RTOL)
    l0 = max(1, math.floor(math.pi / alpha))
    while not math.pi / l0 < alpha:
        l0 += 1
    while l0 > 1 and math.pi / (l0 - 1) < alpha:
        l0 -= 1
    return l0


def theoretical_dimension(k: int, delta: float) -> int:
    """Cycle length ``2 l0 (k + 1)`` that always admits a matching of k angles."""
    if k < 0:
        raise InvalidInputError("k must be non-negative")
    return 2 * l0_bound(delta) * (k + 1)


@dataclass(frozen=True)
class RootMatching:
    """Angle ``angles[i]`` is matched to the root ``2 pi assignment[i] / n_prime``."""

    n_prime: int
    angles: tuple[float, ...]
    assignment: tuple[int, ...]
    delta: float

    @property
    def roots(self) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(self.assignment, dtype=float) / self.n_prime

    @property
    def errors(self) -> np.ndarray:
        return chord(np.asarray(self.angles), self.roots)

    @property
    def max_error(self) -> float:
        return float(self.errors.max(initial=0.0))


def _candidate_roots(theta: float, n_prime: int, delta: float) -> list[int]:
    """Root indices ``0 < a < n_prime/2`` strictly within chord ``delta`` of theta, nearest first."""
    half = n_prime // 2
    if delta >= 2:
        lo, hi = 1, half - 1
    else:
        width = 2.0 * math.asin(delta / 2.0)
        lo = max(1, math.floor((theta - width) * n_prime / (2 * math.pi)) - 1)
        hi = min(half - 1, math.ceil((theta + width) * n_prime / (2 * math.pi)) + 1)
    if hi < lo:
        return []
    a = np.arange(lo, hi + 1)
    err = chord(theta, 2 * np.pi * a / n_prime)
    keep = err < delta
    a, err = a[keep], err[keep]
    return [int(x) for x in a[np.argsort(err, kind="stable")]]


def _check_angles(angles) -> np.ndarray:
    th = np.asarray(angles, dtype=float).reshape(-1)
    if th.size and (th.min() < -1e-12 or th.max() > np.pi + 1e-12):
        raise InvalidInputError("angles must lie in [0, pi]")
    return np.clip(th, 0.0, np.pi)


def match_roots(angles, n_prime: int, delta: float, refine: bool = True) -> RootMatching | None:
    """Assign each angle a distinct root of unity within chord ``delta``.

    Hopcroft-Karp decides feasibility. With ``refine`` the feasible edges are
    then re-assigned to minimise the summed squared chord error. Returns
    None when no matching covers every angle.
    """
    if n_prime % 2 or n_prime < 4:
        raise InvalidInputError(f"n_prime must be even and >= 4, got {n_prime}")
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    th = _check_angles(angles)
    if th.size == 0:
        return RootMatching(n_prime, (), (), float(delta))
    if th.size > n_prime // 2 - 1:
        return None
    adj = [_candidate_roots(t, n_prime, delta) for t in th]
    if any(not a for a in adj):
        return None
    n_right = n_prime // 2  # index 0 never used
    match = hopcroft_karp(adj, n_right)
    if any(v == -1 for v in match):
        return None
    if refine and th.size > 1:
        match = _min_error_assignment(th, adj, n_prime, n_right)
    return RootMatching(n_prime, tuple(float(t) for t in th), tuple(int(v) for v in match), float(delta))


def _min_error_assignment(th, adj, n_prime, n_right) -> list[int]:
    rows, cols, vals = [], [], []
    for i, nbrs in enumerate(adj):
        for a in nbrs:
            rows.append(i)
            cols.append(a)
            # shift keeps weights positive; every full matching has the same count of edges
            vals.append(1.0 + float(chord(th[i], 2 * np.pi * a / n_prime)) ** 2)
    G = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(len(adj), n_right))
    r, c = min_weight_full_bipartite_matching(G)
    match = [-1] * len(adj)
    for i, a in zip(r, c):
        match[int(i)] = int(a)
    return match


def _prefilter(th: np.ndarray, n_primes: np.ndarray, delta: float) -> np.ndarray:
    """Vectorized necessary condition: every angle has some root within delta."""
    npr = n_primes[:, None].astype(float)
    half = n_primes[:, None] // 2
    base = np.rint(th[None, :] * npr / (2 * np.pi)).astype(np.int64)
    ok = np.zeros((n_primes.size, th.size), dtype=bool)
    for shift in (-1, 0, 1):
        a = base + shift
        valid = (a >= 1) & (a <= half - 1)
        ok |= valid & (chord(th[None, :], 2 * np.pi * a / npr) < delta)
    return ok.all(axis=1)


def min_cycle_dimension(angles, delta: float, max_dim: int | None = None,
                        refine: bool = True) -> tuple[int, RootMatching]:
    """Smallest even ``n' >= max(2 len(angles) + 2, 4)`` admitting a full matching.

    The scan is exhaustive upward, so the result is exactly minimal. It
    terminates by ``theoretical_dimension(len(angles), delta)``.
    """
    th = _check_angles(angles)
    k = th.size
    start = max(2 * k + 2, 4)
    start += start % 2
    bound = theoretical_dimension(k, delta)
    if k == 0:
        return start, RootMatching(start, (), (), float(delta))
    n_prime = start
    while True:
        if n_prime > bound:
            raise NumericalFailureError(
                f"no matching found up to the theoretical bound {bound}; angles may be corrupted"
            )
        if max_dim is not None and n_prime > max_dim:
            raise ResourceLimitError(
                f"cycle dimension would exceed the limit {max_dim} (bound {bound})",
                quantity="n_C", value=n_prime,
            )
        batch = np.arange(n_prime, n_prime + 2 * SEARCH_BATCH, 2, dtype=np.int64)
        for cand in batch[_prefilter(th, batch, delta)]:
            cand = int(cand)
            if max_dim is not None and cand > max_dim:
                break
            m = match_roots(th, cand, delta, refine=refine)
            if m is not None:
                return cand, m
        n_prime = int(batch[-1]) + 2


def build_completion(matching: RootMatching, keep_plus: bool = True, keep_minus: bool = True) -> np.ndarray:
    """Block-diagonal D of every unmatched rotation ``R(2 pi a / n)``, then 1 and -1.

    ``keep_plus`` / ``keep_minus`` drop the trailing +1 / -1 when the
    coupling itself already occupies that eigenvalue of the cycle.
    """
    n = matching.n_prime
    used = set(matching.assignment)
    blocks = [rotation(2 * np.pi * a / n) for a in range(1, n // 2) if a not in used]
    if keep_plus:
        blocks.append(np.ones((1, 1)))
    if keep_minus:
        blocks.append(-np.ones((1, 1)))
    return block_diag(*blocks)


def cycle_canonical_basis(n: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Orthogonal ``J`` with ``J^T C J = diag(R(2 pi/n), ..., R(2 pi (n/2-1)/n), 1, -1)``.

    Columns come in pairs ``sqrt(2/n) (sin, cos)(2 pi a j / n)`` for
    ``a = 1 .. n/2 - 1``, then ``1/sqrt(n)`` and ``(-1)^j / sqrt(n)``.
    Returns J and the root indices ``a`` in block order.
    """
    if n % 2 or n < 4:
        raise InvalidInputError(f"cycle_canonical_basis needs even n >= 4, got {n}")
    j = np.arange(n)
    a = np.arange(1, n // 2)
    # reduce the product mod n before scaling so large n keeps full accuracy
    ph = 2 * np.pi * (np.outer(j, a) % n) / n
    J = np.empty((n, n))
    J[:, 0:n - 2:2] = np.sqrt(2.0 / n) * np.sin(ph)
    J[:, 1:n - 2:2] = np.sqrt(2.0 / n) * np.cos(ph)
    J[:, n - 2] = 1.0 / np.sqrt(n)
    J[:, n - 1] = np.where(j % 2 == 0, 1.0, -1.0) / np.sqrt(n)
    return J, tuple(int(x) for x in a)


def cycle_block_matrix(n: int) -> np.ndarray:
    """``T_C``: the canonical block form of the n-cycle in :func:`cycle_canonical_basis` order."""
    blocks = [rotation(2 * np.pi * a / n) for a in range(1, n // 2)]
    return block_diag(*blocks, np.ones((1, 1)), -np.ones((1, 1)))


def perturbation_budget(lam: float, M: float, v_norm: float, delta: float) -> tuple[int, float]:
    """Tail order N and coupling perturbation ``delta0`` for a state tolerance ``delta``.

    N is the smallest order with ``2 M ||V|| sum_{k>N} lam^k < delta/2``;
    ``delta0`` is found by bisection as (nearly) the largest value with
    ``M ||V|| sum_{k=0}^N ((lam + delta0)^k - lam^k) < delta/2``.
    """
    if v_norm == 0 or M == 0:
        return 0, math.inf
    N = choose_order(lam, M, v_norm, delta / 2)
    k = np.arange(N + 1)
    target = delta / 2

    def f(d0):
        return M * v_norm * float(np.sum((lam + d0) ** k - lam**k))

    hi = 1.0
    while f(hi) < target:
        hi *= 2.0
    lo = 0.0
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return N, lo


class CyclicApproximation(StateSpaceSystem):
    """Reservoir ``(lam C, V_C, h_C)`` with C the n_C-cycle.

    ``transform`` is the orthogonal P with ``P^T C P`` close to
    ``U (+) completion``; ``V_C = P [V_U; 0]`` and
    ``h_C(x) = h_U(first n_U coords of P^T x)``.
    """

    def __init__(self, *, lam, embedding: "CycleEmbedding", V_C, readout, input_bound,
                 state_tolerance, delta0, tail_order):
        self.lam = float(lam)
        self.embedding = embedding
        self.transform = embedding.transform
        self.V_C = frozen(V_C)
        self.readout = readout
        self.input_bound = float(input_bound)
        self.state_tolerance = float(state_tolerance)
        self.match_tolerance = embedding.delta
        self.delta0 = float(delta0)
        self.tail_order = int(tail_order)
        self._perm = cycle_permutation(self.n_C)

    @property
    def matching(self) -> RootMatching:
        return self.embedding.matching

    @property
    def completion(self) -> np.ndarray:
        return self.embedding.completion

    @property
    def theoretical_bound(self) -> int:
        return self.embedding.theoretical_bound

    @property
    def n_C(self) -> int:
        return self.transform.shape[0]

    n = n_C

    @property
    def n_source(self) -> int:
        return self.embedding.source.shape[0]

    @property
    def m(self) -> int:
        return self.V_C.shape[1]

    @property
    def d(self) -> int:
        return self.readout.d

    @property
    def input_matrix(self) -> np.ndarray:
        return self.V_C

    def _advance(self, X):
        return self.lam * X[self._perm]

    def coupling(self) -> np.ndarray:
        return self.lam * cycle_matrix(self.n_C)

    def to_reservoir(self) -> LinearReservoir:
        return LinearReservoir(self.coupling(), self.V_C, self.readout, self.input_bound)

    def state_map(self, n: int | None = None) -> np.ndarray:
        """Matrix ``x -> first n coords of P^T x`` (defaults to the source dimension)."""
        n = self.n_source if n is None else n
        return self.transform[:, :n].T

    def perturbation(self) -> float:
        return self.embedding.perturbation()

    def __repr__(self) -> str:
        return (f"CyclicApproximation(n_C={self.n_C}, n_source={self.n_source}, lam={self.lam:.6g}, "
                f"match_tol={self.match_tolerance:.3g}, n1={self.theoretical_bound})")


def _grouped_layout(cf: CanonicalForm):
    """Angles for matching and the basis column order that goes with them.

    +1 pairs become angle 0, -1 pairs angle pi; at most one lone +1 and one
    lone -1 remain and map straight onto the cycle's own +-1.
    """
    k = len(cf.angles)
    p, q = cf.plus_count, cf.minus_count
    rot_cols = list(range(2 * k))
    plus_cols = list(range(2 * k, 2 * k + p))
    minus_cols = list(range(2 * k + p, 2 * k + p + q))
    angles = list(cf.angles) + [0.0] * (p // 2) + [math.pi] * (q // 2)
    order = rot_cols + plus_cols[:2 * (p // 2)] + minus_cols[:2 * (q // 2)]
    leftover = []
    if p % 2:
        order.append(plus_cols[-1])
        leftover.append(1)
    if q % 2:
        order.append(minus_cols[-1])
        leftover.append(-1)
    return angles, order, tuple(leftover)


def matching_angles(cf: CanonicalForm) -> list[float]:
    """Angles that have to be matched to roots of unity for canonical form ``cf``."""
    return _grouped_layout(cf)[0]


@dataclass(frozen=True)
class CycleEmbedding:
    """Orthogonal ``transform`` P with ``||P^T C P - U (+) completion|| < delta``.

    C is the ``n_C``-cycle. ``theoretical_bound`` is ``2 l0 (K + 1)`` for the
    K grouped angles that were matched.
    """

    transform: np.ndarray
    completion: np.ndarray
    matching: RootMatching
    canonical: CanonicalForm
    source: np.ndarray
    delta: float
    theoretical_bound: int
    n_grouped: int
    leftover: tuple[int, ...]

    @property
    def n_C(self) -> int:
        return self.transform.shape[0]

    def perturbation(self) -> float:
        """Explicit ``||P^T C P - U (+) D||``."""
        P = self.transform
        return operator_norm(P.T @ cycle_matrix(self.n_C) @ P - block_diag(self.source, self.completion))


def embed_in_cycle(U, delta: float, *, max_dim: int | None = None, refine: bool = True) -> CycleEmbedding:
    """Perturb orthogonal U (padded by a completion D) into a cycle's similarity orbit.

    Builds ``P = J_C Ptilde G^T`` where ``G = S1 (+) I`` brings U to canonical
    form, ``Ptilde`` sorts the completed block list into cycle order and
    ``J_C`` is the cycle's explicit canonical basis.
    """
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    U = np.asarray(U, dtype=float)
    n_U = U.shape[0]
    orth = operator_norm(U.T @ U - np.eye(n_U))
    if orth > 1e-8:
        raise InvalidInputError(f"matrix is not orthogonal (residual {orth:.2e})")

    cf = canonical_form(U)
    angles, order, leftover = _grouped_layout(cf)
    S1 = cf.basis[:, order]
    n_C, matching = min_cycle_dimension(angles, delta, max_dim=max_dim, refine=refine)
    K = len(angles)

    # rows of T (the block form in the basis S1 (+) I) and their destination in T_C
    keep_plus = 1 not in leftover
    keep_minus = -1 not in leftover
    completion = build_completion(matching, keep_plus, keep_minus)
    dest = np.empty(n_C, dtype=np.int64)
    row = 0
    for a in matching.assignment:
        dest[row:row + 2] = (2 * (a - 1), 2 * (a - 1) + 1)
        row += 2
    singles = {1: n_C - 2, -1: n_C - 1}
    for s in leftover:
        dest[row] = singles[s]
        row += 1
    used = set(matching.assignment)
    for a in range(1, n_C // 2):
        if a not in used:
            dest[row:row + 2] = (2 * (a - 1), 2 * (a - 1) + 1)
            row += 2
    if keep_plus:
        dest[row] = singles[1]
        row += 1
    if keep_minus:
        dest[row] = singles[-1]
        row += 1
    if row != n_C or np.unique(dest).size != n_C:
        raise NumericalFailureError("internal block layout is inconsistent")

    J_C, _ = cycle_canonical_basis(n_C)
    P = J_C[:, dest]  # J_C @ Ptilde
    del J_C
    P[:, :n_U] = P[:, :n_U] @ S1.T
    return CycleEmbedding(
        transform=frozen(P), completion=frozen(completion), matching=matching, canonical=cf,
        source=frozen(U.copy()), delta=float(delta), theoretical_bound=theoretical_dimension(K, delta),
        n_grouped=K, leftover=leftover,
    )


def cyclic_approximate(R_U: LinearReservoir, delta: float, *, max_dim: int | None = None,
                       refine: bool = True) -> CyclicApproximation:
    """Cycle-coupled system whose states track ``R_U`` within ``delta``.

    ``R_U`` must have coupling ``lam U`` with U orthogonal. The coupling
    perturbation is held below ``min(delta, delta0) / lam`` (see
    :func:`perturbation_budget`).
    """
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    lam = R_U.lam
    if lam <= 0:
        raise InvalidInputError("coupling must be non-zero")
    tail, delta0 = perturbation_budget(lam, R_U.input_bound, operator_norm(R_U.V), delta)
    match_tol = min(delta, delta0) / lam
    emb = embed_in_cycle(R_U.W / lam, match_tol, max_dim=max_dim, refine=refine)
    n_U = R_U.n
    Pn = emb.transform[:, :n_U]
    return CyclicApproximation(
        lam=lam, embedding=emb, V_C=Pn @ R_U.V, readout=R_U.readout.compose(Pn.T),
        input_bound=R_U.input_bound, state_tolerance=delta, delta0=delta0, tail_order=tail,
    )
