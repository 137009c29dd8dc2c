"""Linear reservoir systems ``x_t = W x_{t-1} + V u_t``, ``y_t = A x_t``.

Simulation starts from ``x_0 = 0``; a washout drops the first states so the
result tracks the solution driven by a left-infinite past. Structured
couplings (cycles, block cycles) subclass :class:`StateSpaceSystem` and
only override how one step of the coupling is applied.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalFailureError
from .linalg import as_matrix, frozen, operator_norm

log = logging.getLogger(__name__)

WASHOUT_TOL = 1e-12


@dataclass(frozen=True)
class LinearReadout:
    """``h(x) = A x``. ``composed`` marks readouts built as ``h o L``."""

    A: np.ndarray
    composed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "A", frozen(as_matrix(self.A, "readout")))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def lipschitz(self) -> float:
        return operator_norm(self.A)

    def __call__(self, x):
        return self.A @ x

    def compose(self, L) -> "LinearReadout":
        """Readout of ``x -> h(L x)``."""
        return LinearReadout(self.A @ as_matrix(L, "L"), composed=True)

    @classmethod
    def identity(cls, n: int) -> "LinearReadout":
        return cls(np.eye(n))


@dataclass(frozen=True)
class InputStream:
    """Samples ``u_t`` (rows) with a uniform Euclidean bound."""

    samples: np.ndarray
    bound: float

    def __post_init__(self):
        u = as_matrix(self.samples, "input stream")
        object.__setattr__(self, "samples", frozen(u))
        bound = float(self.bound)
        if not bound > 0 or not math.isfinite(bound):
            raise InvalidInputError("stream bound must be a positive finite number")
        peak = float(np.linalg.norm(u, axis=1).max(initial=0.0))
        if peak > bound * (1 + 1e-12):
            raise InvalidInputError(f"sample norm {peak:.6g} exceeds stream bound {bound:.6g}")
        object.__setattr__(self, "bound", bound)

    @classmethod
    def from_array(cls, samples, bound: float | None = None) -> "InputStream":
        u = as_matrix(samples, "input stream")
        if bound is None:
            bound = float(np.linalg.norm(u, axis=1).max(initial=0.0)) or 1.0
        return cls(u, bound)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def m(self) -> int:
        return self.samples.shape[1]


def _stack_streams(u) -> np.ndarray:
    """Normalize one or many streams to an array of shape (B, T, m)."""
    if isinstance(u, InputStream):
        return u.samples[None]
    if isinstance(u, np.ndarray):
        a = as_matrix(u, "input") if u.ndim < 3 else np.asarray(u, dtype=float)
        return a[None] if a.ndim == 2 else a
    streams = [s.samples if isinstance(s, InputStream) else as_matrix(s, "input") for s in u]
    if not streams:
        raise InvalidInputError("no input streams given")
    if len({s.shape for s in streams}) != 1:
        raise InvalidInputError("batched streams must share one shape")
    return np.stack(streams)


class StateSpaceSystem:
    """Common simulation machinery; subclasses define the coupling step.

    Required attributes: ``n, m, d, lam, input_bound`` plus ``input_matrix``
    (n x m) and ``readout`` (a :class:`LinearReadout` or None when the
    subclass overrides :meth:`_output`).
    """

    n: int
    m: int
    d: int
    lam: float
    input_bound: float

    def _advance(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inject(self, U: np.ndarray) -> np.ndarray:
        return self.input_matrix @ U

    def _output(self, X: np.ndarray) -> np.ndarray:
        return self.readout.A @ X

    def input_norm(self) -> float:
        return operator_norm(self.input_matrix)

    def state_bound(self) -> float:
        """``M ||V|| / (1 - lambda)``, the sup of ``||x_t||``."""
        return self.input_bound * self.input_norm() / (1.0 - self.lam)

    def default_washout(self) -> int:
        return default_washout(self.lam, self.input_bound, self.input_norm())

    def simulate(self, u, washout: int | None = None,
                 observe: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
        """Drive the system and record ``observe(x_t)`` after the washout.

        ``u`` is one stream or a batch; the result has shape (B, T - washout, k)
        where ``observe`` maps the (n, B) state block to (k, B).
        """
        batch = _stack_streams(u)
        B, T, m = batch.shape
        if m != self.m:
            raise InvalidInputError(f"input dimension {m} does not match system input dimension {self.m}")
        if washout is None:
            washout = self.default_washout()
        if washout < 0 or washout >= T:
            raise InvalidInputError(f"washout {washout} must lie in [0, {T})")
        if observe is None:
            observe = lambda X: X  # noqa: E731
        X = np.zeros((self.n, B))
        out = []
        for t in range(T):
            X = self._advance(X) + self._inject(batch[:, t, :].T)
            if t >= washout:
                out.append(observe(X))
        return np.stack(out, axis=0).transpose(2, 0, 1)

    def drive(self, u, washout: int | None = None) -> np.ndarray:
        """States after the washout, shape (T - washout, n) for a single stream."""
        res = self.simulate(u, washout)
        return res[0] if isinstance(u, InputStream) or np.ndim(u) == 2 else res

    def run(self, u, washout: int | None = None) -> np.ndarray:
        """Outputs after the washout, shape (T - washout, d) for a single stream."""
        res = self.simulate(u, washout, observe=self._output)
        return res[0] if isinstance(u, InputStream) or np.ndim(u) == 2 else res


def default_washout(lam: float, M: float, v_norm: float, tol: float = WASHOUT_TOL) -> int:
    """Smallest ``w`` with ``lam**w * M * v_norm / (1 - lam) < tol``."""
    scale = M * v_norm / (1.0 - lam)
    if scale < tol:
        return 0
    if lam <= 0.0:
        return 1
    w = max(0, math.floor(math.log(tol / scale) / math.log(lam)))
    while lam**w * scale >= tol:
        w += 1
    return w


class LinearReservoir(StateSpaceSystem):
    """Reservoir ``(W, V, h)`` with a dense coupling and linear readout.

    ``lam`` is the operator norm of ``W`` and must be below one;
    ``input_bound`` is the Euclidean bound M of admissible inputs.
    """

    def __init__(self, W, V, readout: LinearReadout | np.ndarray | None = None, input_bound: float = 1.0):
        W = as_matrix(W, "W")
        V = as_matrix(V, "V")
        n = W.shape[0]
        if W.shape != (n, n):
            raise InvalidInputError(f"W must be square, got {W.shape}")
        if V.shape[0] != n:
            raise InvalidInputError(f"V has {V.shape[0]} rows, W has {n}")
        if readout is None:
            readout = LinearReadout.identity(n)
        elif not isinstance(readout, LinearReadout):
            readout = LinearReadout(readout)
        if readout.n != n:
            raise InvalidInputError(f"readout acts on dimension {readout.n}, reservoir has {n}")
        lam = operator_norm(W)
        if not lam < 1.0:
            raise InvalidInputError(f"coupling is not contractive (||W|| = {lam:.6g})")
        if not (input_bound > 0 and math.isfinite(input_bound)):
            raise InvalidInputError("input_bound must be positive and finite")
        self.W = frozen(W)
        self.V = frozen(V)
        self.readout = readout
        self.lam = lam
        self.input_bound = float(input_bound)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def m(self) -> int:
        return self.V.shape[1]

    @property
    def d(self) -> int:
        return self.readout.d

    @property
    def input_matrix(self) -> np.ndarray:
        return self.V

    def _advance(self, X):
        return self.W @ X

    def with_readout(self, readout: LinearReadout) -> "LinearReservoir":
        return LinearReservoir(self.W, self.V, readout, self.input_bound)

    def similarity(self, S) -> "LinearReservoir":
        """Equivalent system in the basis ``S``: ``(S^T W S, S^T V, h o S)``."""
        S = as_matrix(S, "S")
        return LinearReservoir(S.T @ self.W @ S, S.T @ self.V, self.readout.compose(S), self.input_bound)

    def __repr__(self) -> str:
        return f"LinearReservoir(n={self.n}, m={self.m}, d={self.d}, lam={self.lam:.6g}, M={self.input_bound:.6g})"


def drive(R: StateSpaceSystem, u, washout: int | None = None) -> np.ndarray:
    return R.drive(u, washout)


def run(R: StateSpaceSystem, u, washout: int | None = None) -> np.ndarray:
    return R.run(u, washout)


def train_ridge(states, targets, ridge: float) -> LinearReadout:
    """Ridge readout ``A = Y^T X (X^T X + ridge I)^{-1}`` (rows of X are states)."""
    X = as_matrix(states, "states")
    Y = as_matrix(targets, "targets")
    if X.shape[0] != Y.shape[0] or X.shape[0] < 1:
        raise InvalidInputError("states and targets need equal, non-zero lengths")
    if ridge < 0:
        raise InvalidInputError("ridge must be non-negative")
    G = X.T @ X + ridge * np.eye(X.shape[1])
    rhs = X.T @ Y
    try:
        A = scipy.linalg.cho_solve(scipy.linalg.cho_factor(G), rhs).T
    except np.linalg.LinAlgError:
        if ridge == 0.0:
            raise NumericalFailureError("normal matrix is singular and ridge is zero") from None
        log.warning("Cholesky failed; falling back to pseudoinverse")
        A = (np.linalg.pinv(G, hermitian=True) @ rhs).T
    scale = np.linalg.norm(rhs)
    if scale > 0:
        rel = np.linalg.norm(A @ G - rhs.T) / scale
        if rel > 1e-8:
            log.warning("ridge normal-equation residual %.2e exceeds 1e-8", rel)
    return LinearReadout(A)


def output_distance(R1: StateSpaceSystem, R2: StateSpaceSystem, u, washout: int | None = None) -> float:
    """Empirical sup over time (and streams) of ``||y_t - y'_t||_2``.

    ``u`` is a stream or a sequence of equal-length streams. The default
    washout is the larger of the two systems' defaults.
    """
    if R1.m != R2.m:
        raise InvalidInputError(f"input dimensions differ ({R1.m} vs {R2.m})")
    if R1.d != R2.d:
        raise InvalidInputError(f"output dimensions differ ({R1.d} vs {R2.d})")
    if washout is None:
        washout = max(R1.default_washout(), R2.default_washout())
    if isinstance(u, (InputStream, np.ndarray)):
        groups: Sequence = [u]
    else:
        by_len: dict[int, list] = {}
        for s in u:
            by_len.setdefault(len(s), []).append(s)
        groups = list(by_len.values())
    gap = 0.0
    for g in groups:
        y1 = R1.simulate(g, washout, observe=R1._output)
        y2 = R2.simulate(g, washout, observe=R2._output)
        gap = max(gap, float(np.linalg.norm(y1 - y2, axis=2).max(initial=0.0)))
    return gap
