"""The small random reservoir used as the approximation target in the experiments."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..linalg import operator_norm
from ..reservoir import LinearReadout, LinearReservoir, train_ridge

# decimal places of pi after the point
PI_DECIMALS = (
    "14159265358979323846264338327950288419716939937510"
    "58209749445923078164062862089986280348253421170679"
)
INPUT_WEIGHT = 0.05


def pi_signs(n: int) -> np.ndarray:
    """+1 where the i-th decimal place of pi is 5..9, -1 where it is 0..4."""
    if not 0 < n <= len(PI_DECIMALS):
        raise InvalidInputError(f"need 1 <= n <= {len(PI_DECIMALS)}")
    return np.array([1.0 if int(c) >= 5 else -1.0 for c in PI_DECIMALS[:n]])


def make_reference_system(seed: int, *, n: int = 5, rho: float = 0.9, input_bound: float = 1.0,
                          weight: float = INPUT_WEIGHT) -> LinearReservoir:
    """``W ~ U(0,1)`` rescaled to operator norm ``rho``; V is ``weight`` times the pi sign pattern.

    The readout is the identity; :func:`fit_forecast_readout` replaces it.
    """
    if not 0 < rho < 1:
        raise InvalidInputError("rho must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.0, 1.0, size=(n, n))
    W *= rho / operator_norm(W)
    V = weight * pi_signs(n)[:, None]
    return LinearReservoir(W, V, None, input_bound)


def forecast_pairs(states: np.ndarray, values: np.ndarray, horizon: int, start: int, stop: int):
    """(x_t, u_{t+horizon}) for t in [start, stop - horizon); ``states[t]`` is x_t."""
    t = np.arange(start, stop - horizon)
    if t.size == 0:
        raise InvalidInputError("split is shorter than the forecast horizon")
    return states[t], values[t + horizon][:, None]


def fit_forecast_readout(R: LinearReservoir, values: np.ndarray, train: slice, horizon: int = 300,
                         ridge: float = 1e-9, washout: int | None = None) -> LinearReservoir:
    """Ridge readout predicting ``u_{t+horizon}`` from ``x_t`` on the training range."""
    u = np.asarray(values, dtype=float)[:, None]
    w = R.default_washout() if washout is None else washout
    stop = train.stop
    X = R.drive(u[:stop], washout=0)
    S, Y = forecast_pairs(X, u[:, 0], horizon, min(w, stop - 1), stop)
    A = train_ridge(S, Y, ridge).A
    return R.with_readout(LinearReadout(A))
