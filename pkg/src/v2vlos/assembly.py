"""Assembly of valid probability vectors and row-stochastic matrices.

Two curves per vector are evaluated explicitly; the third entry is the
complement to one. Curve-fit imperfection can drive the complement negative
at extreme distances, in which case a deterministic repair is applied: the
smallest of the three values is forced to zero, the best-supported (largest)
explicit value is kept, and the remaining one is set to one minus the kept
value. All functions here are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import eval_curve
from .errors import ConvergenceError
from .params import ScenarioModel, effective_distance
from .states import CANONICAL_STATES, LosState

SUM_TOLERANCE = 1e-9

KEEP_POLICIES = ("largest", "first")


@dataclass(frozen=True)
class StateProbVector:
    """Probability of each visibility state at one distance."""

    los: float
    nlosv: float
    nlosb: float

    def __post_init__(self):
        t = (self.los, self.nlosv, self.nlosb)
        if any(p < -SUM_TOLERANCE or p > 1.0 + SUM_TOLERANCE for p in t):
            raise ValueError(f"probabilities outside [0, 1]: {t}")
        if abs(sum(t) - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {sum(t)!r}, expected 1")

    def __getitem__(self, state: LosState) -> float:
        return self.as_tuple()[int(state)]

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.los, self.nlosv, self.nlosb)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    def as_dict(self) -> dict[LosState, float]:
        return {s: self[s] for s in CANONICAL_STATES}


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic 3x3 one-second transition matrix assembled at distance ``d``."""

    m: np.ndarray
    d: float

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected 3x3 matrix, got shape {m.shape}")
        if np.any(m < -SUM_TOLERANCE) or np.any(m > 1.0 + SUM_TOLERANCE):
            raise ValueError("matrix entries outside [0, 1]")
        if np.any(np.abs(m.sum(axis=1) - 1.0) > SUM_TOLERANCE):
            raise ValueError(f"rows must sum to 1, got {m.sum(axis=1)}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def row(self, origin: LosState) -> StateProbVector:
        r = self.m[int(origin)]
        return StateProbVector(float(r[0]), float(r[1]), float(r[2]))


def repair_vector(values: tuple[float, float, float], keep: str = "largest") -> tuple[float, float, float]:
    """Return a valid probability triple, repairing an invalid one.

    Already-valid input is returned unchanged. Otherwise the smallest entry
    (earliest state on ties) is zeroed, one of the remaining entries is kept
    (the largest by default, the earlier one under ``keep="first"``), and the
    other is set to one minus the kept value.
    """
    if keep not in KEEP_POLICIES:
        raise ValueError(f"keep must be one of {KEEP_POLICIES}, got {keep!r}")
    if min(values) >= 0.0 and abs(sum(values) - 1.0) <= SUM_TOLERANCE:
        return values
    i_small = min(range(3), key=lambda i: (values[i], i))
    rest = [i for i in range(3) if i != i_small]
    if keep == "largest":
        i_keep = max(rest, key=lambda i: (values[i], -i))
    else:
        i_keep = rest[0]
    i_other = rest[1] if i_keep == rest[0] else rest[0]
    out = [0.0, 0.0, 0.0]
    out[i_keep] = min(max(values[i_keep], 0.0), 1.0)
    out[i_other] = 1.0 - out[i_keep]
    return (out[0], out[1], out[2])


def _assemble(explicit: dict, complement: LosState, d: float, keep: str) -> tuple[float, float, float]:
    vals = [0.0, 0.0, 0.0]
    total = 0.0
    for state, spec in explicit.items():
        v = eval_curve(spec, d)
        vals[int(state)] = v
        total += v
    vals[int(complement)] = 1.0 - total
    return repair_vector((vals[0], vals[1], vals[2]), keep=keep)


def state_probabilities(
    model: ScenarioModel,
    d: float,
    over_range: str = "error",
    keep: str = "largest",
) -> StateProbVector:
    """Probability of LOS/NLOSv/NLOSb at distance ``d`` for one scenario."""
    d_eff = effective_distance(d, model.d_min, model.d_max, over_range)
    sp = model.state_probs
    return StateProbVector(*_assemble(sp.explicit, sp.complement, d_eff, keep))


def transition_row(
    model: ScenarioModel,
    origin: LosState,
    d: float,
    over_range: str = "error",
    keep: str = "largest",
) -> tuple[float, float, float]:
    """One outgoing-probability row, in canonical state order."""
    d_eff = effective_distance(d, model.d_min, model.d_max, over_range)
    row = model.row(origin)
    return _assemble(row.explicit, row.complement, d_eff, keep)


def transition_matrix(
    model: ScenarioModel,
    d: float,
    over_range: str = "error",
    keep: str = "largest",
) -> TransitionMatrix:
    """Row-stochastic transition matrix assembled at exact distance ``d``."""
    d_eff = effective_distance(d, model.d_min, model.d_max, over_range)
    rows = [
        _assemble(model.row(origin).explicit, model.row(origin).complement, d_eff, keep)
        for origin in CANONICAL_STATES
    ]
    return TransitionMatrix(np.array(rows, dtype=float), d=d_eff)


@dataclass(frozen=True)
class StationaryResult:
    """Equilibrium distribution of a transition matrix (diagnostic)."""

    probs: StateProbVector
    unique: bool
    iterations: int
    residual: float


def stationary_distribution(
    tm: TransitionMatrix,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> StationaryResult:
    """Left eigenvector for eigenvalue one, found by power iteration.

    ``unique`` is False when the chain is reducible (several eigenvalues at
    one), in which case the returned vector is one of many equilibria.
    Periodic chains do not converge and raise :class:`ConvergenceError`.
    """
    m = np.asarray(tm.m, dtype=float)
    # Asymmetric start: the uniform vector is a fixed point of every doubly
    # stochastic matrix and would mask periodic chains.
    pi = np.array([0.5, 0.3, 0.2])
    for it in range(1, max_iter + 1):
        nxt = pi @ m
        nxt /= nxt.sum()
        residual = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        if residual < tol:
            eigvals = np.linalg.eigvals(m)
            unique = int(np.sum(np.abs(eigvals - 1.0) < 1e-8)) == 1
            pi = pi / pi.sum()
            probs = StateProbVector(float(pi[0]), float(pi[1]), float(pi[2]))
            return StationaryResult(probs, unique, it, residual)
    raise ConvergenceError(f"power iteration did not reach residual {tol} in {max_iter} iterations")
