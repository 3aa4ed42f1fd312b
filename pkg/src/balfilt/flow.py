"""Kempf-Ness gradient flow of a torus state and its iterated-log residual.

In torus coordinates the potential is ``f(x) = sum_chi exp(<x, chi>) - <x, a>``
with ``a`` the polarisation.  The flow ``h' = -grad f(h)`` is integrated in
``tau = log t``, where it reads ``dh/dtau = -exp(tau) grad f(h)``; along the
expected asymptote ``h ~ -tau nu_1 - log(tau) nu_2 - ...`` the right-hand side
stays O(1).  The residual ``z = h + tau nu_1 + log(tau) nu_2 + ...`` is then
checked for boundedness.

Floating point is confined to this module.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import logsumexp

from .states import PolarisedState, is_semistable, slice_state

LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class FlowError(RuntimeError):
    """Integration failed (step-size underflow or non-finite values)."""

    def __init__(self, message: str, tau_reached: float):
        super().__init__(f"{message} (reached tau = {tau_reached:g})")
        self.tau_reached = tau_reached


@dataclass
class FlowProblem:
    state: PolarisedState
    start: Sequence[float]
    tau0: float = 2.0
    tau_max: float = 1000.0
    rtol: float = 1e-9
    atol: float = 1e-12
    samples: int = 801
    method: str = "auto"
    tail_fraction: float = 0.5
    drift_threshold: float = 1e-2
    box: Optional[Union[float, Sequence[float]]] = None

    chars: np.ndarray = field(init=False, repr=False)
    pol: np.ndarray = field(init=False, repr=False)
    gram: np.ndarray = field(init=False, repr=False)
    gram_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not is_semistable(self.state):
            raise ValueError("state is not semistable; the potential is unbounded below")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if not self.tau_max > self.tau0:
            raise ValueError("tau_max must exceed tau0")
        r = self.state.rank
        self.start = np.asarray(self.start, dtype=float)
        if self.start.shape != (r,):
            raise ValueError(f"start point must have length {r}")
        self.chars = np.array(self.state.characters, dtype=float).reshape(-1, r)
        self.pol = np.array([float(x) for x in self.state.polarisation])
        self.gram = np.array([[float(x) for x in row] for row in self.state.metric.gram]).reshape(r, r)
        self.gram_inv = np.linalg.inv(self.gram)
        if self.method == "auto":
            # faces of the cone relax at rate exp(tau): stiff in tau
            pointed = not slice_state(self.state).face and not any(self.state.polarisation)
            self.method = "RK45" if pointed else "Radau"


def potential(p: FlowProblem, x) -> float:
    x = np.asarray(x, dtype=float)
    if not len(p.chars):
        return float(-x @ p.pol)
    lse = logsumexp(p.chars @ x)
    if lse > LOG_FLOAT_MAX:
        raise FloatingPointError("potential overflows double precision")
    return float(math.exp(lse) - x @ p.pol)


def gradient(p: FlowProblem, x) -> np.ndarray:
    """Metric gradient ``G^-1 (sum exp(<x, chi>) chi - a)``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="raise"):
        weights = np.exp(p.chars @ x)
    return p.gram_inv @ (p.chars.T @ weights - p.pol)


def _rhs(p: FlowProblem, frame: np.ndarray):
    # in the moving frame y = h + tau * frame the exponents are
    # tau * (1 - <frame, chi>) + <y, chi>
    rate = 1.0 - p.chars @ frame

    def fun(tau, y):
        with np.errstate(over="raise", invalid="raise"):
            try:
                weights = np.exp(tau * rate + p.chars @ y)
                lin = math.exp(tau) * p.pol if p.pol.any() else 0.0
            except (FloatingPointError, OverflowError):
                raise FlowError("non-finite right-hand side", tau) from None
        return frame - p.gram_inv @ (p.chars.T @ weights - lin)

    def jac(tau, y):
        weights = np.exp(tau * rate + p.chars @ y)
        return -(p.gram_inv @ (p.chars.T * weights) @ p.chars)

    return fun, jac


@dataclass
class Trajectory:
    tau: np.ndarray
    h: np.ndarray  # samples x rank
    nfev: int
    method: str


def integrate(p: FlowProblem, frame=None) -> Trajectory:
    """Integrate the flow on a geometric grid of ``p.samples`` points in ``[tau0, tau_max]``.

    With ``frame`` the solver tracks ``y = h + tau * frame`` instead of ``h``.
    This is the same flow, but when ``h`` grows linearly along ``-frame`` the
    tracked variable stays small and the error control is relative to it.
    """
    frame = np.zeros(p.state.rank) if frame is None else np.asarray(frame, dtype=float)
    if p.tau0 > 0:
        grid = np.geomspace(p.tau0, p.tau_max, p.samples)
    else:
        grid = np.linspace(p.tau0, p.tau_max, p.samples)
    grid[-1] = p.tau_max
    fun, jac = _rhs(p, frame)
    kwargs = {"jac": jac} if p.method in ("Radau", "BDF", "LSODA") else {}
    y0 = p.start + p.tau0 * frame
    sol = solve_ivp(fun, (p.tau0, p.tau_max), y0, method=p.method, t_eval=grid,
                    rtol=p.rtol, atol=p.atol, **kwargs)
    if sol.status != 0:
        reached = float(sol.t[-1]) if len(sol.t) else p.tau0
        raise FlowError(sol.message, reached)
    h = sol.y.T - np.outer(sol.t, frame)
    if not np.all(np.isfinite(h)):
        raise FlowError("non-finite trajectory", float(sol.t[-1]))
    return Trajectory(sol.t, h, sol.nfev, p.method)


def iterated_logs(tau: np.ndarray, depth: int) -> np.ndarray:
    """Rows ``tau, log tau, log log tau, ...`` (NaN where undefined)."""
    out = np.full((depth, len(tau)), np.nan)
    cur = np.asarray(tau, dtype=float)
    for j in range(depth):
        out[j] = cur
        with np.errstate(invalid="ignore", divide="ignore"):
            cur = np.where(cur > 0, np.log(np.where(cur > 0, cur, 1.0)), np.nan)
    return out


def drift_slope(tau: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Per-component slope of ``z`` against ``log10 tau``.

    The fit also carries the decaying terms ``1/tau, log(tau)/tau, 1/tau^2,
    log(tau)/tau^2, log(tau)^2/tau^2`` so that a converging transient is not
    mistaken for drift.
    """
    lt = np.log(tau)
    basis = np.column_stack([
        np.ones_like(tau), np.log10(tau),
        1 / tau, lt / tau, 1 / tau**2, lt / tau**2, lt**2 / tau**2,
    ])
    norms = np.linalg.norm(basis, axis=0)
    coef, *_ = np.linalg.lstsq(basis / norms, z, rcond=None)
    return coef[1] / norms[1]


def linear_slope(tau: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(np.log10(tau), y, 1)[0])


@dataclass
class FlowResult:
    tau: np.ndarray
    h: np.ndarray
    z: np.ndarray  # NaN rows where the residual is undefined
    prediction: np.ndarray
    tail_max: np.ndarray  # per component
    box: np.ndarray
    drift: np.ndarray  # per component, per decade of tau
    raw_slope: float  # plain linear slope of |z|_inf over the drift window
    drift_threshold: float
    bounded: bool
    method: str
    nfev: int

    def summary(self) -> dict:
        return {
            "bounded": bool(self.bounded),
            "tail_max": [float(x) for x in self.tail_max],
            "box": [float(x) for x in self.box],
            "drift": [float(x) for x in self.drift],
            "drift_threshold": float(self.drift_threshold),
            "raw_slope": float(self.raw_slope),
            "tau_range": [float(self.tau[0]), float(self.tau[-1])],
            "prediction": [[float(x) for x in row] for row in self.prediction],
            "method": self.method,
            "nfev": int(self.nfev),
        }


def residual_check(p: FlowProblem, prediction, trajectory: Optional[Trajectory] = None) -> FlowResult:
    """Integrate (unless given a trajectory) and test the residual for boundedness.

    ``bounded`` requires every tail sample to lie in the box and the drift of
    every component over the last decade of ``tau`` to stay below
    ``p.drift_threshold``.  Without an explicit box, ``2 * max(1, |z|_inf)``
    at the first defined sample is used.
    """
    r = p.state.rank
    nu = np.array([[float(x) for x in lam] for lam in prediction], dtype=float).reshape(-1, r)
    traj = trajectory if trajectory is not None else integrate(p, nu[0] if len(nu) else None)
    tau, h = traj.tau, traj.h
    depth = len(nu)
    logs = iterated_logs(tau, depth)
    defined = np.all(logs > 0, axis=0) if depth else np.ones(len(tau), bool)
    if defined.sum() < 10:
        raise ValueError(f"prediction depth {depth} exceeds iterated-log positivity on the grid")
    z = h + (logs.T @ nu if depth else 0.0)
    z = np.where(defined[:, None], z, np.nan)

    idx = np.flatnonzero(defined)
    tail = idx[int(len(idx) * (1 - p.tail_fraction)):]
    tail_max = np.abs(z[tail]).max(axis=0)
    window = idx[tau[idx] >= tau[-1] / 10]
    if len(window) < 10:
        window = tail
    drift = drift_slope(tau[window], z[window])
    raw = linear_slope(tau[window], np.abs(z[window]).max(axis=1))

    if p.box is None:
        box = np.full(r, 2 * max(1.0, float(np.abs(z[idx[0]]).max())))
    else:
        box = np.broadcast_to(np.asarray(p.box, dtype=float), (r,)).copy()
    bounded = bool(np.all(tail_max <= box) and np.all(np.abs(drift) < p.drift_threshold))
    return FlowResult(tau, h, z, nu, tail_max, box, drift, raw, p.drift_threshold, bounded, traj.method, traj.nfev)


def invariant_rectangle(z_start) -> tuple:
    """Half-widths ``(N2, N1)`` of a forward-invariant box for the two-character example.

    For characters ``(1,0), (1,1)`` with zero polarisation and the standard
    metric, the box ``|z_1| <= N2, |z_2| <= N1`` traps the residual from
    ``log(tau) >= 2`` on whenever ``N2 < N1 < N2 + 1`` and
    ``log(1 - exp(-N2)) >= -1``.  The box returned contains ``z_start``.
    """
    z1, z2 = abs(float(z_start[0])), abs(float(z_start[1]))
    n2_min = -math.log(1 - math.exp(-1.0))
    n2 = max(n2_min, z1, z2 - 0.5) + 0.25
    return n2, n2 + 0.5


def write_csv(result: FlowResult, path) -> None:
    r = result.h.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau"] + [f"h{i + 1}" for i in range(r)] + [f"z{i + 1}" for i in range(r)])
        for t, hh, zz in zip(result.tau, result.h, result.z):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in hh] + [repr(float(x)) for x in zz])
