"""Sub-Riemannian geodesics on SE(2) = R^2 x S^1.

The horizontal distribution is spanned by X = d/dtheta and
Y = cos(theta) d/dx + sin(theta) d/dy.  In the moving frame the geodesic
flow is generated by H = (p1^2 + p2^2) / 2, where p1 is the momentum
along Y, p2 the momentum along X and p3 the momentum along the
complementary direction Z = -sin(theta) d/dx + cos(theta) d/dy:

    xdot = cos(theta) p1        p1dot =  p2 p3
    ydot = sin(theta) p1        p2dot = -p1 p3
    thetadot = p2               p3dot = -p1 p2

H is a first integral; we carry E = 2H = p1^2 + p2^2.  Substituting

    p1 = sqrt(E) sin(gamma/2),  p2 = sqrt(E) cos(gamma/2),  p3 = gammadot/2

turns the momentum equations into a pendulum, gammaddot = -E sin(gamma),
and the projected dynamics become

    xdot = sqrt(E) sin(gamma/2) cos(theta)
    ydot = sqrt(E) sin(gamma/2) sin(theta)
    thetadot = sqrt(E) cos(gamma/2)

with conserved pendulum energy K = gammadot^2/2 - E cos(gamma).

Both formulations are integrated with fixed-step classical RK4; theta is
wrapped to [0, 2*pi) after every step, gamma is left unwrapped so that K
stays meaningful across the separatrix.  Launching a fan of trajectories
from the origin with gammadot0 = 0 and gamma0 sweeping (0, 2*pi)
reproduces the association-field completion curves in the image plane.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: default integration parameters for association-field fans
DEFAULT_DT = 1e-3
DEFAULT_T_END = 5.0
DEFAULT_ENERGY = 1.0

FULL = "full"
REDUCED = "reduced"

# state-vector layouts, last axis of every array the integrator touches
_FULL_FIELDS = ("x", "y", "theta", "p1", "p2", "p3")
_REDUCED_FIELDS = ("x", "y", "theta", "gamma", "gammadot")


@dataclass
class GeodesicState:
    """Point of the cotangent flow in the moving frame."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    p1: float = 0.0
    p2: float = 0.0
    p3: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.p1, self.p2, self.p3], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "GeodesicState":
        x, y, theta, p1, p2, p3 = (float(v) for v in np.asarray(arr))
        return cls(x, y, theta, p1, p2, p3)

    @property
    def energy(self) -> float:
        return self.p1 ** 2 + self.p2 ** 2

    def canonical_momenta(self):
        """Recover (p_x, p_y, p_theta) in local coordinates.

        The fields may hold arrays (e.g. a whole trajectory at once);
        p_x and p_y are then constants of motion up to integrator error.
        """
        c, s = np.cos(self.theta), np.sin(self.theta)
        return (self.p1 * c - self.p3 * s, self.p1 * s + self.p3 * c, self.p2)


@dataclass
class ReducedState:
    """Pendulum-phase formulation; the energy E rides along separately."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    gamma: float = 0.0
    gammadot: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.gamma, self.gammadot], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "ReducedState":
        x, y, theta, gamma, gammadot = (float(v) for v in np.asarray(arr))
        return cls(x, y, theta, gamma, gammadot)


def _state_array(state) -> np.ndarray:
    if isinstance(state, (GeodesicState, ReducedState)):
        return state.as_array()
    return np.asarray(state, dtype=float)


def hamiltonian(state) -> np.ndarray | float:
    """H = (p1^2 + p2^2) / 2.  Vectorized over leading axes."""
    y = _state_array(state)
    h = 0.5 * (y[..., 3] ** 2 + y[..., 4] ** 2)
    return float(h) if h.ndim == 0 else h


def full_rhs(state) -> np.ndarray:
    """Time derivative of (x, y, theta, p1, p2, p3)."""
    y = _state_array(state)
    theta, p1, p2, p3 = y[..., 2], y[..., 3], y[..., 4], y[..., 5]
    return np.stack(
        [np.cos(theta) * p1, np.sin(theta) * p1, p2, p2 * p3, -p1 * p3, -p1 * p2],
        axis=-1,
    )


def reduced_rhs(state, E) -> np.ndarray:
    """Time derivative of (x, y, theta, gamma, gammadot) at energy E >= 0."""
    E = np.asarray(E, dtype=float)
    if np.any(E < 0.0):
        raise ValueError(f"energy must be non-negative, got {E}")
    y = _state_array(state)
    theta, gamma, gammadot = y[..., 2], y[..., 3], y[..., 4]
    sqe = np.sqrt(E)
    half = 0.5 * gamma
    radial = sqe * np.sin(half)
    return np.stack(
        [radial * np.cos(theta), radial * np.sin(theta), sqe * np.cos(half),
         gammadot, -E * np.sin(gamma)],
        axis=-1,
    )


def pendulum_energy(state, E) -> np.ndarray | float:
    """K = gammadot^2/2 - E cos(gamma), conserved by the reduced flow."""
    y = _state_array(state)
    k = 0.5 * y[..., 4] ** 2 - np.asarray(E, dtype=float) * np.cos(y[..., 3])
    return float(k) if k.ndim == 0 else k


def phase_to_momenta(gamma, gammadot, E):
    """Map reduced coordinates to (p1, p2, p3) of the full system."""
    sqe = np.sqrt(np.asarray(E, dtype=float))
    return sqe * np.sin(0.5 * np.asarray(gamma)), sqe * np.cos(0.5 * np.asarray(gamma)), 0.5 * np.asarray(gammadot)


@dataclass
class Trajectory:
    """Sampled solution curve.

    ``states`` has one row per timestamp; columns are (x, y, theta, p1, p2, p3)
    for the full system and (x, y, theta, gamma, gammadot) for the reduced one.
    """

    times: np.ndarray
    states: np.ndarray
    energy: float
    system: str = FULL

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have the same length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def theta(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def fields(self) -> tuple[str, ...]:
        return _FULL_FIELDS if self.system == FULL else _REDUCED_FIELDS

    def hamiltonian_series(self) -> np.ndarray:
        if self.system != FULL:
            raise ValueError("hamiltonian series is defined for the full system only")
        return 0.5 * (self.states[:, 3] ** 2 + self.states[:, 4] ** 2)

    def pendulum_energy_series(self) -> np.ndarray:
        if self.system != REDUCED:
            raise ValueError("pendulum energy is defined for the reduced system only")
        return 0.5 * self.states[:, 4] ** 2 - self.energy * np.cos(self.states[:, 3])

    def to_csv(self, path) -> None:
        """Write plot-ready rows t,x,y,theta[,gamma,gammadot]."""
        if self.system == REDUCED:
            header = ["t", "x", "y", "theta", "gamma", "gammadot"]
            cols = self.states
        else:
            header = ["t", "x", "y", "theta"]
            cols = self.states[:, :3]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, row in zip(self.times, cols):
                writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def _rk4_rollout(f, y0: np.ndarray, n_steps: int, dt: float) -> np.ndarray:
    """Classical RK4 with theta (column 2) wrapped to [0, 2*pi) per step.

    ``y0`` may carry leading batch axes; returns (n_steps+1, *y0.shape).
    """
    out = np.empty((n_steps + 1,) + y0.shape, dtype=float)
    y = np.array(y0, dtype=float)
    y[..., 2] %= TWO_PI
    out[0] = y
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(n_steps):
        k1 = f(y)
        k2 = f(y + half * k1)
        k3 = f(y + half * k2)
        k4 = f(y + dt * k3)
        y = y + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        y[..., 2] %= TWO_PI
        out[i + 1] = y
    return out


def _n_steps(t_end: float, dt: float) -> int:
    if not (dt > 0.0 and t_end > 0.0):
        raise ValueError(f"t_end and dt must be positive, got t_end={t_end}, dt={dt}")
    return max(1, round(t_end / dt))


def integrate_batch(initial: np.ndarray, system: str = FULL,
                    t_end: float = DEFAULT_T_END, dt: float = DEFAULT_DT,
                    E=None) -> tuple[np.ndarray, np.ndarray]:
    """Integrate a stack of initial states at once.

    ``initial`` is (..., 6) for the full system or (..., 5) for the reduced
    one; for the latter ``E`` (scalar or broadcastable over the batch) is
    required.  Returns (times, states) with states (n+1, ..., dim).
    """
    y0 = np.asarray(initial, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state must be finite")
    n = _n_steps(t_end, dt)
    if system == FULL:
        if y0.shape[-1] != 6:
            raise ValueError("full system state must have 6 components")
        rhs = full_rhs
    elif system == REDUCED:
        if y0.shape[-1] != 5:
            raise ValueError("reduced system state must have 5 components")
        if E is None:
            raise ValueError("reduced system requires the energy E")
        Ea = np.asarray(E, dtype=float)
        if not np.all(np.isfinite(Ea)) or np.any(Ea < 0.0):
            raise ValueError(f"E must be finite and non-negative, got {E}")

        def rhs(y):
            return reduced_rhs(y, Ea)
    else:
        raise ValueError(f"unknown system {system!r}")
    states = _rk4_rollout(rhs, y0, n, dt)
    times = np.arange(n + 1) * dt
    return times, states


def integrate(initial, system: str = FULL, t_end: float = DEFAULT_T_END,
              dt: float = DEFAULT_DT, E=None) -> Trajectory:
    """Integrate one initial state and return the sampled Trajectory."""
    y0 = _state_array(initial)
    times, states = integrate_batch(y0, system=system, t_end=t_end, dt=dt, E=E)
    if system == FULL:
        energy = float(y0[3] ** 2 + y0[4] ** 2)
    else:
        energy = float(E)
    return Trajectory(times=times, states=states, energy=energy, system=system)


def fan_gammas(n: int) -> np.ndarray:
    """n evenly spaced phases strictly inside (0, 2*pi)."""
    if n < 1:
        raise ValueError("need at least one phase")
    return TWO_PI * np.arange(1, n + 1) / (n + 1)


def association_fan(E: float, gammas, t_end: float = DEFAULT_T_END,
                    dt: float = DEFAULT_DT, system: str = REDUCED) -> list[Trajectory]:
    """One trajectory per initial phase gamma0, all from the origin.

    Each curve starts at (0, 0) with orientation 0 and gammadot0 = 0 at
    the given energy; projected to the (x, y) plane the family sweeps
    out the association-field fan.  ``system`` selects whether the
    reduced phase equations or the full momentum equations are rolled
    out (the trajectories agree up to integrator error).
    """
    gammas = np.asarray(gammas, dtype=float)
    if not np.all(np.isfinite(gammas)):
        raise ValueError("gamma values must be finite")
    if not (math.isfinite(E) and E > 0.0):
        raise ValueError(f"E must be positive and finite, got {E}")
    if gammas.size == 0:
        return []
    if system == REDUCED:
        y0 = np.zeros((gammas.size, 5))
        y0[:, 3] = gammas
    elif system == FULL:
        y0 = np.zeros((gammas.size, 6))
        p1, p2, p3 = phase_to_momenta(gammas, np.zeros_like(gammas), E)
        y0[:, 3], y0[:, 4], y0[:, 5] = p1, p2, p3
    else:
        raise ValueError(f"system must be {FULL!r} or {REDUCED!r}, got {system!r}")
    times, states = integrate_batch(y0, system=system, t_end=t_end, dt=dt, E=E)
    return [
        Trajectory(times=times, states=states[:, i, :], energy=float(E), system=system)
        for i in range(gammas.size)
    ]
