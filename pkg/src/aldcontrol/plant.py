"""Discrete ARX plant, measurement corruption, and reference trajectories.

The plant is

    y(k+1) = b_1 u(k) + ... + b_m u(k-m+1) + a_1 y(k) + ... + a_n y(k-n+1)

with measurements z(k) = y(k) + e(k).  ``PlantState`` carries the output,
input, and measurement histories needed to form regressors; everything is a
value, one state per episode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .noise import NoiseModel, mixture_sample

__all__ = [
    "ArxParams",
    "PlantState",
    "TrajectorySpec",
    "TRAJECTORY_KINDS",
    "parameter_vector",
    "initial_plant_state",
    "plant_step",
    "record_measurement",
    "measure",
    "reference",
    "reference_trajectory",
]

TRAJECTORY_KINDS = ("filtered_square", "triangle", "sine")


@dataclass(frozen=True)
class ArxParams:
    """Output coefficients ``a`` (length n >= 0) and input coefficients ``b`` (length m >= 1)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("plant coefficients must be finite")
        if b.size < 1:
            raise ValueError("need at least one input coefficient")
        if b[0] == 0.0:
            raise ValueError("leading input coefficient must be nonzero")

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def d(self) -> int:
        return self.a.size + self.b.size


def parameter_vector(p: ArxParams) -> np.ndarray:
    """True parameters in regressor order [b_1..b_m, a_1..a_n]."""
    return np.concatenate([p.b, p.a])


@dataclass(frozen=True)
class PlantState:
    """Newest-first histories: outputs y(k)..y(k-n+1), inputs u(k-1)..u(k-m+1), measurements z(k)..z(k-n+1)."""

    y_hist: np.ndarray
    u_hist: np.ndarray
    z_hist: np.ndarray


def initial_plant_state(p: ArxParams) -> PlantState:
    """All-zero initial information."""
    return PlantState(np.zeros(p.n), np.zeros(p.m - 1), np.zeros(p.n))


def _shift(hist: np.ndarray, value: float) -> np.ndarray:
    if hist.size == 0:
        return hist
    return np.concatenate([[value], hist[:-1]])


def plant_step(p: ArxParams, s: PlantState, u: float) -> tuple[float, PlantState]:
    """Advance one step with input ``u``; returns the next output and state."""
    if not math.isfinite(u):
        raise ValueError(f"control input must be finite, got {u!r}")
    y_next = float(p.b @ np.concatenate([[u], s.u_hist]) + p.a @ s.y_hist)
    return y_next, PlantState(_shift(s.y_hist, y_next), _shift(s.u_hist, u), s.z_hist)


def record_measurement(s: PlantState, z: float) -> PlantState:
    return PlantState(s.y_hist, s.u_hist, _shift(s.z_hist, z))


def measure(y: float, noise: NoiseModel, rng: np.random.Generator) -> float:
    """Corrupt the true output with one mixture noise draw."""
    return y + mixture_sample(noise, rng)


@dataclass(frozen=True)
class TrajectorySpec:
    """Reference waveform: kind, frequency in Hz, amplitude, and seconds per step."""

    kind: str
    frequency_hz: float = 0.01
    amplitude: float = 1.0
    sample_period_s: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in TRAJECTORY_KINDS:
            raise ValueError(f"trajectory kind must be one of {TRAJECTORY_KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.frequency_hz) and self.frequency_hz > 0.0):
            raise ValueError("frequency_hz must be positive")
        if not (math.isfinite(self.sample_period_s) and self.sample_period_s > 0.0):
            raise ValueError("sample_period_s must be positive")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")


def reference_trajectory(spec: TrajectorySpec, count: int) -> np.ndarray:
    """Reference values r(0) .. r(count-1).

    sine:            A*sin(2*pi*f*k*dt)
    triangle:        symmetric, period 1/f, starts at 0 rising, peak +A at the
                     quarter period
    filtered_square: +-A square wave (first half-period positive) through the
                     exact zero-order-hold discretization of 1/(s+1):
                     r(k+1) = exp(-dt)*r(k) + (1-exp(-dt))*q(k), r(0) = 0
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    k = np.arange(count, dtype=float)
    phase = np.mod(k * spec.sample_period_s * spec.frequency_hz, 1.0)
    if spec.kind == "sine":
        return spec.amplitude * np.sin(2.0 * math.pi * spec.frequency_hz * k * spec.sample_period_s)
    if spec.kind == "triangle":
        tri = np.where(phase < 0.25, 4.0 * phase, np.where(phase < 0.75, 2.0 - 4.0 * phase, 4.0 * phase - 4.0))
        return spec.amplitude * tri
    square = np.where(phase < 0.5, spec.amplitude, -spec.amplitude)
    decay = math.exp(-spec.sample_period_s)
    out = np.zeros(count)
    for i in range(count - 1):
        out[i + 1] = decay * out[i] + (1.0 - decay) * square[i]
    return out


def reference(spec: TrajectorySpec, k: int) -> float:
    """Reference value at step ``k`` (k >= 0)."""
    if k < 0:
        raise ValueError("step index must be nonnegative")
    return float(reference_trajectory(spec, k + 1)[k])
