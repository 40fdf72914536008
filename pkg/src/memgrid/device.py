"""Single-memristor model: threshold-clipped drive, windowed state rate, Ohmic conduction.

The device resistance X is the internal state. It only moves while the applied
voltage magnitude exceeds the threshold ``v_t``, grows for positive voltage
(RESET direction) and shrinks for negative voltage (SET direction), and is
confined to ``[r_on, r_off]`` by window terms plus a hard clamp after each
integration step.

All functions accept scalars or numpy arrays and broadcast, so the same code
drives a single device and a whole lattice of per-edge parameter arrays.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


@dataclass(frozen=True)
class DeviceParams:
    """Per-unit model constants (SI units: ohm, volt, ohm per volt-second)."""

    r_on: float
    r_off: float
    v_t: float
    beta: float
    r_init: float

    def __post_init__(self):
        if not 0 < self.r_on < self.r_off:
            raise ValueError(f"require 0 < r_on < r_off, got {self.r_on}, {self.r_off}")
        if not self.r_on <= self.r_init <= self.r_off:
            raise ValueError(f"r_init {self.r_init} outside [{self.r_on}, {self.r_off}]")
        if self.v_t < 0:
            raise ValueError(f"v_t must be >= 0, got {self.v_t}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")

    @property
    def ratio(self) -> float:
        """Programmed resistance ratio r_off / r_on (derived, never stored)."""
        return self.r_off / self.r_on


@dataclass(frozen=True)
class DeviceState:
    """Evolving internal resistance of one unit."""

    x: float


class Polarity(IntEnum):
    """Sign applied to the node-voltage difference to obtain the device voltage."""

    FORWARD = 1
    INVERTED = -1


def clipped_drive(v_m, v_t):
    """Dead-band clip of the device voltage.

    Exactly zero for |v_m| <= v_t, v_m - v_t above, v_m + v_t below; odd in
    v_m and continuous at the threshold. Equivalent to
    v_m - 0.5*(|v_m + v_t| - |v_m - v_t|) but evaluated piecewise so the dead
    band carries no rounding residue.
    """
    return np.where(v_m > v_t, v_m - v_t, np.where(v_m < -v_t, v_m + v_t, 0.0))


def state_rate(x, v_m, p: DeviceParams):
    """Rate of change of the resistance, in ohm per second.

    The clipped drive is gated so a positive voltage can only raise x while
    x < r_off and a negative voltage can only lower it while x > r_on; the
    step functions are closed at zero, so a device parked at a bound stays put.
    """
    window = ((v_m > 0) & (x < p.r_off)) | ((v_m < 0) & (x > p.r_on))
    return p.beta * clipped_drive(v_m, p.v_t) * window


def step_resistance(x, v_m, dt, p: DeviceParams):
    """One explicit Euler step of the resistance with a hard clamp to the bounds."""
    return np.clip(x + state_rate(x, v_m, p) * dt, p.r_on, p.r_off)


def advance(s: DeviceState, v_m: float, dt: float, p: DeviceParams) -> DeviceState:
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    return DeviceState(x=float(step_resistance(s.x, v_m, dt, p)))


def current(s: DeviceState, v_m: float) -> float:
    """Ohmic conduction at the instantaneous resistance."""
    return v_m / s.x


@dataclass(frozen=True)
class ParamTable:
    """Per-edge parameter arrays; duck-compatible with DeviceParams for the
    vectorized device functions."""

    r_on: np.ndarray
    r_off: np.ndarray
    v_t: np.ndarray
    beta: np.ndarray
    r_init: np.ndarray

    @classmethod
    def from_params(cls, params_list) -> "ParamTable":
        return cls(
            r_on=np.array([p.r_on for p in params_list], dtype=float),
            r_off=np.array([p.r_off for p in params_list], dtype=float),
            v_t=np.array([p.v_t for p in params_list], dtype=float),
            beta=np.array([p.beta for p in params_list], dtype=float),
            r_init=np.array([p.r_init for p in params_list], dtype=float),
        )
