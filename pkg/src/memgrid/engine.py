"""Time-marching loop over the lattice.

Explicit coupling: at each step the stimulus is sampled, the network is solved
with the device states produced by the previous step, each device voltage is
read off through its polarity, and all states take one Euler step. Samples are
recorded before the state advance so every trace row (t, v_src, i_src, v_m, x)
is self-consistent.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .device import ParamTable, step_resistance
from .topology import GridNetwork
from .solver import NodalStamper

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Waveform:
    """Sinusoidal stimulus v(t) = amplitude * sin(2*pi*frequency*t + phase)."""

    kind: str = "sine"
    amplitude: float = 12.0
    frequency: float = 1.0
    cycles: int = 5
    phase: float = 0.0

    def __post_init__(self):
        if self.kind != "sine":
            raise ValueError(f"unsupported waveform kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.frequency <= 0:
            raise ValueError(f"frequency must be > 0, got {self.frequency}")
        if self.cycles < 1 or int(self.cycles) != self.cycles:
            raise ValueError(f"cycles must be a positive integer, got {self.cycles}")

    @property
    def duration(self) -> float:
        return self.cycles / self.frequency


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    record_stride: int = 1
    fit_window: float = 0.1  # volts; must stay below every device threshold

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.record_stride < 1 or int(self.record_stride) != self.record_stride:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride}")
        if self.fit_window <= 0:
            raise ValueError(f"fit_window must be > 0, got {self.fit_window}")


def waveform_sample(w: Waveform, t: float) -> float:
    return w.amplitude * np.sin(TWO_PI * w.frequency * t + w.phase)


@dataclass(frozen=True)
class Trace:
    """Recorded time series: source voltage/current plus per-device v_m and x.

    Columns of v_m and x follow the network's edge labels in ascending order.
    """

    t: np.ndarray
    v_src: np.ndarray
    i_src: np.ndarray
    v_m: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        if not np.all(np.diff(self.t) > 0):
            raise ValueError("trace times must be strictly increasing")

    @property
    def n_samples(self) -> int:
        return len(self.t)

    @property
    def n_devices(self) -> int:
        return self.x.shape[1]

    def nearest_index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.t - t)))

    def to_csv(self, path) -> None:
        header = ["t", "v_src", "i_src"]
        for label in range(self.n_devices):
            header += [f"v_m[{label}]", f"x[{label}]"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for k in range(self.n_samples):
                row = [repr(float(self.t[k])), repr(float(self.v_src[k])),
                       repr(float(self.i_src[k]))]
                for e in range(self.n_devices):
                    row.append(repr(float(self.v_m[k, e])))
                    row.append(repr(float(self.x[k, e])))
                writer.writerow(row)


def simulate(network: GridNetwork, w: Waveform, cfg: SimConfig) -> Trace:
    """Run the stimulus over the network and record the trace.

    Connectivity is checked once up front (the topology is static, so a run
    cannot disconnect mid-flight); DisconnectedNetworkError propagates from
    the solver. The first and last steps are always recorded regardless of
    ``record_stride``.
    """
    stamper = NodalStamper(network)
    ptable = ParamTable.from_params([e.params for e in network.edges])
    x = ptable.r_init.copy()
    n_edges = len(network.edges)

    n_steps = round(w.duration / cfg.dt)
    stride = cfg.record_stride
    n_rec = len(range(0, n_steps + 1, stride))
    if n_steps % stride != 0:
        n_rec += 1  # final step recorded out of stride
    t_rec = np.empty(n_rec)
    v_rec = np.empty(n_rec)
    i_rec = np.empty(n_rec)
    vm_rec = np.empty((n_rec, n_edges))
    x_rec = np.empty((n_rec, n_edges))

    cursor = 0
    for k in range(n_steps + 1):
        t = k * cfg.dt
        v = waveform_sample(w, t)
        _, v_m, i_src = stamper.solve_raw(x, v)
        if k % stride == 0 or k == n_steps:
            t_rec[cursor] = t
            v_rec[cursor] = v
            i_rec[cursor] = i_src
            vm_rec[cursor] = v_m
            x_rec[cursor] = x
            cursor += 1
        x = step_resistance(x, v_m, cfg.dt, ptable)

    return Trace(t=t_rec, v_src=v_rec, i_src=i_rec, v_m=vm_rec, x=x_rec)
