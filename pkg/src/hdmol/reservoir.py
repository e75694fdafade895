"""Liquid state machine driven by spike frames.

Neurons sit on an integer 3-D lattice. A directed synapse i -> j (i != j)
exists with probability ``conn_scale * exp(-d(i, j)**2 / conn_lambda**2)``.
Weight magnitudes are |N(0, weight_std)|; the sign follows the source
neuron (excitatory +, inhibitory -). The first ceil(0.8 n) neurons are
excitatory.

Dynamics are a fixed-step leaky integrate-and-fire update. At step t::

    I_t = W_in^T frame_t + W^T s_{t-1}
    v   = v * (1 - dt / tau_m) + dt * I_t      (non-refractory neurons)
    s_t = v >= v_thresh;  v[s_t] = v_reset;  refractory for refractory/dt steps

Refractory neurons are clamped at ``v_reset`` and ignore input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .spikes import FRAME_LENGTH
from .vsa import STREAM_RESERVOIR, make_rng

SUPPORTED_SIZES = (400, 1650, 10_000)
_BLOCK = 512


@dataclass(frozen=True)
class LifParams:
    tau_m: float = 20.0
    v_thresh: float = 1.0
    v_reset: float = 0.0
    refractory: float = 2.0
    dt: float = 1.0


@dataclass(frozen=True)
class ReservoirConfig:
    size: int = 400
    exc_fraction: float = 0.8
    conn_scale: float = 0.3
    conn_lambda: float = 2.0
    weight_std: float = 1.0
    input_fanout: float = 0.1
    lif: LifParams = field(default_factory=LifParams)
    frame_dwell: int = 5
    settle: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.size < 10:
            raise ValueError(f"reservoir size must be >= 10, got {self.size}")
        if not 0 < self.exc_fraction < 1:
            raise ValueError("exc_fraction must lie in (0, 1)")
        lif = self.lif
        if min(lif.tau_m, lif.refractory, lif.dt) <= 0:
            raise ValueError("time constants must be positive")
        if lif.dt > lif.refractory:
            raise ValueError("dt must not exceed the refractory period")
        if self.frame_dwell < 1 or self.settle < 0:
            raise ValueError("frame_dwell must be >= 1 and settle >= 0")

    @property
    def n_excitatory(self) -> int:
        return math.ceil(self.exc_fraction * self.size)


@dataclass
class Reservoir:
    config: ReservoirConfig
    positions: np.ndarray          # (n, 3) lattice coordinates
    excitatory: np.ndarray         # (n,) bool
    weights: sparse.csr_matrix     # (n, n), row = source, column = target
    input_weights: np.ndarray      # (FRAME_LENGTH, n)

    def __post_init__(self):
        self._recurrent_in = self.weights.T.tocsr()

    @property
    def size(self) -> int:
        return self.positions.shape[0]


def lattice_shape(n: int) -> tuple[int, int, int]:
    """Smallest (a, b, c), a <= b <= c <= a + 1, with a * b * c >= n."""
    a = 1
    while True:
        for shape in ((a, a, a), (a, a, a + 1), (a, a + 1, a + 1)):
            if math.prod(shape) >= n:
                return shape
        a += 1


def lattice_positions(n: int) -> np.ndarray:
    a, b, c = lattice_shape(n)
    grid = np.stack(np.meshgrid(np.arange(a), np.arange(b), np.arange(c), indexing="ij"), -1)
    return grid.reshape(-1, 3)[:n].astype(float)


def connection_probability(d2: np.ndarray, cfg: ReservoirConfig) -> np.ndarray:
    return cfg.conn_scale * np.exp(-d2 / cfg.conn_lambda ** 2)


def build_reservoir(cfg: ReservoirConfig) -> Reservoir:
    n = cfg.size
    rng = make_rng(cfg.seed, STREAM_RESERVOIR)
    pos = lattice_positions(n)
    excitatory = np.arange(n) < cfg.n_excitatory

    rows, cols = [], []
    for start in range(0, n, _BLOCK):
        src = pos[start:start + _BLOCK]
        d2 = ((src[:, None, :] - pos[None, :, :]) ** 2).sum(-1)
        p = connection_probability(d2, cfg)
        p[np.arange(len(src)), np.arange(start, start + len(src))] = 0.0
        r, c = np.nonzero(rng.random(p.shape) < p)
        rows.append(r + start)
        cols.append(c)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    mag = np.abs(rng.normal(0.0, cfg.weight_std, size=rows.size))
    vals = np.where(excitatory[rows], mag, -mag)
    weights = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))

    fan = max(1, round(cfg.input_fanout * n))
    w_in = np.zeros((FRAME_LENGTH, n))
    for slot in range(FRAME_LENGTH):
        targets = rng.choice(n, size=fan, replace=False)
        w_in[slot, targets] = np.abs(rng.normal(0.0, 1.0, size=fan))
    return Reservoir(cfg, pos, excitatory, weights, w_in)


def simulate(res: Reservoir, frames, record: bool = False):
    """Run the LIF dynamics.

    Returns ``(spike_counts, total_steps)``, plus ``(voltages, spikes)``
    traces of shape (steps, n) when ``record`` is true.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("cannot run a reservoir on an empty frame list")
    cfg = res.config
    lif = cfg.lif
    n = res.size
    decay = 1.0 - lif.dt / lif.tau_m
    ref_steps = int(round(lif.refractory / lif.dt))
    total = len(frames) * cfg.frame_dwell + cfg.settle

    drives = [np.asarray(f, dtype=float) @ res.input_weights for f in frames]
    zero = np.zeros(n)
    v = np.full(n, lif.v_reset, dtype=float)
    refractory = np.zeros(n, dtype=np.int64)
    spikes = np.zeros(n, dtype=bool)
    counts = np.zeros(n, dtype=np.int64)
    v_trace, s_trace = [], []

    for t in range(total):
        k = t // cfg.frame_dwell
        current = drives[k] if k < len(frames) else zero
        if spikes.any():
            current = current + res._recurrent_in @ spikes.astype(float)
        active = refractory == 0
        v = np.where(active, v * decay + lif.dt * current, lif.v_reset)
        refractory = np.where(active, 0, refractory - 1)
        spikes = active & (v >= lif.v_thresh)
        v[spikes] = lif.v_reset
        refractory[spikes] = ref_steps
        counts += spikes
        if record:
            v_trace.append(v.copy())
            s_trace.append(spikes.copy())

    if record:
        return counts, total, np.array(v_trace), np.array(s_trace)
    return counts, total


def run(res: Reservoir, frames) -> np.ndarray:
    """Per-neuron firing rate: spike count over the total number of steps."""
    counts, total = simulate(res, frames)
    return counts / total
