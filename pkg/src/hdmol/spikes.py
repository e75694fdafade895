"""Edge-to-spike-frame encoding for the reservoir pipeline.

One binary frame per edge: 140 node slots followed by 25 distance bins at
0, 0.25, ..., 6.0 angstrom. A frame has exactly three bits set.
"""

from __future__ import annotations

import math

import numpy as np

from .structures import Edge, MoleculeGraph

N_NODE_SLOTS = 140
N_DISTANCE_BINS = 25
FRAME_LENGTH = N_NODE_SLOTS + N_DISTANCE_BINS
BIN_WIDTH = 0.25


class SpikeEncodingError(ValueError):
    pass


def distance_bin(distance: float) -> int:
    """Frame index of the distance bin, rounding half away from zero and clamping at 6 A."""
    if distance < 0:
        raise SpikeEncodingError(f"negative distance {distance}")
    k = math.floor(distance / BIN_WIDTH + 0.5)
    return N_NODE_SLOTS + min(k, N_DISTANCE_BINS - 1)


def encode_edge(e: Edge) -> np.ndarray:
    if not (0 <= e.i < N_NODE_SLOTS and 0 <= e.j < N_NODE_SLOTS):
        raise SpikeEncodingError(f"node index ({e.i}, {e.j}) outside the {N_NODE_SLOTS} node slots")
    if e.i == e.j:
        raise SpikeEncodingError(f"self edge on node {e.i}")
    frame = np.zeros(FRAME_LENGTH, dtype=np.uint8)
    frame[[e.i, e.j, distance_bin(e.distance)]] = 1
    return frame


def encode_graph(g: MoleculeGraph) -> list[np.ndarray]:
    """One frame per edge, in ascending (min(i, j), max(i, j)) order."""
    edges = sorted(g.edges, key=lambda e: (min(e.i, e.j), max(e.i, e.j)))
    return [encode_edge(e) for e in edges]


def frame_to_string(frame: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in frame)
