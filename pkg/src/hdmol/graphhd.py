"""GraphHD adapted to atomic structure graphs (MAP algebra).

Node memory of atom i::

    NM_i = sum_j permute(V, shift(w_ij)) * H[element_j]

with ``w_ij`` the edge distance scaled onto [0, 1] and
``shift(w) = round(w * (levels - 1))``. The graph vector is::

    G = 1/2 * sum_i H[element_i] * NM_i

Everything is accumulated in exact integer arithmetic; the 1/2 is applied
last, so results are half-integers and exactly invariant to atom order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import vsa
from .structures import DISTANCE_SCALE, N_ELEMENTS, MoleculeGraph

DEFAULT_LEVELS = 25


@dataclass(frozen=True)
class ElementCodebook:
    H: np.ndarray          # (N_ELEMENTS + 1, D); row 0 unused, row z is element z
    V: np.ndarray          # (D,)
    seed: int
    levels: int = DEFAULT_LEVELS

    @property
    def dim(self) -> int:
        return self.V.shape[0]

    def edge_vector(self, shift: int) -> np.ndarray:
        return vsa.permute(self.V, shift)


def make_codebook(seed: int, dim: int = vsa.DEFAULT_DIM, levels: int = DEFAULT_LEVELS) -> ElementCodebook:
    rng = vsa.make_rng(seed, vsa.STREAM_MAP_CODEBOOK)
    H = np.zeros((N_ELEMENTS + 1, dim), dtype=np.int64)
    for z in range(1, N_ELEMENTS + 1):
        H[z] = vsa.sample_map(rng, dim)
    V = vsa.sample_map(rng, dim)
    return ElementCodebook(H, V, seed, levels)


def weight_shift(distance: float, levels: int = DEFAULT_LEVELS) -> int:
    w = min(max(distance / DISTANCE_SCALE, 0.0), 1.0)
    return int(np.floor(w * (levels - 1) + 0.5))


def node_memory(g: MoleculeGraph, i: int, cb: ElementCodebook) -> np.ndarray:
    nm = np.zeros(cb.dim, dtype=np.int64)
    for j, dist in g.neighbors(i):
        nm += vsa.bind_map(cb.edge_vector(weight_shift(dist, cb.levels)), cb.H[g.atoms[j].element])
    return nm


def encode_graphhd(g: MoleculeGraph, cb: ElementCodebook) -> np.ndarray:
    if not g.atoms:
        raise ValueError(f"{g.id}: cannot encode an empty graph")
    acc = np.zeros(cb.dim, dtype=np.int64)
    for i, atom in enumerate(g.atoms):
        acc += vsa.bind_map(cb.H[atom.element], node_memory(g, i, cb))
    return acc * 0.5


def encode_dataset(graphs, cb: ElementCodebook) -> np.ndarray:
    return np.stack([encode_graphhd(g, cb) for g in graphs])
