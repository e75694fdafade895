"""Molecular structure graphs: data model, JSON I/O and a synthetic generator.

Dataset files are a JSON array of records::

    {"id": "mp-1234",
     "atoms": [{"element": 82, "pos": [0.0, 0.0, 0.0]}, ...],
     "edges": [[0, 1, 2.81], ...],        # optional
     "bandgap": 1.2}                      # optional, eV

Positions and distances are in angstroms. When ``edges`` is absent the
edges are rebuilt from positions with :func:`build_edges`. Only the unit
cell is represented; periodic images are never generated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

MAX_ATOMS = 140
N_ELEMENTS = 118
DISTANCE_SCALE = 6.0  # angstrom; also the top of the spike-encoding bin range
DEFAULT_CUTOFF = 6.0
POSITION_TOL = 1e-6


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    element: int
    position: tuple[float, float, float]

    def __post_init__(self):
        if not 1 <= self.element <= N_ELEMENTS:
            raise DatasetError(f"element {self.element} outside 1..{N_ELEMENTS}")
        if len(self.position) != 3:
            raise DatasetError(f"position must have 3 coordinates, got {self.position!r}")


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    distance: float


@dataclass(frozen=True)
class MoleculeGraph:
    id: str
    atoms: tuple[Atom, ...]
    edges: tuple[Edge, ...] = ()
    bandgap: float | None = None
    _neighbors: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "edges", tuple(self.edges))
        self.validate()
        nbrs: list[list[tuple[int, float]]] = [[] for _ in self.atoms]
        for e in self.edges:
            nbrs[e.i].append((e.j, e.distance))
            nbrs[e.j].append((e.i, e.distance))
        object.__setattr__(self, "_neighbors", tuple(tuple(n) for n in nbrs))

    def validate(self) -> None:
        n = len(self.atoms)
        if n > MAX_ATOMS:
            raise DatasetError(f"{self.id}: {n} atoms exceeds the {MAX_ATOMS}-node budget")
        seen = set()
        for e in self.edges:
            if e.i == e.j:
                raise DatasetError(f"{self.id}: self-loop on atom {e.i}")
            if not (0 <= e.i < n and 0 <= e.j < n):
                raise DatasetError(f"{self.id}: edge ({e.i}, {e.j}) references a missing atom")
            if not e.distance > 0:
                raise DatasetError(f"{self.id}: edge ({e.i}, {e.j}) has non-positive distance")
            key = (min(e.i, e.j), max(e.i, e.j))
            if key in seen:
                raise DatasetError(f"{self.id}: duplicate edge {key}")
            seen.add(key)
            d = _dist(self.atoms[e.i].position, self.atoms[e.j].position)
            if abs(d - e.distance) > POSITION_TOL:
                raise DatasetError(
                    f"{self.id}: edge {key} distance {e.distance} disagrees with positions ({d})"
                )

    @property
    def positions(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms], dtype=float).reshape(-1, 3)

    @property
    def elements(self) -> np.ndarray:
        return np.array([a.element for a in self.atoms], dtype=np.int64)

    def neighbors(self, i: int) -> tuple[tuple[int, float], ...]:
        """``(j, distance)`` pairs for atom ``i``."""
        if not 0 <= i < len(self.atoms):
            raise IndexError(f"{self.id}: atom index {i} out of range")
        return self._neighbors[i]

    def translated(self, delta) -> "MoleculeGraph":
        dx, dy, dz = (float(v) for v in delta)
        atoms = [Atom(a.element, (a.position[0] + dx, a.position[1] + dy, a.position[2] + dz))
                 for a in self.atoms]
        return MoleculeGraph(self.id, atoms, self.edges, self.bandgap)

    def relabeled(self, order) -> "MoleculeGraph":
        """Same molecule with atom ``order[k]`` moved to index ``k``."""
        order = list(order)
        inv = {old: new for new, old in enumerate(order)}
        atoms = [self.atoms[k] for k in order]
        edges = [Edge(inv[e.i], inv[e.j], e.distance) for e in self.edges]
        return MoleculeGraph(self.id, atoms, edges, self.bandgap)


def _dist(p, q) -> float:
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))


def build_edges(atoms, cutoff: float = DEFAULT_CUTOFF) -> list[Edge]:
    """All unordered atom pairs within ``cutoff`` angstrom, each pair once, ordered by (i, j)."""
    if not cutoff > 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    if len(atoms) < 2:
        return []
    pos = np.array([a.position for a in atoms], dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    ii, jj = np.triu_indices(len(atoms), k=1)
    keep = dist[ii, jj] <= cutoff
    return [Edge(int(i), int(j), float(dist[i, j])) for i, j in zip(ii[keep], jj[keep])]


def normalize_weights(g: MoleculeGraph, scale: float = DISTANCE_SCALE) -> dict[tuple[int, int], float]:
    """Edge distances mapped onto [0, 1] by a fixed global scale, clamped.

    A fixed scale keeps identical bonds identical across molecules, which
    per-graph min-max scaling would not.
    """
    if not g.edges:
        raise ValueError(f"{g.id}: no edges to normalize")
    return {(e.i, e.j): min(max(e.distance / scale, 0.0), 1.0) for e in g.edges}


# --------------------------------------------------------------------------
# JSON I/O
# --------------------------------------------------------------------------

def _record_to_graph(rec, index: int, cutoff: float) -> MoleculeGraph:
    if not isinstance(rec, dict):
        raise DatasetError(f"record {index}: expected an object")
    rid = rec.get("id")
    if not isinstance(rid, str):
        raise DatasetError(f"record {index}: missing string 'id'")
    raw_atoms = rec.get("atoms")
    if not isinstance(raw_atoms, list) or not raw_atoms:
        raise DatasetError(f"{rid}: 'atoms' must be a non-empty list")
    if len(raw_atoms) > MAX_ATOMS:
        raise DatasetError(f"{rid}: {len(raw_atoms)} atoms exceeds the {MAX_ATOMS}-node budget")
    atoms = []
    for k, a in enumerate(raw_atoms):
        if not isinstance(a, dict) or "element" not in a or "pos" not in a:
            raise DatasetError(f"{rid}: atom {k} needs 'element' and 'pos'")
        el, pos = a["element"], a["pos"]
        if isinstance(el, bool) or not isinstance(el, int):
            raise DatasetError(f"{rid}: atom {k} element must be an integer")
        if (not isinstance(pos, list) or len(pos) != 3
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in pos)):
            raise DatasetError(f"{rid}: atom {k} 'pos' must be three numbers")
        if not all(math.isfinite(c) for c in pos):
            raise DatasetError(f"{rid}: atom {k} has a non-finite coordinate")
        try:
            atoms.append(Atom(el, tuple(float(c) for c in pos)))
        except DatasetError as exc:
            raise DatasetError(f"{rid}: atom {k}: {exc}") from None
    if "edges" in rec and rec["edges"] is not None:
        edges = []
        for e in rec["edges"]:
            if not isinstance(e, list) or len(e) != 3:
                raise DatasetError(f"{rid}: edges must be [i, j, distance] triples")
            edges.append(Edge(int(e[0]), int(e[1]), float(e[2])))
    else:
        edges = build_edges(atoms, cutoff)
    bandgap = rec.get("bandgap")
    if bandgap is not None:
        if isinstance(bandgap, bool) or not isinstance(bandgap, (int, float)):
            raise DatasetError(f"{rid}: 'bandgap' must be a number")
        bandgap = float(bandgap)
    try:
        return MoleculeGraph(rid, atoms, edges, bandgap)
    except DatasetError as exc:
        msg = str(exc)
        raise DatasetError(msg if msg.startswith(rid) else f"{rid}: {msg}") from None


def load_dataset(path, cutoff: float = DEFAULT_CUTOFF) -> list[MoleculeGraph]:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise DatasetError(f"{path}: top level must be a JSON array")
    return [_record_to_graph(rec, k, cutoff) for k, rec in enumerate(data)]


def graph_to_record(g: MoleculeGraph) -> dict:
    rec = {
        "id": g.id,
        "atoms": [{"element": a.element, "pos": list(a.position)} for a in g.atoms],
        "edges": [[e.i, e.j, e.distance] for e in g.edges],
    }
    if g.bandgap is not None:
        rec["bandgap"] = g.bandgap
    return rec


def save_dataset(graphs, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump([graph_to_record(g) for g in graphs], f, indent=1)
        f.write("\n")


# --------------------------------------------------------------------------
# Synthetic data
# --------------------------------------------------------------------------

# Pauling electronegativity and covalent radius (angstrom) of the elements
# the generator draws from.
ELECTRONEGATIVITY = {3: 0.98, 8: 3.44, 9: 3.98, 14: 1.90, 26: 1.83, 82: 2.33}
COVALENT_RADIUS = {3: 1.28, 8: 0.66, 9: 0.57, 14: 1.11, 26: 1.32, 82: 1.46}

_FCC = ((0.0, 0.0, 0.0), (0.5, 0.5, 0.0), (0.5, 0.0, 0.5), (0.0, 0.5, 0.5))
_FCC_TETRA = tuple((x, y, z) for x in (0.25, 0.75) for y in (0.25, 0.75) for z in (0.25, 0.75))
# Cubic prototype cells: (sublattices in fractional coordinates, the two
# sublattices forming the nearest-neighbour bond, that bond length in units
# of the lattice constant). Each sublattice receives one species.
PROTOTYPES = {
    "bcc": ((((0.0, 0.0, 0.0), (0.5, 0.5, 0.5)),), (0, 0), math.sqrt(3) / 2),
    "cscl": ((((0.0, 0.0, 0.0),), ((0.5, 0.5, 0.5),)), (0, 1), math.sqrt(3) / 2),
    "fcc": ((_FCC,), (0, 0), math.sqrt(2) / 2),
    "fluorite": ((_FCC, _FCC_TETRA), (0, 1), math.sqrt(3) / 4),
    "nacl": ((_FCC, ((0.5, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 0.5), (0.5, 0.5, 0.5))), (0, 1), 0.5),
    "perovskite": ((((0.0, 0.0, 0.0),), ((0.5, 0.5, 0.5),), ((0.5, 0.5, 0.0), (0.5, 0.0, 0.5), (0.0, 0.5, 0.5))),
                   (1, 2), 0.5),
    "zincblende": ((_FCC, tuple((x + 0.25, y + 0.25, z + 0.25) for x, y, z in _FCC)), (0, 1), math.sqrt(3) / 4),
}
BOX = 6.0
LATTICE_RANGE = (3.2, BOX)
LATTICE_NOISE = 0.03   # relative
JITTER = 0.05          # angstrom
VACANCY_RATE = 0.1
# The label is 0 with probability sigmoid((GATE_CENTER - raw) / GATE_WIDTH).
# GATE_CENTER is the median raw gap of this generator (measured over 20000
# draws), which puts about half the labels at exactly zero.
GATE_CENTER = 3.10
GATE_WIDTH = 0.15


def synthetic_bandgap_raw(elements, positions) -> float:
    """Smooth gap model in eV: ionicity drives it up, long bonds push it up.

    ``ionicity`` is the composition-weighted spread of electronegativity
    (twice the mean absolute deviation from the mean); ``bond`` is the mean
    nearest-neighbour distance in angstrom.
    """
    chi = np.array([ELECTRONEGATIVITY[int(e)] for e in elements])
    ionicity = 2.0 * float(np.mean(np.abs(chi - chi.mean())))
    pos = np.asarray(positions, dtype=float)
    d = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, np.inf)
    bond = float(np.mean(d.min(axis=1)))
    return 2.0 * ionicity + 1.5 * math.tanh(bond - 2.5) + 1.5


def gen_synthetic(rng: np.random.Generator, n: int, max_atoms: int = 12) -> list[MoleculeGraph]:
    """Jittered cubic prototype cells with a synthetic bandgap label.

    Each record picks a prototype that fits in ``max_atoms`` and a distinct
    species per sublattice. The lattice constant makes the nearest-neighbour
    bond equal the sum of covalent radii (times 1 + N(0, 0.03)), clipped to
    [3.2, 6.0] angstrom so the cell fits a 6 angstrom box. Sites are vacated
    with probability 0.1 (at least two atoms survive) and every atom is
    jittered by N(0, 0.05) angstrom. The label is
    :func:`synthetic_bandgap_raw`, forced to exactly 0 by a soft Bernoulli
    gate that fires for low gaps.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 2 <= max_atoms <= MAX_ATOMS:
        raise ValueError(f"max_atoms must be in 2..{MAX_ATOMS}")
    palette = np.array(sorted(ELECTRONEGATIVITY))
    names = [k for k in sorted(PROTOTYPES) if sum(map(len, PROTOTYPES[k][0])) <= max_atoms]
    graphs = []
    for k in range(n):
        sublattices, (s0, s1), nn_factor = PROTOTYPES[names[rng.integers(len(names))]]
        species = rng.choice(palette, size=len(sublattices), replace=False)
        bond = COVALENT_RADIUS[int(species[s0])] + COVALENT_RADIUS[int(species[s1])]
        a = bond / nn_factor * (1.0 + rng.normal(0.0, LATTICE_NOISE))
        a = float(np.clip(a, *LATTICE_RANGE))
        elements, frac = [], []
        for sp, sites in zip(species, sublattices):
            elements += [int(sp)] * len(sites)
            frac += sites
        elements = np.array(elements)
        pos = np.array(frac) * a
        keep = rng.random(len(elements)) >= VACANCY_RATE
        if keep.sum() < 2:
            keep[:] = True
        elements, pos = elements[keep], pos[keep]
        pos = pos + rng.normal(0.0, JITTER, size=pos.shape)
        raw = synthetic_bandgap_raw(elements, pos)
        p_metal = float(expit((GATE_CENTER - raw) / GATE_WIDTH))
        gap = 0.0 if rng.random() < p_metal else raw
        atoms = [Atom(int(e), tuple(float(c) for c in p)) for e, p in zip(elements, pos)]
        graphs.append(MoleculeGraph(f"syn-{k:04d}", atoms, build_edges(atoms), round(gap, 6)))
    return graphs
