"""SSP-GrapHD: spatial semantic pointers bound to neighbourhood objects.

For atom i at position p_i::

    S_i   = X^(x/l) (*) Y^(y/l) (*) Z^(z/l)
    NM_i  = normalize(sum_j H[element_j])          (unweighted neighbours)
    OBJ_i = H[element_i] (*) NM_i                  (H[element_i] if isolated)
    G     = 1/2 * sum_i OBJ_i (*) S_i

(*) is circular convolution and every H here is a unitary vector, sampled
independently of the MAP codebook. Atoms and neighbours are summed in
(element, x, y, z) order so the result does not depend on atom order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import vsa
from .structures import N_ELEMENTS, MoleculeGraph


@dataclass(frozen=True)
class AxisBasis:
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    length_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        # phases of the axis spectra, reused for every position
        phases = np.stack([np.angle(vsa.spectrum(a)) for a in (self.X, self.Y, self.Z)])
        object.__setattr__(self, "_phases", phases)

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    def position_spectrum(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise ValueError(f"position must be 3 finite coordinates, got {p!r}")
        return np.exp(1j * ((p / self.length_scale) @ self._phases))


@dataclass(frozen=True)
class SspElementCodebook:
    H: np.ndarray          # (N_ELEMENTS + 1, D) unitary rows; row 0 unused
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "_spectra", np.fft.rfft(self.H, axis=1))

    @property
    def dim(self) -> int:
        return self.H.shape[1]


def make_basis(seed: int, dim: int = vsa.DEFAULT_DIM, length_scale: float = 1.0) -> AxisBasis:
    rng = vsa.make_rng(seed, vsa.STREAM_SSP_BASIS)
    X, Y, Z = (vsa.sample_unitary(rng, dim) for _ in range(3))
    return AxisBasis(X, Y, Z, length_scale, seed)


def make_codebook(seed: int, dim: int = vsa.DEFAULT_DIM) -> SspElementCodebook:
    rng = vsa.make_rng(seed, vsa.STREAM_SSP_CODEBOOK)
    H = np.zeros((N_ELEMENTS + 1, dim))
    for z in range(1, N_ELEMENTS + 1):
        H[z] = vsa.sample_unitary(rng, dim)
    return SspElementCodebook(H, seed)


def encode_position(p, basis: AxisBasis) -> np.ndarray:
    return np.fft.irfft(basis.position_spectrum(p), n=basis.dim)


def encode_spatial_memory(objs, basis: AxisBasis) -> np.ndarray:
    """Sum of ``obj (*) S(position)`` over ``(obj, position)`` pairs, not renormalised."""
    objs = list(objs)
    if not objs:
        raise ValueError("spatial memory needs at least one object")
    acc = np.zeros(basis.dim // 2 + 1, dtype=complex)
    for obj, pos in objs:
        acc += vsa.spectrum(obj) * basis.position_spectrum(pos)
    return np.fft.irfft(acc, n=basis.dim)


def _atom_key(g: MoleculeGraph, i: int):
    a = g.atoms[i]
    return (a.element, *a.position)


def _neighbour_memory(g: MoleculeGraph, i: int, cb: SspElementCodebook) -> np.ndarray | None:
    nbrs = sorted((j for j, _ in g.neighbors(i)), key=lambda j: _atom_key(g, j))
    if not nbrs:
        return None
    nm = np.zeros(cb.dim)
    for j in nbrs:
        nm += cb.H[g.atoms[j].element]
    return nm / np.linalg.norm(nm)


def _object_spectrum(g: MoleculeGraph, i: int, cb: SspElementCodebook) -> np.ndarray:
    own = cb._spectra[g.atoms[i].element]
    nm = _neighbour_memory(g, i, cb)
    return own if nm is None else own * np.fft.rfft(nm)


def object_vector(g: MoleculeGraph, i: int, cb: SspElementCodebook) -> np.ndarray:
    if not 0 <= i < len(g.atoms):
        raise IndexError(f"{g.id}: atom index {i} out of range")
    if not g.neighbors(i):
        return cb.H[g.atoms[i].element].copy()
    return np.fft.irfft(_object_spectrum(g, i, cb), n=cb.dim)


def encode_sspgraphd(g: MoleculeGraph, cb: SspElementCodebook, basis: AxisBasis,
                     center: bool = False) -> np.ndarray:
    if not g.atoms:
        raise ValueError(f"{g.id}: cannot encode an empty graph")
    if cb.dim != basis.dim:
        raise vsa.DimensionError(f"codebook dim {cb.dim} != basis dim {basis.dim}")
    offset = g.positions.mean(axis=0) if center else np.zeros(3)
    acc = np.zeros(cb.dim // 2 + 1, dtype=complex)
    for i in sorted(range(len(g.atoms)), key=lambda i: _atom_key(g, i)):
        pos = np.asarray(g.atoms[i].position) - offset
        acc += _object_spectrum(g, i, cb) * basis.position_spectrum(pos)
    return np.fft.irfft(0.5 * acc, n=cb.dim)


def encode_dataset(graphs, cb: SspElementCodebook, basis: AxisBasis, center: bool = False) -> np.ndarray:
    return np.stack([encode_sspgraphd(g, cb, basis, center) for g in graphs])
