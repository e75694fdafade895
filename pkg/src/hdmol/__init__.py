"""Hypervector and reservoir encoders for atomic structure graphs."""

from .structures import Atom, Edge, MoleculeGraph, build_edges, gen_synthetic, load_dataset, save_dataset

__all__ = ["Atom", "Edge", "MoleculeGraph", "build_edges", "gen_synthetic", "load_dataset", "save_dataset"]
__version__ = "0.1.0"
