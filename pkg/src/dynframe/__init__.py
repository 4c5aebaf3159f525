"""Frames generated by commuting operators: orbit frames of semigroup
representations, their commutants and model spaces, and dynamical sampling."""

__version__ = "0.1.0"

from .dynamical import OperatorTuple, classify_orbit, orbit_frame, random_commuting_tuple, tail_mass
from .frames import Frame, canonical_dual, frame_bounds, frames_equivalent, reconstruct
from .semigroup import FiniteAbelian, FreeAbelian, NumericalSG, Product, Window, enumerate_window

__all__ = [
    "Frame",
    "FiniteAbelian",
    "FreeAbelian",
    "NumericalSG",
    "OperatorTuple",
    "Product",
    "Window",
    "canonical_dual",
    "classify_orbit",
    "enumerate_window",
    "frame_bounds",
    "frames_equivalent",
    "orbit_frame",
    "random_commuting_tuple",
    "reconstruct",
    "tail_mass",
]
