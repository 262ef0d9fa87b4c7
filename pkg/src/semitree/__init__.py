"""Harmonic analysis of spherical functions on semi-homogeneous trees."""

from .tree import TreeError, TreeParams, TruncatedTree, distance, sphere_size
from .automorphisms import Isometry, apply, path_reversal, radialize
from .spherical import classify, eval_spherical, p_polynomial, q_polynomial, spherical_zero
from .radial_algebra import RadialSeq, convolve, convolve_radial, functional_L, involution, mu_n
from .posdef import gram_matrix, is_positive_definite, matrix_coefficient_check
from .spectra import atom_at_zero, spectrum_report
from .walk import eigen_martingale_check, exact_distribution, simulate

__all__ = [
    "Isometry",
    "RadialSeq",
    "TreeError",
    "TreeParams",
    "TruncatedTree",
    "apply",
    "atom_at_zero",
    "classify",
    "convolve",
    "convolve_radial",
    "distance",
    "eigen_martingale_check",
    "eval_spherical",
    "exact_distribution",
    "functional_L",
    "gram_matrix",
    "involution",
    "is_positive_definite",
    "matrix_coefficient_check",
    "mu_n",
    "p_polynomial",
    "path_reversal",
    "q_polynomial",
    "radialize",
    "simulate",
    "spectrum_report",
    "sphere_size",
    "spherical_zero",
]
