"""Geometric bounds on spectral gaps of quantum Hamiltonians.

Build sparse Hermitian operators in a computational basis, extract the
ground-state distribution, and compare vertex-expansion and conductance
bounds (plus the quasi-Markov projector picture) against exact gaps.
"""

from .hamiltonian import HamiltonianSpec, LocalTerm, SparseHermitian, build
from .spectra import SpectralSummary, GroundDistribution, eigensolve, ground_distribution
from .geometry import Subset, CutReport, cut_report, multiway_bound
from .cuts import CutSearchConfig, min_conductance, min_expansion, isolated_family
from .models import ModelInstance, parse_model

__all__ = [
    "HamiltonianSpec", "LocalTerm", "SparseHermitian", "build",
    "SpectralSummary", "GroundDistribution", "eigensolve", "ground_distribution",
    "Subset", "CutReport", "cut_report", "multiway_bound",
    "CutSearchConfig", "min_conductance", "min_expansion", "isolated_family",
    "ModelInstance", "parse_model",
]
__version__ = "0.1.0"
