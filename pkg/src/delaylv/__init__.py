"""Delayed predator-prey model with a juvenile prey class: simulation and analysis."""
from .dde import AgeProfile, HistoryState, Trajectory, integrate, prelude_from_pde, sample_state
from .model import (FIG1, FIG2, Equilibrium, ModelParams, PartitionLabel, classify, coexistence,
                    equilibria, imaginary_root_params, periodicity_index, thresholds, vector_field)
from .pde import PdeState, equilibrium_e2, reduce_to_dde
from .planar import PeriodicOrbit, PlanarParams, find_periodic_orbit
from .scenario import ScenarioConfig, ScenarioReport, preset, reproduce
from .spectral import QuasiPolynomial, malthusian_rate, roots_in_rectangle

__version__ = "0.1.0"
