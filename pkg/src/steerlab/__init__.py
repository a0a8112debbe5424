"""Two-photon steering testbed.

Simulation of a tunable two-qubit polarization source (post-selected
interference at a partially polarizing beam splitter) and of three steering
tests on its output: a correlation witness, the Reid inference-variance
criterion, and the Fisher-information criterion, including a simulated
finite-count phase-scan experiment with fringe fitting and error analysis.
"""

from . import _kernels, assemblage, expsim, qcore, source, validate, witnesses
from .assemblage import (
    Assemblage,
    EstimatorSpec,
    condition,
    conditional_variance,
    est_variance,
    joint_prob,
    optimize_fisher,
    optimize_variance,
    reid_lhs,
)
from .expsim import (
    FitResult,
    ScanConfig,
    ScanData,
    conditional_fisher_estimate,
    fisher_from_fit,
    fit_fringe,
    monte_carlo_errors,
    poisson_propagate,
    sample_counts,
    scan_probabilities,
)
from .qcore import AXIS_X, AXIS_Y, AXIS_Z, evolve, expectation, partial_trace, pauli, tensor, variance
from .source import PreparedState, SourceConfig, bosonic_oracle, ppbs_map, prepare
from .witnesses import WitnessReport, qfi, reid_check, s_witness, yfg_check

__version__ = "0.1.0"
