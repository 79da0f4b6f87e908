"""Collective dissipation and cross-talk of two probes coupled to a harmonic crystal."""

__version__ = "0.1.0"

from crosstalk.correlation import (CorrelationMap, CorrelationProfile, axis_profile, correlation,
                                   correlation_length, correlation_map, contour_radius,
                                   decay_distance)
from crosstalk.damping import (BROADENED_GRID, FINITE_TIME, MANIFOLD, Contact, CrossTalkProfile,
                               DampingMatrix, ProbeConfig, analytic_isotropic,
                               analytic_special_2d, crosstalk_finite_time, crosstalk_long_time,
                               gamma_finite_time, gamma_long_time, lamb_shift,
                               lamb_shift_long_time, resonant_wavenumber, suggest_grid)
from crosstalk.disorder import (DisorderedChain, EigenmodeBasis, EnsembleEnvelope, EnsembleParams,
                                build_chain, cross_talk_disordered, diagonalize, ensemble_envelope,
                                is_non_increasing)
from crosstalk.dynamics import (EvolutionGenerators, GaussianState, build_generators, evolve,
                                log_negativity, steady_state, survival_scan, trajectory)
from crosstalk.errors import (CrosstalkError, DegenerateManifoldWarning, DomainError,
                              EigensolverError, IllConditionedWarning, InvalidCoefficientsError,
                              InvariantViolation, OutOfBandError, ResolutionError, StepSizeError,
                              WeakCouplingWarning)
from crosstalk.lattice import (CUBIC, TRIANGULAR, IsoFrequencyManifold, LatticeSpec, bz_domain,
                               critical_frequencies, dispersion, group_velocity,
                               resonant_manifold)
