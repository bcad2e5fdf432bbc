"""Photon-pair generation in helically corrugated step-index fibers.

Exact vector modes of a cylindrical step-index fiber, their
orbital-angular-momentum superpositions, four-wave-mixing overlap
integrals, helical-grating mode coupling, the coupled-envelope
solutions, and the resulting joint spectral amplitudes of the
generated photon pairs.
"""

__version__ = "0.1.0"

from .config import (GridSpec, OutputSpec, QuadratureSpec, RunConfig, load,
                     validate)
from .coupled_modes import (EnvelopeFamily, EnvelopeParams,
                            EnvelopeSolution, SampledEnvelopes,
                            envelope_components, envelopes, ode_oracle)
from .errors import (BranchAmbiguity, ComputeError, ConfigInvalid,
                     DegenerateDispersion, DegenerateFlux,
                     DirectionMismatch, ForbiddenChannel, GridTooNarrow,
                     NoRootInWindow, NotGuided, OamFwmError, UnstableMode)
from .fiber_modes import (DispersionPoint, FiberSpec, ModeFamily, ModeLabel,
                          Parity, RadialProfile, dispersion_grid,
                          guided_labels, omega_from_wavelength,
                          poynting_flux, solve_mode, solve_mode_grid,
                          v_parameter, wavelength_from_omega)
from .grating import (CouplingPoint, CouplingSpectrum, GratingSpec,
                      PhotonRole, coupling_allowed, coupling_constant,
                      coupling_spectrum, detunings, exact_momentum_detuning,
                      resonant_period)
from .jsa import (JsaGrid, PeakSet, PrefactorConvention, PumpConfig,
                  bell_fidelity, dominant_peaks, jsa_full,
                  jsa_ideal_components, jsa_no_grating, pair_ratio,
                  peak_positions)
from .oam_basis import (OamLabel, OamProfile, azimuthal_phase_charge,
                        counter_rotating_slot_profile, cross_flux,
                        hybrid_partner, oam_profile)
from .overlap import (CONSTITUENT_POWER_SCALE, Chi3Tensor, FwmChannel,
                      OverlapFamily, angular_momentum_allowed, fwm_overlap,
                      fwm_overlap_signed, mirror_family, overlap_table)
