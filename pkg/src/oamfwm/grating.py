"""Helical transmission gratings coupling co-propagating OAM modes.

A grating is a weak permittivity corrugation
``d_eps = perturbation * cos(2 pi z / period - m_g phi)`` confined to
the core.  Its ``+m_g`` helix component converts a mode of total
angular index ``ell`` into ``ell + m_g`` while lowering the wavenumber
by ``2 pi / period``; the conjugate component does the reverse.  The
coupling constant is the core overlap of the two flux-normalized
profiles, so ``kappa(from, to) == kappa(to, from)`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateDispersion, DirectionMismatch, ForbiddenChannel
from .fiber_modes import (FiberSpec, SPEED_OF_LIGHT, _radial_quadrature,
                          solve_mode, solve_mode_grid)
from .numerics import kronrod_panels
from .oam_basis import (OamLabel, hybrid_partner, oam_profile,
                        oam_profile_rows)

_CORE_PANELS = 16


class PhotonRole(Enum):
    """Which photon of the generated pair a grating acts on."""

    SIGNAL = "signal"
    IDLER = "idler"


def coupling_allowed(m: int, sigma: int, m_prime: int, sigma_prime: int,
                     m_g: int) -> bool:
    """Azimuthal selection rule of a charge ``m_g`` grating.

    Equivalent to ``ell_to == ell_from + m_g`` on total angular
    indices, which splits into three cases: same handedness needs
    ``m' = m + m_g``; a flip from - to + needs ``m' = m + m_g - 2``;
    a flip from + to - needs ``m' = m + m_g + 2``.  This is pure
    arithmetic on signed charges; whether the labels are stable is
    enforced by :class:`~oamfwm.oam_basis.OamLabel` itself.
    """
    return m_prime + sigma_prime == m + sigma + m_g


@dataclass(frozen=True)
class GratingSpec:
    """One helical grating and the resonance it was designed for.

    ``source`` and ``converted`` fix the orientation: the grating is
    meant to convert ``source`` into ``converted`` (total angular index
    raised by ``topological_charge``) at frequency ``resonance_omega``.
    ``period`` is stored separately so deliberately detuned gratings
    can be described.
    """

    topological_charge: int
    period: float
    perturbation: float
    target_photon: PhotonRole
    source: OamLabel
    converted: OamLabel
    resonance_omega: float

    def __post_init__(self) -> None:
        if self.topological_charge == 0:
            raise ValueError("grating charge must be nonzero")
        if not self.period > 0:
            raise ValueError("grating period must be positive")
        if not self.perturbation > 0:
            raise ValueError("grating perturbation must be positive")
        if not self.resonance_omega > 0:
            raise ValueError("resonance frequency must be positive")
        shift = (self.converted.total_angular_index
                 - self.source.total_angular_index)
        if shift != self.topological_charge:
            raise ValueError(
                f"grating charge {self.topological_charge} cannot convert "
                f"{self.source} into {self.converted} (index shift {shift})")

    @property
    def wavevector(self) -> float:
        """Magnitude ``2 pi / period`` in 1/m."""
        return 2.0 * math.pi / self.period

    @classmethod
    def resonant(cls, fiber: FiberSpec, source: OamLabel,
                 converted: OamLabel, omega: float, perturbation: float,
                 photon: PhotonRole) -> "GratingSpec":
        """Grating whose period exactly phase-matches a conversion."""
        charge = converted.total_angular_index - source.total_angular_index
        period = resonant_period(fiber, source, converted, omega)
        return cls(topological_charge=charge, period=period,
                   perturbation=perturbation, target_photon=photon,
                   source=source, converted=converted,
                   resonance_omega=omega)


@dataclass(frozen=True)
class CouplingPoint:
    """Coupled-mode parameters of one conversion at one frequency."""

    kappa: complex
    delta: float
    d: float

    @property
    def gamma(self) -> float:
        return math.hypot(self.d, abs(self.kappa))


@dataclass(frozen=True)
class CouplingSpectrum:
    """Coupling constant and exact momentum detuning along a grid.

    ``k_source`` and ``k_converted`` are the wavenumbers of the two
    coupled modes, exposed because downstream spectral sums need them
    at exactly the same frequencies.
    """

    omegas: np.ndarray
    kappa: np.ndarray
    detuning: np.ndarray
    k_source: np.ndarray
    k_converted: np.ndarray


def resonant_period(fiber: FiberSpec, from_label: OamLabel,
                    to_label: OamLabel, omega_t: float) -> float:
    """Period that phase-matches ``from -> to`` at ``omega_t``."""
    k_from = solve_mode(fiber, hybrid_partner(from_label), omega_t).beta
    k_to = solve_mode(fiber, hybrid_partner(to_label), omega_t).beta
    mismatch = abs(k_to - k_from)
    if mismatch <= 1e-9 * max(k_from, k_to):
        raise DegenerateDispersion(
            f"{from_label} and {to_label} have equal wavenumbers at "
            f"omega={omega_t:g}; no finite grating period exists")
    return 2.0 * math.pi / mismatch


def _effective_wavevector(grating: GratingSpec, ell_from: int,
                          ell_to: int) -> float:
    """Signed wavevector the driving helix component adds to ``k_from``.

    Phase matching reads ``k_to = k_from + K``; conversions that raise
    the angular index by the grating charge lower the wavenumber, so
    for them ``K = -2 pi / period``.
    """
    shift = ell_to - ell_from
    if abs(shift) != abs(grating.topological_charge):
        raise ForbiddenChannel(
            f"grating charge {grating.topological_charge} does not couple "
            f"angular indices {ell_from} -> {ell_to}")
    sign = -1.0 if shift == grating.topological_charge else 1.0
    return sign * grating.wavevector


def _check_direction(grating: GratingSpec, k_signed: float, k_from: float,
                     k_to: float) -> None:
    if k_signed * (k_to - k_from) < 0:
        raise DirectionMismatch(
            "conversion phase-matches only for counter-propagating modes "
            f"under grating charge {grating.topological_charge}")


def _core_overlap(prof_from, prof_to, nodes: np.ndarray,
                  weights: np.ndarray) -> float:
    a_r1, a_phi1, a_z1, *_ = prof_from.components(nodes)
    a_r2, a_phi2, a_z2, *_ = prof_to.components(nodes)
    integrand = a_r1 * a_r2 + a_phi1 * a_phi2 + a_z1 * a_z2
    return 2.0 * math.pi * float(np.sum(weights * nodes * integrand))


def _kappa_prefactor(grating: GratingSpec, omega: float, k_from: float,
                     k_to: float) -> float:
    k0 = omega / SPEED_OF_LIGHT
    k_mean = math.sqrt(k_from * k_to)
    return grating.perturbation * k0 * k0 / (4.0 * k_mean)


def coupling_constant(fiber: FiberSpec, grating: GratingSpec,
                      from_label: OamLabel, to_label: OamLabel,
                      omega: float) -> complex:
    """Coupling constant of one conversion at one frequency, in 1/m.

    Exactly zero when the azimuthal selection rule fails.  Raises
    :class:`DirectionMismatch` when the pair could only phase-match
    with counter-propagating modes, i.e. when the helix orientation
    that matches the angular indices raises the wavenumber of a
    conversion that lowers it (or vice versa).
    """
    shift = to_label.total_angular_index - from_label.total_angular_index
    if abs(shift) != abs(grating.topological_charge):
        return 0.0 + 0.0j
    k_eff = _effective_wavevector(grating, from_label.total_angular_index,
                                  to_label.total_angular_index)
    prof_from = oam_profile(fiber, from_label, omega)
    prof_to = oam_profile(fiber, to_label, omega)
    k_from = prof_from.base.point.beta
    k_to = prof_to.base.point.beta
    _check_direction(grating, k_eff, k_from, k_to)
    nodes, weights = kronrod_panels(1e-12, 1.0, _CORE_PANELS)
    overlap = _core_overlap(prof_from, prof_to, nodes, weights)
    return complex(_kappa_prefactor(grating, omega, k_from, k_to) * overlap)


def detunings(fiber: FiberSpec, grating: GratingSpec, from_label: OamLabel,
              to_label: OamLabel, omega: float) -> CouplingPoint:
    """Coupled-mode parameters (kappa, delta, d) at one frequency.

    ``delta`` is the frequency detuning ``resonance_omega - omega``;
    ``d`` is the momentum detuning
    ``2d = delta (1/v_to - 1/v_from) + K + k_from - k_to`` with the
    dispersion evaluated at ``omega`` and ``K`` the signed grating
    wavevector of the matching helix component.
    """
    k_eff = _effective_wavevector(grating, from_label.total_angular_index,
                                  to_label.total_angular_index)
    pt_from = solve_mode(fiber, hybrid_partner(from_label), omega)
    pt_to = solve_mode(fiber, hybrid_partner(to_label), omega)
    _check_direction(grating, k_eff, pt_from.beta, pt_to.beta)
    kappa = coupling_constant(fiber, grating, from_label, to_label, omega)
    delta = grating.resonance_omega - omega
    d = 0.5 * (delta * (1.0 / pt_to.group_velocity
                        - 1.0 / pt_from.group_velocity)
               + k_eff + pt_from.beta - pt_to.beta)
    return CouplingPoint(kappa=kappa, delta=delta, d=d)


def exact_momentum_detuning(fiber: FiberSpec, grating: GratingSpec,
                            from_label: OamLabel, to_label: OamLabel,
                            omega: float) -> float:
    """Half the exact wavenumber mismatch ``K + k_from - k_to`` at omega.

    Unlike the ``d`` of :func:`detunings` this carries no group-velocity
    linearization, so envelope solutions driven by it stay consistent
    with exact single-mode carriers as the coupling goes to zero.
    """
    k_eff = _effective_wavevector(grating, from_label.total_angular_index,
                                  to_label.total_angular_index)
    k_from = solve_mode(fiber, hybrid_partner(from_label), omega).beta
    k_to = solve_mode(fiber, hybrid_partner(to_label), omega).beta
    _check_direction(grating, k_eff, k_from, k_to)
    return 0.5 * (k_eff + k_from - k_to)


def coupling_spectrum(fiber: FiberSpec, grating: GratingSpec,
                      from_label: OamLabel, to_label: OamLabel,
                      omegas: np.ndarray) -> CouplingSpectrum:
    """Coupling constant and exact detuning along a frequency grid.

    Dispersion of both modes is tracked by continuation, making this
    the cheap path for dense spectra.
    """
    omegas = np.asarray(omegas, dtype=float)
    k_eff = _effective_wavevector(grating, from_label.total_angular_index,
                                  to_label.total_angular_index)
    pts_from = solve_mode_grid(fiber, hybrid_partner(from_label), omegas)
    pts_to = solve_mode_grid(fiber, hybrid_partner(to_label), omegas)
    k_source = np.array([p.beta for p in pts_from])
    k_converted = np.array([p.beta for p in pts_to])
    wrong_way = k_eff * (k_converted - k_source) < 0
    if np.any(wrong_way):
        i = int(np.argmax(wrong_way))
        _check_direction(grating, k_eff, k_source[i], k_converted[i])
    # flux normalization shares one full-range node set; the overlap
    # itself only samples the perturbed core, i.e. the leading columns
    w_min = min(min(p.w for p in pts_from), min(p.w for p in pts_to))
    nodes, weights = _radial_quadrature(w_min)
    core_nodes, core_weights = kronrod_panels(1e-12, 1.0, _CORE_PANELS)
    nc = core_nodes.size
    _, rows_from = oam_profile_rows(fiber, from_label, pts_from, nodes,
                                    weights)
    _, rows_to = oam_profile_rows(fiber, to_label, pts_to, nodes, weights)
    integrand = sum(rows_from[c][:, :nc] * rows_to[c][:, :nc]
                    for c in range(3))
    overlap = 2.0 * math.pi * (integrand @ (core_weights * core_nodes))
    k0 = omegas / SPEED_OF_LIGHT
    pref = grating.perturbation * k0 * k0 / (4.0 * np.sqrt(k_source
                                                           * k_converted))
    kappa = (pref * overlap).astype(complex)
    detuning = 0.5 * (k_eff + k_source - k_converted)
    return CouplingSpectrum(omegas=omegas, kappa=kappa, detuning=detuning,
                            k_source=k_source, k_converted=k_converted)
