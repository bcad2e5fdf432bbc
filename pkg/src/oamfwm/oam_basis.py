"""Orbital-angular-momentum mode basis built from hybrid fiber modes.

An OAM mode is the combination ``(X_even +- i X_odd)/sqrt(2)`` of the two
parities of one hybrid mode.  With the real radial coefficient functions
of :mod:`oamfwm.fiber_modes` this collapses to

    E = exp(i l phi) (i A_r,  A_phi,  A_z)
    H = exp(i l phi) (  B_r, i B_phi, i B_z)

with real ``A``/``B`` functions and the total angular index
``l = charge + handedness``.  Co-rotating labels (charge and handedness
of equal sign, or charge 0) map onto HE modes of azimuthal order
``|charge| + 1``; counter-rotating labels map onto EH modes of order
``|charge| - 1``.  At ``|charge| = 1`` the counter-rotating combination
would need the TE/TM pair, whose propagation constants differ, so no
stable mode of that label exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateFlux, UnstableMode
from .fiber_modes import (DispersionPoint, FiberSpec, ModeFamily, ModeLabel,
                          Parity, RadialProfile, coefficients_grid,
                          solve_mode)

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class OamLabel:
    """OAM mode label: signed topological charge and SAM handedness.

    ``charge`` is the signed orbital index (0 allowed), ``handedness``
    the circular-polarization sign (+1 or -1).  ``radial`` indexes the
    radial order of the underlying hybrid mode.

    Raises:
        UnstableMode: counter-rotating labels with ``|charge| == 1`` do
            not form a propagating mode and are rejected here.
    """

    charge: int
    handedness: int
    radial: int = 1

    def __post_init__(self):
        if self.handedness not in (-1, 1):
            raise ValueError("handedness must be +1 or -1")
        if self.radial < 1:
            raise ValueError("radial index must be >= 1")
        if abs(self.charge) == 1 and not self.is_co_rotating:
            raise UnstableMode(
                "counter-rotating |charge| = 1 labels mix TE/TM modes of "
                "unequal propagation constants and do not propagate")

    @property
    def is_co_rotating(self) -> bool:
        return self.charge == 0 or (self.charge > 0) == (self.handedness > 0)

    @property
    def total_angular_index(self) -> int:
        """Azimuthal exponent l of exp(i l phi), = charge + handedness."""
        return self.charge + self.handedness


def azimuthal_phase_charge(label: OamLabel) -> int:
    return label.total_angular_index


def hybrid_partner(label: OamLabel) -> ModeLabel:
    """Hybrid mode whose two parities synthesize this OAM label."""
    order = abs(label.total_angular_index)
    family = ModeFamily.HE if label.is_co_rotating else ModeFamily.EH
    return ModeLabel(family, order, label.radial, Parity.EVEN)


@dataclass(frozen=True)
class OamProfile:
    """Flux-normalized OAM mode profile.

    ``components(r)`` returns the six real radial functions
    ``(A_r, A_phi, A_z, B_r, B_phi, B_z)`` of the assembly quoted in the
    module docstring.
    """

    ell: int
    base: RadialProfile
    branch: int
    weight: float

    def components(self, r: np.ndarray):
        a_r, a_phi, a_z, b_r, b_phi, b_z = self.base.coefficients(r)
        w, sg = self.weight, self.branch
        return (w * a_r, w * sg * a_phi, w * a_z,
                w * sg * b_r, w * b_phi, -w * sg * b_z)


@lru_cache(maxsize=None)
def oam_profile(fiber: FiberSpec, label: OamLabel, omega: float) -> OamProfile:
    """Construct the normalized OAM profile of a stable label."""
    hybrid = hybrid_partner(label)
    point = solve_mode(fiber, hybrid, omega)
    base = RadialProfile(fiber, hybrid, point).normalized()
    ell = label.total_angular_index
    return OamProfile(ell=ell, base=base, branch=1 if ell >= 0 else -1,
                      weight=1.0 / _SQRT2)


def oam_profile_from_point(fiber: FiberSpec, label: OamLabel,
                           point: DispersionPoint) -> OamProfile:
    """Normalized OAM profile from a pre-solved dispersion point.

    Grid sweeps solve dispersion by continuation and must bypass the
    per-frequency cache of :func:`oam_profile`.
    """
    hybrid = hybrid_partner(label)
    base = RadialProfile(fiber, hybrid, point).normalized()
    ell = label.total_angular_index
    return OamProfile(ell=ell, base=base, branch=1 if ell >= 0 else -1,
                      weight=1.0 / _SQRT2)


@lru_cache(maxsize=None)
def counter_rotating_slot_profile(fiber: FiberSpec, charge: int,
                                  omega: float) -> OamProfile:
    """Transverse-magnetic constituent standing in for the unstable slot.

    A counter-rotating ``|charge| = 1`` label has no propagating mode; in
    instantaneous-generation overlaps its place is taken by the TM(0,1)
    profile at full weight, with total angular index 0.
    """
    if abs(charge) != 1:
        raise UnstableMode("slot profile only exists for |charge| == 1")
    tm = ModeLabel(ModeFamily.TM, 0, 1, Parity.EVEN)
    point = solve_mode(fiber, tm, omega)
    base = RadialProfile(fiber, tm, point).normalized()
    return OamProfile(ell=0, base=base, branch=1, weight=1.0)


def slot_profile_from_point(fiber: FiberSpec, charge: int,
                            point: DispersionPoint) -> OamProfile:
    """Slot profile from a pre-solved TM(0,1) dispersion point."""
    if abs(charge) != 1:
        raise UnstableMode("slot profile only exists for |charge| == 1")
    tm = ModeLabel(ModeFamily.TM, 0, 1, Parity.EVEN)
    base = RadialProfile(fiber, tm, point).normalized()
    return OamProfile(ell=0, base=base, branch=1, weight=1.0)


def _row_flux_scale(label: ModeLabel, comps, nodes: np.ndarray,
                    weights: np.ndarray) -> np.ndarray:
    a_r, a_phi, _, b_r, b_phi, _ = comps
    angular = math.pi if label.azimuthal >= 1 else 2.0 * math.pi
    flux = 2.0 * angular * np.sum((a_r * b_phi - a_phi * b_r)
                                  * (weights * nodes), axis=1)
    if not np.all(flux > 1e-300):
        raise DegenerateFlux(
            f"mode {label} carries no forward power on the shared grid")
    return (1.0 / np.sqrt(flux))[:, None]


def oam_profile_rows(fiber: FiberSpec, label: OamLabel, points,
                     nodes: np.ndarray, weights: np.ndarray):
    """Normalized OAM components over many dispersion points at once.

    The flux of every row is measured on the supplied radial quadrature,
    so all modes of a sweep share one node set; each row then matches
    ``oam_profile_from_point(...).components(nodes)`` to rounding error.
    Returns ``(ell, (A_r, A_phi, A_z, B_r, B_phi, B_z))`` with arrays of
    shape ``(len(points), nodes.size)``.
    """
    hybrid = hybrid_partner(label)
    comps = coefficients_grid(fiber, hybrid, points, nodes)
    scale = _row_flux_scale(hybrid, comps, nodes, weights)
    ell = label.total_angular_index
    sg = 1.0 if ell >= 0 else -1.0
    w = scale / _SQRT2
    return ell, (w * comps[0], w * sg * comps[1], w * comps[2],
                 w * sg * comps[3], w * comps[4], -w * sg * comps[5])


def slot_profile_rows(fiber: FiberSpec, charge: int, points,
                      nodes: np.ndarray, weights: np.ndarray):
    """TM(0,1) stand-in rows for the unstable counter-rotating slots."""
    if abs(charge) != 1:
        raise UnstableMode("slot profile only exists for |charge| == 1")
    tm = ModeLabel(ModeFamily.TM, 0, 1, Parity.EVEN)
    comps = coefficients_grid(fiber, tm, points, nodes)
    scale = _row_flux_scale(tm, comps, nodes, weights)
    return 0, tuple(scale * c for c in comps)


def cross_flux(fiber: FiberSpec, first: OamLabel, second: OamLabel,
               omega: float, radii: np.ndarray,
               weights: np.ndarray) -> complex:
    """Poynting-type overlap of two OAM modes on a shared radial grid.

    Zero (to quadrature accuracy) whenever the labels differ; used by the
    orthogonality tests.
    """
    p1 = oam_profile(fiber, first, omega)
    p2 = oam_profile(fiber, second, omega)
    if p1.ell != p2.ell:
        return 0.0 + 0.0j
    a_r1, a_phi1, _, b_r1, b_phi1, _ = p1.components(radii)
    a_r2, a_phi2, _, b_r2, b_phi2, _ = p2.components(radii)
    # (E1 x H2* + E2* x H1)_z with the assembly phases folded in.
    integrand = (a_r1 * b_phi2 - a_phi1 * b_r2
                 + a_r2 * b_phi1 - a_phi2 * b_r1) * radii
    return complex(2.0 * math.pi * np.sum(weights * integrand))
