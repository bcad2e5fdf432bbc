"""Transverse overlap integrals of the four-wave-mixing process.

The integrand is the isotropic chi3 contraction of two (undepleted,
co-polarized fundamental) pump profiles with the conjugated signal and
idler mode profiles.  Azimuthal integrals are done analytically by
Fourier bookkeeping: every component is a short list of
``(charge, radial coefficient)`` terms and only combinations whose
charges sum to zero survive, each contributing ``2 pi`` times a radial
quadrature.

All lengths are in units of the core radius, so the four-field overlap
values reported here carry that (1/core_radius^2) scale.

Two normalization conventions are supported for tabulated output.  The
internal one ("unit-flux") normalizes every mode, parity constituents
and OAM superpositions alike, to unit axial flux
integral (E* x H + E x H*)_z dA = 1.  The tabulated one
("constituent-power") instead normalizes each parity constituent to
unit time-averaged power (1/2) Re integral (E x H*)_z dA = 1 and
assembles OAM superpositions as HE_even + i HE_odd without the 1/sqrt2,
which rescales every four-field product by the constant
:data:`CONSTITUENT_POWER_SCALE` = 8 (a factor sqrt2 per field from the
power convention and sqrt2 per OAM field from the missing 1/sqrt2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import ComputeError, UnstableMode
from .fiber_modes import (FiberSpec, ModeFamily, ModeLabel, Parity,
                          RadialProfile, solve_mode, solve_mode_grid,
                          _radial_quadrature)
from .oam_basis import (OamLabel, OamProfile, counter_rotating_slot_profile,
                        hybrid_partner, oam_profile, oam_profile_rows,
                        slot_profile_rows)

_COMPONENTS = ("r", "phi", "z")

# Four-field rescale between the unit-flux and constituent-power
# conventions: (sqrt2)^4 from power-normalizing each field times
# (sqrt2)^2 from the unnormalized signal/idler superpositions.
CONSTITUENT_POWER_SCALE = 8.0


def _isotropic_weights(chi0: float) -> dict:
    weights = {}
    for mu, nu, tau, rho in product(_COMPONENTS, repeat=4):
        w = ((mu == nu) * (tau == rho) + (mu == tau) * (nu == rho)
             + (mu == rho) * (nu == tau)) / 3.0
        if w:
            weights[(mu, nu, tau, rho)] = chi0 * w
    return weights


@dataclass(frozen=True)
class Chi3Tensor:
    """Isotropic third-order susceptibility, normalized to chi0."""

    chi0: float = 1.0

    @property
    def weights(self) -> dict:
        return _isotropic_weights(self.chi0)


@dataclass(frozen=True)
class FwmChannel:
    """A stable signal/idler OAM pair."""

    signal: OamLabel
    idler: OamLabel

    @property
    def total_angular_index(self) -> int:
        return (self.signal.total_angular_index
                + self.idler.total_angular_index)


def angular_momentum_allowed(channel: FwmChannel) -> bool:
    """Whether the pair conserves total angular momentum (0 or +-2)."""
    return _signed_allowed(channel.signal.charge, channel.signal.handedness,
                           channel.idler.charge, channel.idler.handedness)


def _signed_allowed(charge_s: int, hand_s: int, charge_i: int,
                    hand_i: int) -> bool:
    return (charge_s + charge_i + hand_s + hand_i) in (-2, 0, 2)


class OverlapFamily(Enum):
    """Sign pattern (signal charge sign, signal SAM; idler charge sign,
    idler SAM) of one OAM channel family.

    Sign-mirrored families (all four signs flipped) give identical
    values, so only the ``handedness_s = +`` half is enumerated.
    """

    PP_PP = ((+1, +1), (+1, +1))
    PP_MM = ((+1, +1), (-1, -1))
    PP_PM = ((+1, +1), (+1, -1))
    PP_MP = ((+1, +1), (-1, +1))
    MP_PM = ((-1, +1), (+1, -1))
    MP_MM = ((-1, +1), (-1, -1))
    MP_PP = ((-1, +1), (+1, +1))
    MP_MP = ((-1, +1), (-1, +1))


def mirror_family(family: OverlapFamily):
    """Sign-flipped pattern of a family, as raw ((cs,hs),(ci,hi)) tuples."""
    (cs, hs), (ci, hi) = family.value
    return ((-cs, -hs), (-ci, -hi))


@lru_cache(maxsize=None)
def _pump_profile(fiber: FiberSpec, omega: float) -> RadialProfile:
    label = ModeLabel(ModeFamily.HE, 1, 1, Parity.EVEN)
    return RadialProfile(fiber, label, solve_mode(fiber, label, omega)
                         ).normalized()


def _signed_profile(fiber: FiberSpec, charge: int, handedness: int,
                    omega: float) -> OamProfile:
    try:
        label = OamLabel(charge=charge, handedness=handedness)
    except UnstableMode:
        return counter_rotating_slot_profile(fiber, charge, omega)
    return oam_profile(fiber, label, omega)


def _oam_components(profile: OamProfile, nodes: np.ndarray) -> dict:
    """Conjugated field components as {component: [(charge, coefficients)]}."""
    a_r, a_phi, a_z, *_ = profile.components(nodes)
    q = -profile.ell
    return {
        "r": [(q, -1j * a_r)],
        "phi": [(q, a_phi.astype(complex))],
        "z": [(q, a_z.astype(complex))],
    }


def _hybrid_components(profile: RadialProfile, nodes: np.ndarray,
                       conjugate: bool) -> dict:
    """Field components of one hybrid (HE/EH) parity eigenmode.

    The cos/sin azimuthal structure is expanded into charges ``+-m``.
    """
    a_r, a_phi, a_z, *_ = profile.coefficients(nodes)
    m = profile.label.azimuthal
    if m == 0:
        raise ValueError("hybrid Fourier expansion needs azimuthal >= 1")
    if profile.label.parity is Parity.EVEN:
        comps = {
            "r": [(m, 0.5j * a_r), (-m, 0.5j * a_r)],
            "phi": [(m, 0.5 * a_phi + 0j), (-m, -0.5 * a_phi + 0j)],
            "z": [(m, 0.5 * a_z + 0j), (-m, 0.5 * a_z + 0j)],
        }
    else:
        comps = {
            "r": [(m, 0.5 * a_r + 0j), (-m, -0.5 * a_r + 0j)],
            "phi": [(m, -0.5j * a_phi), (-m, -0.5j * a_phi)],
            "z": [(m, -0.5j * a_z), (-m, 0.5j * a_z)],
        }
    if conjugate:
        comps = {c: [(-q, np.conj(f)) for q, f in terms]
                 for c, terms in comps.items()}
    return comps


def _contract(chi: Chi3Tensor, comp1: dict, comp2: dict, comp_s: dict,
              comp_i: dict, nodes: np.ndarray, weights: np.ndarray):
    """Azimuthally filtered radial contraction of the four fields.

    Pump components are 1-D over nodes; the signal/idler entries may
    carry stacked rows (points, nodes), in which case the result is the
    per-row array instead of a scalar.
    """
    measure = weights * nodes
    pump_cache: dict = {}
    pair_cache: dict = {}
    acc = 0.0 + 0.0j
    for (mu, nu, tau, rho), w in chi.weights.items():
        for q1, f1 in comp1[mu]:
            for q2, f2 in comp2[nu]:
                q12 = q1 + q2
                for qs, fs in comp_s[tau]:
                    for qi, fi in comp_i[rho]:
                        if q12 + qs + qi != 0:
                            continue
                        pump_key = (mu, nu, q1, q2)
                        pump = pump_cache.get(pump_key)
                        if pump is None:
                            pump = measure * f1 * f2
                            pump_cache[pump_key] = pump
                        pair_key = (tau, rho, qs, qi)
                        pair = pair_cache.get(pair_key)
                        if pair is None:
                            pair = fs * fi
                            pair_cache[pair_key] = pair
                        acc = acc + w * (pair @ pump)
    return 2.0 * math.pi * acc


def fwm_overlap_signed(fiber: FiberSpec, signal: tuple, idler: tuple,
                       omega_s: float, omega_i: float, omega_pump1: float,
                       omega_pump2: float,
                       chi: Chi3Tensor = Chi3Tensor()) -> float:
    """Overlap integral for raw (charge, handedness) signal/idler pairs.

    Unlike :func:`fwm_overlap` this accepts the counter-rotating
    ``|charge| = 1`` slots, substituting their TM constituent, so whole
    channel families can be tabulated.  Returns exactly 0.0 for pairs
    that violate angular-momentum conservation.
    """
    charge_s, hand_s = signal
    charge_i, hand_i = idler
    if not _signed_allowed(charge_s, hand_s, charge_i, hand_i):
        return 0.0
    prof_s = _signed_profile(fiber, charge_s, hand_s, omega_s)
    prof_i = _signed_profile(fiber, charge_i, hand_i, omega_i)
    pump1 = _pump_profile(fiber, omega_pump1)
    pump2 = _pump_profile(fiber, omega_pump2)
    w_min = min(prof_s.base.point.w, prof_i.base.point.w,
                pump1.point.w, pump2.point.w)
    nodes, weights = _radial_quadrature(w_min)
    value = _contract(chi,
                      _hybrid_components(pump1, nodes, conjugate=False),
                      _hybrid_components(pump2, nodes, conjugate=False),
                      _oam_components(prof_s, nodes),
                      _oam_components(prof_i, nodes),
                      nodes, weights)
    if abs(value.imag) > 1e-8 * max(1.0, abs(value.real)):
        raise ComputeError(
            f"overlap expected to be real, got {value!r}")
    return float(value.real)


def _signed_hybrid_label(charge: int, handedness: int):
    """Parity-basis label carrying a signed pair, plus a slot flag."""
    try:
        label = OamLabel(charge=charge, handedness=handedness)
    except UnstableMode:
        return ModeLabel(ModeFamily.TM, 0, 1, Parity.EVEN), True
    return hybrid_partner(label), False


def _component_rows(fiber: FiberSpec, signed: tuple, slot: bool, points,
                    nodes: np.ndarray, weights: np.ndarray) -> dict:
    """Conjugated components over a whole grid, rows stacked per point."""
    charge, hand = signed
    if slot:
        ell, comps = slot_profile_rows(fiber, charge, points, nodes, weights)
    else:
        ell, comps = oam_profile_rows(
            fiber, OamLabel(charge=charge, handedness=hand), points, nodes,
            weights)
    q = -ell
    return {
        "r": [(q, -1j * comps[0])],
        "phi": [(q, comps[1].astype(complex))],
        "z": [(q, comps[2].astype(complex))],
    }


def fwm_overlap_pairs_grid(fiber: FiberSpec, signals, idlers,
                           omega_s: np.ndarray, omega_i: np.ndarray,
                           omega_pump1: float, omega_pump2: float,
                           chi: Chi3Tensor = Chi3Tensor()) -> dict:
    """Overlaps of every signal/idler pairing along paired grids.

    ``signals`` and ``idlers`` are sequences of signed ``(charge,
    handedness)`` pairs; entry ``k`` of each result is the overlap at
    ``(omega_s[k], omega_i[k])``.  Mode profiles are built once per
    distinct label and shared across pairings, so evaluating several
    coupled channels costs little more than one.  Returns a dict keyed
    by ``(signal, idler)``; disallowed pairings map to zero arrays.
    """
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    if omega_s.shape != omega_i.shape:
        raise ValueError("signal and idler grids must have equal shape")
    signals = list(dict.fromkeys(tuple(s) for s in signals))
    idlers = list(dict.fromkeys(tuple(i) for i in idlers))
    out = {(s, i): np.zeros(omega_s.shape) for s in signals for i in idlers}
    allowed = [(s, i) for s in signals for i in idlers
               if _signed_allowed(s[0], s[1], i[0], i[1])]
    if not allowed:
        return out
    side_s = {}
    for s in dict.fromkeys(s for s, _ in allowed):
        lab, slot = _signed_hybrid_label(*s)
        side_s[s] = (lab, slot, solve_mode_grid(fiber, lab, omega_s))
    side_i = {}
    for i in dict.fromkeys(i for _, i in allowed):
        lab, slot = _signed_hybrid_label(*i)
        side_i[i] = (lab, slot, solve_mode_grid(fiber, lab, omega_i))
    pump1 = _pump_profile(fiber, omega_pump1)
    pump2 = _pump_profile(fiber, omega_pump2)
    w_min = min(min(p.w for _, _, pts in side_s.values() for p in pts),
                min(p.w for _, _, pts in side_i.values() for p in pts),
                pump1.point.w, pump2.point.w)
    nodes, weights = _radial_quadrature(w_min)
    comp1 = _hybrid_components(pump1, nodes, conjugate=False)
    comp2 = _hybrid_components(pump2, nodes, conjugate=False)
    rows_s = {s: _component_rows(fiber, s, slot, pts, nodes, weights)
              for s, (_, slot, pts) in side_s.items()}
    rows_i = {i: _component_rows(fiber, i, slot, pts, nodes, weights)
              for i, (_, slot, pts) in side_i.items()}
    for pair in allowed:
        value = _contract(chi, comp1, comp2, rows_s[pair[0]],
                          rows_i[pair[1]], nodes, weights)
        bad = np.abs(value.imag) > 1e-8 * np.maximum(1.0, np.abs(value.real))
        if np.any(bad):
            raise ComputeError(
                f"overlap expected to be real, got {value[bad][0]!r}")
        out[pair] = value.real.reshape(omega_s.shape)
    return out


def fwm_overlap_grid(fiber: FiberSpec, signal: tuple, idler: tuple,
                     omega_s: np.ndarray, omega_i: np.ndarray,
                     omega_pump1: float, omega_pump2: float,
                     chi: Chi3Tensor = Chi3Tensor()) -> np.ndarray:
    """Overlap of one signed channel along paired frequency grids.

    ``omega_s`` and ``omega_i`` must have equal length; entry ``k`` of
    the result is the overlap at ``(omega_s[k], omega_i[k])``.  Signal
    and idler dispersion are solved by continuation, which makes dense
    sweeps far cheaper than calling :func:`fwm_overlap_signed` per
    point.
    """
    pairs = fwm_overlap_pairs_grid(fiber, [signal], [idler], omega_s,
                                   omega_i, omega_pump1, omega_pump2, chi)
    return pairs[(tuple(signal), tuple(idler))]


def fwm_overlap(fiber: FiberSpec, channel: FwmChannel, omega_s: float,
                omega_i: float, omega_pump1: float, omega_pump2: float,
                chi: Chi3Tensor = Chi3Tensor()) -> float:
    """Overlap integral of one stable signal/idler channel."""
    return fwm_overlap_signed(
        fiber,
        (channel.signal.charge, channel.signal.handedness),
        (channel.idler.charge, channel.idler.handedness),
        omega_s, omega_i, omega_pump1, omega_pump2, chi)


def overlap_table(fiber: FiberSpec, family: OverlapFamily, omega_s: float,
                  omega_i: float, omega_pump1: float, omega_pump2: float,
                  orders: range = range(1, 5),
                  chi: Chi3Tensor = Chi3Tensor(),
                  normalization: str = "constituent-power") -> np.ndarray:
    """Overlap values of one family over a grid of orbital orders.

    Rows run over the idler order m_i, columns over the signal order
    m_s, both taken from ``orders``.  ``normalization`` selects the
    reporting convention (see the module docstring):
    ``"constituent-power"`` (default, the tabulated convention) or
    ``"unit-flux"`` (the internal one).
    """
    if normalization == "constituent-power":
        scale = CONSTITUENT_POWER_SCALE
    elif normalization == "unit-flux":
        scale = 1.0
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    (sign_s, hand_s), (sign_i, hand_i) = family.value
    orders = list(orders)
    out = np.zeros((len(orders), len(orders)))
    for i, m_i in enumerate(orders):
        for j, m_s in enumerate(orders):
            out[i, j] = scale * fwm_overlap_signed(
                fiber, (sign_s * m_s, hand_s), (sign_i * m_i, hand_i),
                omega_s, omega_i, omega_pump1, omega_pump2, chi)
    return out


def hybrid_overlap(fiber: FiberSpec, signal: ModeLabel, idler: ModeLabel,
                   omega_s: float, omega_i: float, omega_pump1: float,
                   omega_pump2: float,
                   chi: Chi3Tensor = Chi3Tensor()) -> complex:
    """Overlap integral in the hybrid (parity) basis.

    Signal and idler are HE/EH parity eigenmodes (conjugated in the
    contraction); pumps stay in the fundamental even mode.  Used to
    cross-check the OAM-basis values by linear reconstruction.
    """
    prof_s = RadialProfile(fiber, signal,
                           solve_mode(fiber, signal, omega_s)).normalized()
    prof_i = RadialProfile(fiber, idler,
                           solve_mode(fiber, idler, omega_i)).normalized()
    pump1 = _pump_profile(fiber, omega_pump1)
    pump2 = _pump_profile(fiber, omega_pump2)
    w_min = min(prof_s.point.w, prof_i.point.w, pump1.point.w, pump2.point.w)
    nodes, weights = _radial_quadrature(w_min)
    return complex(_contract(
        chi,
        _hybrid_components(pump1, nodes, conjugate=False),
        _hybrid_components(pump2, nodes, conjugate=False),
        _hybrid_components(prof_s, nodes, conjugate=True),
        _hybrid_components(prof_i, nodes, conjugate=True),
        nodes, weights))
