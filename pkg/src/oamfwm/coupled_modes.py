"""Envelope dynamics of one grating-coupled mode pair.

The coupled-mode system links a source mode (low order, ``m``) to a
converted mode (high order, ``m'``) through a grating.  Closed-form
envelopes exist for the four asymptotic-out families: signal photons
leaving the ``z = L`` end in either mode, and idler photons leaving the
``z = 0`` end in either mode.  The phase that drives the two-level
dynamics is ``theta(z) = [delta (1/v_mp - 1/v_m) - 2 d] z``; all four
families share the Rabi structure ``cos(gamma z)`` and
``sin(gamma z) / gamma`` with ``gamma = sqrt(d^2 + |kappa|^2)``.

A fixed-step RK4 integrator of the same first-order system serves as
an independent oracle for the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Direction(Enum):
    """Propagation sense of the photon whose envelopes are computed."""

    FORWARD = "forward"
    BACKWARD = "backward"


class EnvelopeFamily(Enum):
    """Asymptotic-out families of the coupled pair."""

    SIGNAL_OUT_M = "signal_out_m"
    SIGNAL_OUT_MP = "signal_out_mp"
    IDLER_OUT_M = "idler_out_m"
    IDLER_OUT_MP = "idler_out_mp"

    @property
    def direction(self) -> Direction:
        if self in (EnvelopeFamily.SIGNAL_OUT_M, EnvelopeFamily.SIGNAL_OUT_MP):
            return Direction.FORWARD
        return Direction.BACKWARD


@dataclass(frozen=True)
class EnvelopeParams:
    """Coefficients of one coupled-mode system.

    ``v_g_m`` and ``v_g_mp`` are the (positive) group velocities of the
    source and converted modes; ``delta`` is the frequency detuning from
    the grating resonance and ``d`` the momentum detuning.  ``gamma`` is
    derived, not free.
    """

    kappa: complex
    delta: float
    d: float
    v_g_m: float
    v_g_mp: float
    length: float
    direction: Direction
    gamma: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ValueError("waveguide length must be positive")
        if self.v_g_m <= 0 or self.v_g_mp <= 0:
            raise ValueError("group velocities must be positive")
        object.__setattr__(self, "gamma",
                           math.hypot(self.d, abs(self.kappa)))


def envelope_components(family: EnvelopeFamily, kappa: complex, delta: float,
                        d: float, v_g_m: float, v_g_mp: float, length: float,
                        z):
    """Both envelopes of one family, broadcast over ``z`` (and params).

    Returns ``(a_low, a_high)``, the amplitudes carried by the source
    and converted modes.  All closed forms keep the printed global
    phases so results are bit-stable across call paths.
    """
    z = np.asarray(z, dtype=float)
    kappa = np.asarray(kappa, dtype=complex)
    d = np.asarray(d, dtype=float)
    gamma = np.hypot(d, np.abs(kappa))
    L = length
    if family.direction is Direction.FORWARD:
        x = L - z
    else:
        x = z
    cos = np.cos(gamma * x)
    snc = x * np.sinc(gamma * x / math.pi)
    if family is EnvelopeFamily.SIGNAL_OUT_M:
        a_low = (np.exp(1j * (L - z) * (d + delta / v_g_m))
                 * (cos - 1j * d * snc))
        a_high = (-1j * np.conj(kappa)
                  * np.exp(1j * ((L + z) * d
                                 - delta * (z / v_g_mp - L / v_g_m)))
                  * snc)
    elif family is EnvelopeFamily.SIGNAL_OUT_MP:
        a_low = (-1j * kappa
                 * np.exp(-1j * (d * (L + z)
                                 - delta * (L / v_g_mp - z / v_g_m)))
                 * snc)
        a_high = (np.exp(1j * (L - z) * (-d + delta / v_g_mp))
                  * (cos + 1j * d * snc))
    elif family is EnvelopeFamily.IDLER_OUT_M:
        a_low = (np.exp(1j * z * (d + delta / v_g_m))
                 * (cos - 1j * d * snc))
        a_high = (-1j * np.conj(kappa)
                  * np.exp(-1j * z * (d - delta / v_g_mp)) * snc)
    else:
        a_low = -1j * kappa * np.exp(1j * z * (d + delta / v_g_m)) * snc
        a_high = (np.exp(-1j * z * (d - delta / v_g_mp))
                  * (cos + 1j * d * snc))
    return a_low, a_high


@dataclass(frozen=True)
class EnvelopeSolution:
    """Closed-form envelopes of one family; call with z to evaluate."""

    family: EnvelopeFamily
    params: EnvelopeParams

    def __call__(self, z):
        p = self.params
        return envelope_components(self.family, p.kappa, p.delta, p.d,
                                   p.v_g_m, p.v_g_mp, p.length, z)


def envelopes(params: EnvelopeParams, family: EnvelopeFamily
              ) -> EnvelopeSolution:
    """Closed-form envelope solution of one asymptotic-out family."""
    if family.direction is not params.direction:
        raise ValueError(
            f"{family.value} needs {family.direction.value} params")
    return EnvelopeSolution(family=family, params=params)


@dataclass(frozen=True)
class SampledEnvelopes:
    """Envelopes on a uniform z grid, as produced by the ODE oracle."""

    z: np.ndarray
    a_low: np.ndarray
    a_high: np.ndarray


def _cme_rhs(params: EnvelopeParams, z: float, y: np.ndarray) -> np.ndarray:
    kappa = params.kappa
    theta = (params.delta * (1.0 / params.v_g_mp - 1.0 / params.v_g_m)
             - 2.0 * params.d)
    phase = np.exp(1j * theta * z)
    if params.direction is Direction.FORWARD:
        return np.array([
            -1j * (params.delta / params.v_g_m) * y[0]
            + 1j * kappa * y[1] * phase,
            -1j * (params.delta / params.v_g_mp) * y[1]
            + 1j * np.conj(kappa) * y[0] / phase,
        ])
    return np.array([
        1j * (params.delta / params.v_g_m) * y[0]
        - 1j * kappa * y[1] / phase,
        1j * (params.delta / params.v_g_mp) * y[1]
        - 1j * np.conj(kappa) * y[0] * phase,
    ])


def ode_oracle(params: EnvelopeParams, family: EnvelopeFamily,
               steps: int = 10_000) -> SampledEnvelopes:
    """Fixed-step RK4 integration of the coupled-mode system.

    Signal families are integrated backward from their ``z = L``
    boundary condition, idler families forward from ``z = 0``; the
    returned samples always run from 0 to L inclusive.
    """
    if steps < 1000:
        raise ValueError("oracle needs at least 1000 steps")
    if family.direction is not params.direction:
        raise ValueError(
            f"{family.value} needs {family.direction.value} params")
    L = params.length
    h = L / steps
    if family in (EnvelopeFamily.SIGNAL_OUT_M, EnvelopeFamily.IDLER_OUT_M):
        y = np.array([1.0 + 0j, 0.0 + 0j])
    else:
        y = np.array([0.0 + 0j, 1.0 + 0j])
    backward = family.direction is Direction.FORWARD
    zs = np.linspace(0.0, L, steps + 1)
    out = np.empty((steps + 1, 2), dtype=complex)
    if backward:
        order = range(steps, -1, -1)
        step = -h
    else:
        order = range(0, steps + 1)
        step = h
    it = iter(order)
    i0 = next(it)
    out[i0] = y
    z = zs[i0]
    for i in it:
        k1 = _cme_rhs(params, z, y)
        k2 = _cme_rhs(params, z + 0.5 * step, y + 0.5 * step * k1)
        k3 = _cme_rhs(params, z + 0.5 * step, y + 0.5 * step * k2)
        k4 = _cme_rhs(params, z + step, y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        z = zs[i]
        out[i] = y
    return SampledEnvelopes(z=zs, a_low=out[:, 0], a_high=out[:, 1])
