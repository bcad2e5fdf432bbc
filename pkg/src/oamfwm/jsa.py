"""Joint spectral amplitudes of the generated photon pairs.

With continuous pumps, energy conservation pins the idler frequency to
``omega_ibar = omega1 + omega2 - omega_s``, so every spectrum here is a
function of the single detuning ``dw = omega_s - omega1``.  Without
gratings the amplitude is the transverse overlap times a closed-form
sinc.  With gratings each output channel collects up to four source
terms (signal born in the grating's source or converted mode, likewise
for the idler); each term carries its own overlap, carrier mismatch and
envelope pair.  The longitudinal integral of each term is evaluated in
closed form: every envelope is a two-exponential function of z, so the
integrand is a finite sum of complex exponentials and each one
integrates to a box sinc.  A panel-quadrature route over the same
integrand is retained (``z_quadrature=True``) as an independent
cross-check.  Inside those integrals the envelopes are evaluated at
zero frequency detuning with the exact momentum mismatch of the
running frequency, so the zero-coupling limit collapses to the
no-grating amplitude identically.

Absolute brightness prefactors are dropped: amplitudes carry only the
``sqrt(omega_s * omega_ibar / (omega1 * omega2))`` field-normalization
ratio, so every exported quantity is defined up to one global constant
that cancels in all reported ratios and normalized intensities.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .coupled_modes import EnvelopeFamily, envelope_components
from .errors import DirectionMismatch, ForbiddenChannel, GridTooNarrow
from .fiber_modes import (FiberSpec, ModeFamily, ModeLabel, Parity,
                          dispersion_grid, omega_from_wavelength, solve_mode)
from .grating import GratingSpec, PhotonRole, coupling_constant, \
    coupling_spectrum
from .oam_basis import OamLabel, hybrid_partner
from .overlap import (Chi3Tensor, FwmChannel, _signed_allowed,
                      angular_momentum_allowed, fwm_overlap_grid,
                      fwm_overlap_pairs_grid, fwm_overlap_signed)
from .numerics import find_root, integrate_panels

_BLOCK = 512
_NODE_BUDGET = 1_500_000
_PUMP_LABEL = ModeLabel(ModeFamily.HE, 1, 1, Parity.EVEN)


@dataclass(frozen=True)
class PumpConfig:
    """Two continuous pumps in the fundamental mode, plus fiber length.

    Pump 1 co-propagates with the signal, pump 2 counter-propagates;
    the phase-mismatch formulas below already carry those directions,
    with all wavenumbers entered as positive magnitudes.
    """

    lambda1: float
    lambda2: float
    length: float

    def __post_init__(self) -> None:
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("pump wavelengths must be positive")
        if self.length <= 0:
            raise ValueError("waveguide length must be positive")

    @property
    def omega1(self) -> float:
        return omega_from_wavelength(self.lambda1)

    @property
    def omega2(self) -> float:
        return omega_from_wavelength(self.lambda2)

    def frequencies(self, detuning):
        """(omega_s, omega_ibar) for detunings dw = omega_s - omega1."""
        detuning = np.asarray(detuning, dtype=float)
        return self.omega1 + detuning, self.omega2 - detuning


@dataclass(frozen=True)
class PrefactorConvention:
    """Field-normalization carried by each amplitude.

    Per-photon factors scale as sqrt(omega); the constant that would
    make the amplitude an absolute pair rate is set to one, since only
    normalized intensities and ratios are reported.
    """

    global_scale: float = 1.0

    def value(self, pump: PumpConfig, omega_s, omega_i):
        return self.global_scale * np.sqrt(
            np.asarray(omega_s) * np.asarray(omega_i)
            / (pump.omega1 * pump.omega2))


@dataclass(frozen=True)
class JsaGrid:
    """One channel's amplitude on a detuning grid.

    ``omega_idler`` is constructed as ``omega1 + omega2 - omega_signal``
    so energy conservation is exact by construction.  ``terms`` holds
    the per-source-term breakdown when a grating sum produced the
    amplitude.
    """

    channel: FwmChannel
    detuning: np.ndarray
    omega_signal: np.ndarray
    omega_idler: np.ndarray
    amplitude: np.ndarray
    normalization_reference: str = "unnormalized"
    terms: dict | None = None

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2


def _label_text(label: OamLabel) -> str:
    return (f"O{label.charge:+d}{'+' if label.handedness > 0 else '-'}")


@dataclass(frozen=True)
class _SourceTerm:
    """One in-guide source mode feeding an output mode on one side."""

    label: OamLabel
    k: np.ndarray
    family: EnvelopeFamily | None
    component: int
    kappa: np.ndarray | None
    detuning: np.ndarray | None


def _pump_wavenumbers(fiber: FiberSpec, pump: PumpConfig):
    k1 = solve_mode(fiber, _PUMP_LABEL, pump.omega1).beta
    k2 = solve_mode(fiber, _PUMP_LABEL, pump.omega2).beta
    return k1, k2


def _split_spans(n: int, block: int):
    return [(i, min(i + block, n)) for i in range(0, n, block)]


def _run_blocks(worker, common, detuning: np.ndarray, workers: int):
    """Map a block worker over fixed-size grid blocks, in order.

    The block size never depends on ``workers``, so results are
    bit-identical no matter how the work is scheduled.
    """
    args = [(common, detuning[lo:hi])
            for lo, hi in _split_spans(detuning.size, _BLOCK)]
    if workers <= 1 or len(args) == 1:
        return [worker(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, args))


def _no_grating_block(args):
    (fiber, channel, pump, chi), detuning = args
    omega_s, omega_i = pump.frequencies(detuning)
    k1, k2 = _pump_wavenumbers(fiber, pump)
    overlap = fwm_overlap_grid(
        fiber,
        (channel.signal.charge, channel.signal.handedness),
        (channel.idler.charge, channel.idler.handedness),
        omega_s, omega_i, pump.omega1, pump.omega2, chi)
    k_s = dispersion_grid(fiber, hybrid_partner(channel.signal), omega_s)
    k_i = dispersion_grid(fiber, hybrid_partner(channel.idler), omega_i)
    mismatch = k1 - k2 - k_s + k_i
    half = 0.5 * mismatch * pump.length
    phase_integral = (pump.length * np.exp(1j * half)
                      * np.sinc(half / math.pi))
    pref = PrefactorConvention().value(pump, omega_s, omega_i)
    return {"amplitude": pref * overlap * phase_integral}


def jsa_no_grating(fiber: FiberSpec, channel: FwmChannel, pump: PumpConfig,
                   detuning: np.ndarray, chi: Chi3Tensor = Chi3Tensor(),
                   workers: int = 1) -> JsaGrid:
    """Amplitude of a bare channel: overlap times closed-form sinc."""
    if not angular_momentum_allowed(channel):
        raise ForbiddenChannel(
            f"channel {_label_text(channel.signal)};"
            f"{_label_text(channel.idler)} violates angular-momentum "
            "conservation")
    detuning = np.asarray(detuning, dtype=float)
    parts = _run_blocks(_no_grating_block, (fiber, channel, pump, chi),
                        detuning, workers)
    amplitude = np.concatenate([p["amplitude"] for p in parts])
    omega_s, omega_i = pump.frequencies(detuning)
    return JsaGrid(channel=channel, detuning=detuning, omega_signal=omega_s,
                   omega_idler=omega_i, amplitude=amplitude)


def _side_terms(fiber: FiberSpec, grating: GratingSpec | None,
                out_label: OamLabel, omegas: np.ndarray, photon: PhotonRole,
                dominant_only: bool) -> list[_SourceTerm]:
    """Source terms feeding one photon's output mode."""
    if grating is None:
        k = dispersion_grid(fiber, hybrid_partner(out_label), omegas)
        return [_SourceTerm(label=out_label, k=k, family=None, component=0,
                            kappa=None, detuning=None)]
    if grating.target_photon is not photon:
        raise DirectionMismatch(
            f"grating targets {grating.target_photon.value} photons but "
            f"was supplied for the {photon.value} side")
    if out_label == grating.source:
        family = (EnvelopeFamily.SIGNAL_OUT_M
                  if photon is PhotonRole.SIGNAL
                  else EnvelopeFamily.IDLER_OUT_M)
    elif out_label == grating.converted:
        family = (EnvelopeFamily.SIGNAL_OUT_MP
                  if photon is PhotonRole.SIGNAL
                  else EnvelopeFamily.IDLER_OUT_MP)
    else:
        raise ForbiddenChannel(
            f"output mode {_label_text(out_label)} is neither the source "
            f"nor the converted mode of the {photon.value} grating")
    spectrum = coupling_spectrum(fiber, grating, grating.source,
                                 grating.converted, omegas)
    sources = [(grating.source, spectrum.k_source, 0)]
    if not dominant_only:
        sources.append((grating.converted, spectrum.k_converted, 1))
    return [_SourceTerm(label=label, k=k, family=family, component=comp,
                        kappa=spectrum.kappa, detuning=spectrum.detuning)
            for label, k, comp in sources]


def _term_envelope(term: _SourceTerm, length: float, sl: slice,
                   z: np.ndarray) -> np.ndarray:
    if term.family is None:
        return np.ones((sl.stop - sl.start, z.size), dtype=complex)
    pair = envelope_components(term.family, term.kappa[sl, None], 0.0,
                               term.detuning[sl, None], 1.0, 1.0, length,
                               z[None, :])
    return pair[term.component]


def _term_rate_bound(term: _SourceTerm) -> np.ndarray:
    if term.family is None:
        return np.zeros(term.k.shape)
    gamma = np.hypot(term.detuning, np.abs(term.kappa))
    return 2.0 * np.abs(term.detuning) + gamma


def _term_exponentials(term: _SourceTerm, sl: slice, length: float):
    """One term's envelope as ``[(coefficient, z-rate)]`` pairs.

    At zero frequency detuning every envelope family reduces to two
    complex exponentials in z: the Rabi factors split into e^{+-i gamma}
    and the remaining phases are linear in z.  Coefficients and rates
    are vectorized over the grid slice.
    """
    if term.family is None:
        n = sl.stop - sl.start
        return [(np.ones(n, dtype=complex), np.zeros(n))]
    kappa = term.kappa[sl]
    d = term.detuning[sl]
    gamma = np.hypot(d, np.abs(kappa))
    safe = np.where(gamma > 0.0, gamma, 1.0)
    ratio = np.where(gamma > 0.0, d / safe, 0.0)
    pairs = []
    for sign in (1.0, -1.0):
        # cos(gamma x) -+ i (d/gamma) sin(gamma x) splits into these
        kept_minus = 0.5 * (1.0 - sign * ratio) + 0.0j
        kept_plus = 0.5 * (1.0 + sign * ratio) + 0.0j
        # sin(gamma x) / gamma, zero weight in the degenerate limit
        cross = np.where(gamma > 0.0, sign / (2j * safe), 0.0)
        if term.family is EnvelopeFamily.SIGNAL_OUT_M:
            if term.component == 0:
                coeff = kept_minus * np.exp(1j * (d + sign * gamma) * length)
                rate = -(d + sign * gamma)
            else:
                coeff = (-1j * np.conj(kappa) * cross
                         * np.exp(1j * (d + sign * gamma) * length))
                rate = d - sign * gamma
        elif term.family is EnvelopeFamily.SIGNAL_OUT_MP:
            if term.component == 0:
                coeff = (-1j * kappa * cross
                         * np.exp(1j * (sign * gamma - d) * length))
                rate = -(d + sign * gamma)
            else:
                coeff = kept_plus * np.exp(1j * (sign * gamma - d) * length)
                rate = d - sign * gamma
        elif term.family is EnvelopeFamily.IDLER_OUT_M:
            if term.component == 0:
                coeff = kept_minus + 0.0 * d
                rate = d + sign * gamma
            else:
                coeff = -1j * np.conj(kappa) * cross
                rate = sign * gamma - d
        else:
            if term.component == 0:
                coeff = -1j * kappa * cross
                rate = d + sign * gamma
            else:
                coeff = kept_plus + 0.0 * d
                rate = sign * gamma - d
        pairs.append((np.asarray(coeff, dtype=complex), rate))
    return pairs


def _term_z_integral(term_s: _SourceTerm, term_i: _SourceTerm,
                     rate: np.ndarray, length: float) -> np.ndarray:
    """Closed-form z-integral of the conjugated envelope product."""
    sl = slice(0, rate.size)
    out = np.zeros(rate.shape, dtype=complex)
    for coeff_s, mu_s in _term_exponentials(term_s, sl, length):
        for coeff_i, mu_i in _term_exponentials(term_i, sl, length):
            nu = rate - mu_s - mu_i
            half = 0.5 * nu * length
            out += (np.conj(coeff_s) * np.conj(coeff_i) * length
                    * np.exp(1j * half) * np.sinc(half / math.pi))
    return out


def _term_z_integral_quad(term_s: _SourceTerm, term_i: _SourceTerm,
                          rate: np.ndarray, length: float,
                          quad_rtol: float) -> np.ndarray:
    """Chunked panel quadrature of the product integrand over z."""
    bound = np.abs(rate) + _term_rate_bound(term_s) + _term_rate_bound(term_i)
    out = np.empty(rate.shape, dtype=complex)
    pos = 0
    n = rate.size
    while pos < n:
        panels = max(16, int(bound[pos:min(pos + _BLOCK, n)].max()
                             * length / 3.0) + 8)
        chunk = max(1, min(_BLOCK, _NODE_BUDGET // (15 * panels)))
        sl = slice(pos, min(pos + chunk, n))
        local_rate = rate[sl]

        def integrand(z: np.ndarray) -> np.ndarray:
            phase = np.exp(1j * local_rate[:, None] * z[None, :])
            env_s = _term_envelope(term_s, length, sl, z)
            env_i = _term_envelope(term_i, length, sl, z)
            return phase * np.conj(env_s) * np.conj(env_i)

        out[sl] = integrate_panels(integrand, 0.0, length, rtol=quad_rtol,
                                   atol=1e-13, initial_panels=panels,
                                   max_doublings=8)
        pos = sl.stop
    return out


def _full_block(args):
    (fiber, channel, pump, grating_s, grating_i, dominant_only, chi,
     quad_rtol, z_quadrature) = args[0]
    detuning = args[1]
    omega_s, omega_i = pump.frequencies(detuning)
    k1, k2 = _pump_wavenumbers(fiber, pump)
    terms_s = _side_terms(fiber, grating_s, channel.signal, omega_s,
                          PhotonRole.SIGNAL, dominant_only)
    terms_i = _side_terms(fiber, grating_i, channel.idler, omega_i,
                          PhotonRole.IDLER, dominant_only)
    pref = PrefactorConvention().value(pump, omega_s, omega_i)
    amplitude = np.zeros(detuning.shape, dtype=complex)
    breakdown: dict[str, np.ndarray] = {}
    any_allowed = False
    overlaps = fwm_overlap_pairs_grid(
        fiber,
        [(t.label.charge, t.label.handedness) for t in terms_s],
        [(t.label.charge, t.label.handedness) for t in terms_i],
        omega_s, omega_i, pump.omega1, pump.omega2, chi)
    for term_s, term_i in product(terms_s, terms_i):
        if not _signed_allowed(term_s.label.charge, term_s.label.handedness,
                               term_i.label.charge, term_i.label.handedness):
            continue
        any_allowed = True
        overlap = overlaps[(term_s.label.charge, term_s.label.handedness),
                           (term_i.label.charge, term_i.label.handedness)]
        rate = k1 - k2 - term_s.k + term_i.k
        if z_quadrature:
            z_int = _term_z_integral_quad(term_s, term_i, rate, pump.length,
                                          quad_rtol)
        else:
            z_int = _term_z_integral(term_s, term_i, rate, pump.length)
        part = pref * overlap * z_int
        key = (f"{_label_text(term_s.label)};{_label_text(term_i.label)}")
        breakdown[key] = part
        amplitude = amplitude + part
    return {"amplitude": amplitude, "terms": breakdown,
            "allowed": any_allowed}


def jsa_full(fiber: FiberSpec, channel: FwmChannel, pump: PumpConfig,
             gratings: tuple[GratingSpec | None, GratingSpec | None],
             detuning: np.ndarray, *, dominant_only: bool = False,
             chi: Chi3Tensor = Chi3Tensor(), quad_rtol: float = 1e-9,
             z_quadrature: bool = False, workers: int = 1) -> JsaGrid:
    """Amplitude of one output channel with gratings in place.

    ``gratings`` is the (signal, idler) pair; either entry may be None,
    which leaves that photon unconverted.  ``dominant_only`` keeps only
    the term sourced by each grating's source mode, which is the
    approximation used throughout the reported resonant spectra.
    ``z_quadrature`` swaps the closed-form longitudinal integral for
    adaptive panel quadrature of the same integrand (slow; the two
    routes agree to ``quad_rtol`` and exist to check each other).
    """
    grating_s, grating_i = gratings
    detuning = np.asarray(detuning, dtype=float)
    common = (fiber, channel, pump, grating_s, grating_i, dominant_only,
              chi, quad_rtol, z_quadrature)
    parts = _run_blocks(_full_block, common, detuning, workers)
    if not any(p["allowed"] for p in parts):
        raise ForbiddenChannel(
            "every source term of this channel violates angular-momentum "
            "conservation")
    amplitude = np.concatenate([p["amplitude"] for p in parts])
    terms = {key: np.concatenate([p["terms"][key] for p in parts])
             for key in parts[0]["terms"]}
    omega_s, omega_i = pump.frequencies(detuning)
    return JsaGrid(channel=channel, detuning=detuning, omega_signal=omega_s,
                   omega_idler=omega_i, amplitude=amplitude, terms=terms)


def jsa_ideal_components(fiber: FiberSpec, channel: FwmChannel,
                         pump: PumpConfig, kappas: tuple[float, float],
                         detuning: np.ndarray) -> tuple[JsaGrid, ...]:
    """The four idealized cos/sin spectral integrals.

    In the fully resonant limit (zero frequency and momentum detuning)
    the generated state splits into four components whose longitudinal
    integrals are ``cos/sin[kappa_s (L - z)]`` times
    ``cos/sin[kappa_i z]`` against the carrier mismatch of ``channel``.
    The common overlap factor is omitted; these serve as closed-form
    cross-checks of the quadrature path.
    """
    kappa_s, kappa_i = kappas
    detuning = np.asarray(detuning, dtype=float)
    omega_s, omega_i = pump.frequencies(detuning)
    k1, k2 = _pump_wavenumbers(fiber, pump)
    k_s = dispersion_grid(fiber, hybrid_partner(channel.signal), omega_s)
    k_i = dispersion_grid(fiber, hybrid_partner(channel.idler), omega_i)
    mismatch = k1 - k2 - k_s + k_i
    L = pump.length

    def phase_integral(mu: np.ndarray) -> np.ndarray:
        return L * np.exp(0.5j * mu * L) * np.sinc(0.5 * mu * L / math.pi)

    def weight(trig: str, sign: int, kappa: float, shifted: bool) -> complex:
        # cos x = sum_s e^{isx}/2; sin x = sum_s s e^{isx}/(2i)
        c = 0.5 if trig == "cos" else sign / 2.0j
        if shifted:
            c = c * np.exp(1j * sign * kappa * L)
        return c

    grids = []
    for trig_s, trig_i in (("cos", "cos"), ("cos", "sin"), ("sin", "cos"),
                           ("sin", "sin")):
        total = np.zeros(detuning.shape, dtype=complex)
        for s_s, s_i in product((1, -1), repeat=2):
            c = (weight(trig_s, s_s, kappa_s, shifted=True)
                 * weight(trig_i, s_i, kappa_i, shifted=False))
            total += c * phase_integral(mismatch - s_s * kappa_s
                                        + s_i * kappa_i)
        grids.append(JsaGrid(
            channel=channel, detuning=detuning, omega_signal=omega_s,
            omega_idler=omega_i, amplitude=total,
            normalization_reference=(
                f"ideal {trig_s}[k_s(L-z)]*{trig_i}[k_i z] component, "
                "common overlap factor omitted")))
    return tuple(grids)


def _trapezoid_fsum(values: np.ndarray, grid: np.ndarray) -> float:
    steps = np.diff(grid)
    terms = 0.5 * (values[:-1] + values[1:]) * steps
    return math.fsum(terms.tolist())


def _tail_converged(intensity: np.ndarray, fraction: float = 1e-6) -> bool:
    peak = float(intensity.max())
    if peak == 0.0:
        return True
    edge = max(3, intensity.size // 100)
    tail = max(float(intensity[:edge].max()),
               float(intensity[-edge:].max()))
    return tail <= fraction * peak


def _converged_integral(builder, step: float, halfwidth: float,
                        max_widenings: int) -> float:
    for _ in range(max_widenings + 1):
        detuning = np.arange(-halfwidth, halfwidth + 0.5 * step, step)
        grid = builder(detuning)
        intensity = grid.intensity
        if _tail_converged(intensity):
            return _trapezoid_fsum(intensity, detuning)
        halfwidth *= 2.0
    raise GridTooNarrow(
        f"integrand tails still above 1e-6 of peak at halfwidth "
        f"{halfwidth / 2:g} rad/s")


def pair_ratio(fiber: FiberSpec, channel: FwmChannel, pump: PumpConfig,
               gratings: tuple[GratingSpec, GratingSpec], *,
               step: float = 2e9, halfwidth: float = 4e12,
               max_widenings: int = 4, dominant_only: bool = False,
               chi: Chi3Tensor = Chi3Tensor(), quad_rtol: float = 1e-7,
               workers: int = 1) -> float:
    """Pair-count gain of a grating pair for one high-order channel.

    Ratio of the spectrally integrated intensity of ``channel`` with
    both gratings (full four-term amplitude unless ``dominant_only``)
    to the same channel's intensity without gratings.  The grid widens
    automatically until both integrands' tails fall below 1e-6 of
    their peaks.
    """
    numerator = _converged_integral(
        lambda d: jsa_full(fiber, channel, pump, gratings, d,
                           dominant_only=dominant_only, chi=chi,
                           quad_rtol=quad_rtol, workers=workers),
        step, halfwidth, max_widenings)
    denominator = _converged_integral(
        lambda d: jsa_no_grating(fiber, channel, pump, d, chi=chi,
                                 workers=workers),
        step, halfwidth, max_widenings)
    return numerator / denominator


def bell_fidelity(fiber: FiberSpec, pump: PumpConfig, m_s: int, m_i: int,
                  detuning: float = 0.0,
                  chi: Chi3Tensor = Chi3Tensor()) -> float:
    """Fidelity of the delta-filtered pair state to the spin Bell state.

    The two interfering generation paths put the pair in
    (+m_s, +; -m_i, -) and (+m_s, -; -m_i, +); with overlaps A and B
    the fidelity is (|A| + |B|) / sqrt(2 (A^2 + B^2)).  Returns 0 when
    conservation forbids both paths.
    """
    omega_s = pump.omega1 + detuning
    omega_i = pump.omega2 - detuning
    a = fwm_overlap_signed(fiber, (m_s, 1), (-m_i, -1), omega_s, omega_i,
                           pump.omega1, pump.omega2, chi)
    b = fwm_overlap_signed(fiber, (m_s, -1), (-m_i, 1), omega_s, omega_i,
                           pump.omega1, pump.omega2, chi)
    if a == 0.0 and b == 0.0:
        return 0.0
    return (abs(a) + abs(b)) / math.sqrt(2.0 * (a * a + b * b))


@dataclass(frozen=True)
class PeakSet:
    """Root-solved peak detunings, plus sign combinations with no root."""

    positions: tuple[float, ...]
    missing: tuple[tuple[int, int], ...]


def peak_positions(fiber: FiberSpec, channel: FwmChannel, pump: PumpConfig,
                   gratings: tuple[GratingSpec, GratingSpec],
                   halfwidth: float = 4e12,
                   samples: int = 2001) -> PeakSet:
    """Detunings solving ``mismatch -+ kappa_s +- kappa_i = 0``.

    The mismatch is the dominant term's carrier (source modes of both
    gratings); each of the four sign combinations is root-solved on the
    sampled window.  Combinations without a sign change are reported in
    ``missing`` rather than raising.
    """
    grating_s, grating_i = gratings
    if (channel.signal != grating_s.converted
            or channel.idler != grating_i.converted):
        raise ForbiddenChannel(
            "peak equation applies to the channel converted by both "
            "gratings")
    k1, k2 = _pump_wavenumbers(fiber, pump)
    detuning = np.linspace(-halfwidth, halfwidth, samples)
    omega_s, omega_i = pump.frequencies(detuning)
    spec_s = coupling_spectrum(fiber, grating_s, grating_s.source,
                               grating_s.converted, omega_s)
    spec_i = coupling_spectrum(fiber, grating_i, grating_i.source,
                               grating_i.converted, omega_i)
    mismatch = k1 - k2 - spec_s.k_source + spec_i.k_source

    def g_exact(dw: float, s_s: int, s_i: int) -> float:
        w_s = pump.omega1 + dw
        w_i = pump.omega2 - dw
        k_s = solve_mode(fiber, hybrid_partner(grating_s.source), w_s).beta
        k_i = solve_mode(fiber, hybrid_partner(grating_i.source), w_i).beta
        kap_s = abs(coupling_constant(fiber, grating_s, grating_s.source,
                                      grating_s.converted, w_s))
        kap_i = abs(coupling_constant(fiber, grating_i, grating_i.source,
                                      grating_i.converted, w_i))
        return k1 - k2 - k_s + k_i + s_s * kap_s + s_i * kap_i

    positions = []
    missing = []
    for s_s, s_i in product((1, -1), repeat=2):
        sampled = (mismatch + s_s * np.abs(spec_s.kappa)
                   + s_i * np.abs(spec_i.kappa))
        signs = np.sign(sampled)
        brackets = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
        if brackets.size == 0:
            missing.append((s_s, s_i))
            continue
        for idx in brackets:
            root = find_root(lambda dw: g_exact(dw, s_s, s_i),
                             float(detuning[idx]), float(detuning[idx + 1]))
            positions.append(root)
    # roots from different sign combinations merge as kappa -> 0; report
    # each cluster (anything within one sample spacing) once
    cell = 2.0 * halfwidth / (samples - 1)
    merged = []
    for root in sorted(positions):
        if merged and root - merged[-1][-1] <= cell:
            merged[-1].append(root)
        else:
            merged.append([root])
    deduped = tuple(float(np.mean(cluster)) for cluster in merged)
    return PeakSet(positions=deduped, missing=tuple(missing))


def dominant_peaks(grid: JsaGrid, threshold: float = 0.1):
    """Local intensity maxima at or above ``threshold`` of the peak."""
    intensity = grid.intensity
    floor = threshold * float(intensity.max())
    found = []
    for i in range(1, intensity.size - 1):
        if (intensity[i] > intensity[i - 1]
                and intensity[i] >= intensity[i + 1]
                and intensity[i] >= floor):
            found.append((float(grid.detuning[i]), float(intensity[i])))
    return found
