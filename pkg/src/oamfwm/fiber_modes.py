"""Exact vector modes of a cylindrical step-index fiber.

The solver works with the dimensionless waveguide quantities
``U = u a``, ``W = w a`` and ``V = sqrt(U^2 + W^2)``; radial coordinates
are measured in units of the core radius throughout, and the time
convention is ``exp(i(omega t - beta z))``.

A mode is represented by six real radial coefficient functions
``(a_r, a_phi, a_z, b_r, b_phi, b_z)``; the physical fields follow as

even parity::

    E = (i a_r cos(m phi),  i a_phi sin(m phi),  a_z cos(m phi))
    H = (i b_r sin(m phi),  i b_phi cos(m phi),  b_z sin(m phi))

odd parity replaces ``cos -> sin`` and ``sin -> -cos`` in both fields.
TM modes are the ``m = 0``, ``s = 0`` even case; TE modes are the
``m = 0`` odd case with their own coefficient set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import (BranchAmbiguity, DegenerateFlux, NonFinite, NotGuided,
                     NoSignChange)
from .numerics import (besselj, besselj_prime, besselk, besselk_prime,
                       find_root, kronrod_panels)

_SCAN_POINTS = 400
_EDGE = 1e-9
# K_m(W r) tail: truncating at W r ~ 46 leaves a relative flux error
# below 1e-38.
_TAIL_DECAY = 46.0


class ModeFamily(Enum):
    HE = "HE"
    EH = "EH"
    TE = "TE"
    TM = "TM"


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class FiberSpec:
    """Step-index fiber geometry and materials.

    Attributes:
        core_index: refractive index of the core.
        clad_index: refractive index of the cladding.
        core_radius: core radius in meters.
    """

    core_index: float
    clad_index: float
    core_radius: float

    def __post_init__(self):
        if not self.core_radius > 0:
            raise ValueError("core_radius must be positive")
        if not 0 < self.clad_index < self.core_index:
            raise ValueError("indices must satisfy 0 < clad_index < core_index")

    @property
    def numerical_aperture(self) -> float:
        return math.sqrt(self.core_index ** 2 - self.clad_index ** 2)


@dataclass(frozen=True)
class ModeLabel:
    """Hybrid-basis mode label.

    ``azimuthal`` is the azimuthal order m (>= 1 for HE/EH, 0 for TE/TM)
    and ``radial`` the radial index n >= 1.  Parity selects the cos/sin
    orientation and is ignored for TE/TM whose orientation is fixed.
    """

    family: ModeFamily
    azimuthal: int
    radial: int = 1
    parity: Parity = Parity.EVEN

    def __post_init__(self):
        if self.family in (ModeFamily.HE, ModeFamily.EH):
            if self.azimuthal < 1:
                raise ValueError(f"{self.family.value} requires azimuthal >= 1")
        else:
            if self.azimuthal != 0:
                raise ValueError(f"{self.family.value} requires azimuthal == 0")
        if self.radial < 1:
            raise ValueError("radial index must be >= 1")


@dataclass(frozen=True)
class DispersionPoint:
    """Solved propagation data of one mode at one frequency.

    ``u``/``w`` are the dimensionless transverse parameters, ``s`` the
    hybrid polarization parameter (0 for TE/TM), ``beta`` the propagation
    constant in 1/m and ``group_velocity`` in m/s.
    """

    omega: float
    u: float
    w: float
    s: float
    beta: float
    n_eff: float
    group_velocity: float


def omega_from_wavelength(vacuum_wavelength: float) -> float:
    return 2.0 * math.pi * SPEED_OF_LIGHT / vacuum_wavelength


def wavelength_from_omega(omega: float) -> float:
    return 2.0 * math.pi * SPEED_OF_LIGHT / omega


def v_parameter(fiber: FiberSpec, vacuum_wavelength: float) -> float:
    """Normalized frequency V = (2 pi a / lambda) NA."""
    return (2.0 * math.pi * fiber.core_radius / vacuum_wavelength
            * fiber.numerical_aperture)


def _v_of_omega(fiber: FiberSpec, omega: float) -> float:
    return omega * fiber.core_radius / SPEED_OF_LIGHT * fiber.numerical_aperture


def _hybrid_residual(fiber: FiberSpec, m: int, V: float):
    """Characteristic function F(U) whose zeros are HE/EH modes."""
    er = (fiber.clad_index / fiber.core_index) ** 2

    def f(U):
        U = np.asarray(U, dtype=float)
        W = np.sqrt(np.maximum(V * V - U * U, 1e-300))
        aj = besselj_prime(m, U) / (U * besselj(m, U))
        ak = besselk_prime(m, W) / (W * besselk(m, W))
        inv = 1.0 / (U * U) + 1.0 / (W * W)
        inv_e = 1.0 / (U * U) + er / (W * W)
        return (aj + ak) * (aj + er * ak) - m * m * inv * inv_e

    return f


def _te_residual(fiber: FiberSpec, V: float):
    def f(U):
        U = np.asarray(U, dtype=float)
        W = np.sqrt(np.maximum(V * V - U * U, 1e-300))
        return (besselj(1, U) / (U * besselj(0, U))
                + besselk(1, W) / (W * besselk(0, W)))

    return f


def _tm_residual(fiber: FiberSpec, V: float):
    n1 = fiber.core_index ** 2
    n2 = fiber.clad_index ** 2

    def f(U):
        U = np.asarray(U, dtype=float)
        W = np.sqrt(np.maximum(V * V - U * U, 1e-300))
        return (n1 * besselj(1, U) / (U * besselj(0, U))
                + n2 * besselk(1, W) / (W * besselk(0, W)))

    return f


def _s_value(fiber: FiberSpec, m: int, U: float, W: float) -> float:
    aj = float(besselj_prime(m, U) / (U * besselj(m, U)))
    ak = float(besselk_prime(m, W) / (W * besselk(m, W)))
    return m * (1.0 / U ** 2 + 1.0 / W ** 2) / (aj + ak)


def _scan_intervals(m: int, V: float):
    """Subintervals of (0, V) free of J_m poles."""
    cuts = [_EDGE * V + 1e-6]
    nt = max(2, int(V / math.pi) + 2)
    for z in special.jn_zeros(m, nt):
        if z < V:
            cuts.append(float(z))
    cuts.append(V - _EDGE * V)
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo > 1e-9:
            out.append((lo + 1e-9, hi - 1e-9))
    return out


def _bracketed_roots(f, intervals):
    roots = []
    for lo, hi in intervals:
        grid = np.linspace(lo, hi, _SCAN_POINTS)
        vals = np.asarray(f(grid))
        if not np.all(np.isfinite(vals)):
            raise NonFinite("characteristic function not finite during scan")
        sign = np.sign(vals)
        hits = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        for i in hits:
            try:
                roots.append(find_root(lambda x: float(f(x)),
                                       float(grid[i]), float(grid[i + 1])))
            except NoSignChange:  # pragma: no cover - grid gave the bracket
                continue
    return sorted(roots)


@lru_cache(maxsize=None)
def _mode_table(fiber: FiberSpec, family: ModeFamily, m: int, omega: float):
    """All guided U-roots of one (family, m) at one frequency, ascending."""
    V = _v_of_omega(fiber, omega)
    if family is ModeFamily.TE:
        return tuple(_bracketed_roots(_te_residual(fiber, V),
                                      _scan_intervals(0, V)))
    if family is ModeFamily.TM:
        return tuple(_bracketed_roots(_tm_residual(fiber, V),
                                      _scan_intervals(0, V)))
    roots = _bracketed_roots(_hybrid_residual(fiber, m, V),
                             _scan_intervals(m, V))
    he, eh = [], []
    for U in roots:
        W = math.sqrt(max(V * V - U * U, 0.0))
        s = _s_value(fiber, m, U, W)
        if not math.isfinite(s) or abs(s) < 1e-9:
            raise BranchAmbiguity(
                f"cannot classify root U={U:.6f} of m={m} (s={s!r})")
        (he if s < 0 else eh).append(U)
    return tuple(he) if family is ModeFamily.HE else tuple(eh)


def _beta_from_u(fiber: FiberSpec, omega: float, U: float, W: float) -> float:
    k0 = omega / SPEED_OF_LIGHT
    a = fiber.core_radius
    beta_sq = (fiber.core_index * k0) ** 2 - (U / a) ** 2
    return math.sqrt(beta_sq)


@lru_cache(maxsize=None)
def _solve_root(fiber: FiberSpec, family: ModeFamily, m: int, n: int,
                omega: float):
    table = _mode_table(fiber, family, m, omega)
    if len(table) < n:
        raise NotGuided(
            f"{family.value}({m},{n}) not guided at omega={omega:.6e} "
            f"(V={_v_of_omega(fiber, omega):.4f}, {len(table)} roots)")
    U = table[n - 1]
    V = _v_of_omega(fiber, omega)
    W = math.sqrt(max(V * V - U * U, 0.0))
    if family in (ModeFamily.HE, ModeFamily.EH):
        s = _s_value(fiber, m, U, W)
    else:
        s = 0.0
    return U, W, s, _beta_from_u(fiber, omega, U, W)


@lru_cache(maxsize=None)
def solve_mode(fiber: FiberSpec, label: ModeLabel,
               omega: float) -> DispersionPoint:
    """Solve one mode's dispersion at one angular frequency.

    Raises:
        NotGuided: the mode is below cutoff at this frequency.
        BranchAmbiguity: HE/EH classification failed.
    """
    U, W, s, beta = _solve_root(fiber, label.family, label.azimuthal,
                                label.radial, omega)
    h = 1e-6
    _, _, _, b_hi = _solve_root(fiber, label.family, label.azimuthal,
                                label.radial, omega * (1 + h))
    _, _, _, b_lo = _solve_root(fiber, label.family, label.azimuthal,
                                label.radial, omega * (1 - h))
    v_g = 2 * h * omega / (b_hi - b_lo)
    n_eff = beta * SPEED_OF_LIGHT / omega
    return DispersionPoint(omega=omega, u=U, w=W, s=s, beta=beta,
                           n_eff=n_eff, group_velocity=v_g)


# Keyed on grid contents; bounded so long scans cannot grow it without
# limit.  Entries are immutable DispersionPoints, so a shallow copy is
# enough to isolate callers.
_GRID_MEMO: dict = {}
_GRID_MEMO_CAP = 64


def solve_mode_grid(fiber: FiberSpec, label: ModeLabel,
                    omegas: np.ndarray) -> list[DispersionPoint]:
    """Dispersion of one mode along a frequency grid.

    Uses Newton continuation from point to point, falling back to the
    full bracketed solve whenever the continuation degrades.  Group
    velocities come from finite differences of beta along the grid (for
    a single-point grid the scalar solver is used instead).
    """
    omegas = np.asarray(omegas, dtype=float)
    if omegas.size == 1:
        return [solve_mode(fiber, label, float(omegas[0]))]
    key = (fiber, label, omegas.tobytes())
    hit = _GRID_MEMO.get(key)
    if hit is not None:
        return list(hit)
    m = label.azimuthal
    us = np.empty_like(omegas)
    betas = np.empty_like(omegas)
    ws = np.empty_like(omegas)
    ss = np.empty_like(omegas)
    prev_u = None
    for i, omega in enumerate(omegas):
        V = _v_of_omega(fiber, omega)
        if label.family is ModeFamily.TE:
            f = _te_residual(fiber, V)
        elif label.family is ModeFamily.TM:
            f = _tm_residual(fiber, V)
        else:
            f = _hybrid_residual(fiber, m, V)
        U = None
        if prev_u is not None:
            U = _newton_polish(f, prev_u, V)
        if U is None:
            U = _solve_root(fiber, label.family, m, label.radial, omega)[0]
        prev_u = U
        us[i] = U
        W = math.sqrt(max(V * V - U * U, 0.0))
        ws[i] = W
        if label.family in (ModeFamily.HE, ModeFamily.EH):
            ss[i] = _s_value(fiber, m, U, W)
        else:
            ss[i] = 0.0
        betas[i] = _beta_from_u(fiber, omega, U, W)
    v_g = 1.0 / np.gradient(betas, omegas)
    points = [DispersionPoint(omega=float(omegas[i]), u=float(us[i]),
                              w=float(ws[i]), s=float(ss[i]),
                              beta=float(betas[i]),
                              n_eff=float(betas[i] * SPEED_OF_LIGHT
                                          / omegas[i]),
                              group_velocity=float(v_g[i]))
              for i in range(omegas.size)]
    if len(_GRID_MEMO) >= _GRID_MEMO_CAP:
        _GRID_MEMO.pop(next(iter(_GRID_MEMO)))
    _GRID_MEMO[key] = points
    return list(points)


def dispersion_grid(fiber: FiberSpec, label: ModeLabel,
                    omegas: np.ndarray) -> np.ndarray:
    """Propagation constants beta(omega) along a frequency grid."""
    return np.array([pt.beta
                     for pt in solve_mode_grid(fiber, label, omegas)])


def _newton_polish(f, u0: float, V: float, max_iter: int = 8):
    """Secant polish of a characteristic-equation root; None on failure."""
    u = u0
    step = max(1e-9, 1e-7 * u0)
    f0 = float(f(u))
    for _ in range(max_iter):
        f1 = float(f(u + step))
        slope = (f1 - f0) / step
        if slope == 0 or not math.isfinite(slope):
            return None
        du = -f0 / slope
        u_new = u + du
        if not (0 < u_new < V) or abs(du) > 0.05 * V:
            return None
        u = u_new
        f0 = float(f(u))
        if abs(du) < 1e-13 * max(1.0, u):
            return u
    return u if abs(f0) < 1e-9 else None


@dataclass(frozen=True)
class RadialProfile:
    """Radial coefficient functions of one mode at one frequency.

    ``scale`` multiplies all six coefficients; flux normalization only
    adjusts it.  Radii are in units of the core radius.
    """

    fiber: FiberSpec
    label: ModeLabel
    point: DispersionPoint
    scale: float = 1.0

    def coefficients(self, r: np.ndarray):
        """Evaluate (a_r, a_phi, a_z, b_r, b_phi, b_z) at radii ``r``."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("radii must be positive (axis excluded)")
        if self.label.family is ModeFamily.TE:
            out = _te_coefficients(self.fiber, self.point, r)
        else:
            out = _hybrid_coefficients(self.fiber, self.label, self.point, r)
        return tuple(self.scale * comp for comp in out)

    def normalized(self) -> "RadialProfile":
        """Rescale so the longitudinal Poynting flux equals one."""
        flux = poynting_flux(self)
        if not flux > 1e-300:
            raise DegenerateFlux(
                f"mode {self.label} carries no forward power (P={flux!r})")
        return replace(self, scale=self.scale / math.sqrt(flux))


def _hybrid_coefficients(fiber: FiberSpec, label: ModeLabel,
                         pt: DispersionPoint, r: np.ndarray):
    m = label.azimuthal
    U, W, s = pt.u, pt.w, pt.s
    k0a = pt.omega * fiber.core_radius / SPEED_OF_LIGHT
    beta_a = pt.n_eff * k0a
    core = r <= 1.0
    rc, rl = r[core], r[~core]
    shape = r.shape
    a_r = np.empty(shape)
    a_phi = np.empty(shape)
    a_z = np.empty(shape)
    b_r = np.empty(shape)
    b_phi = np.empty(shape)
    b_z = np.empty(shape)

    jm = float(besselj(m, U))
    jb = besselj(m, U * rc) / jm
    jbp = besselj_prime(m, U * rc) / jm
    mr = m / rc if m else np.zeros_like(rc)
    a_r[core] = (beta_a / U ** 2) * (s * mr * jb - U * jbp)
    a_phi[core] = (beta_a / U ** 2) * (mr * jb - s * U * jbp)
    a_z[core] = jb
    n1 = fiber.core_index ** 2
    ns = pt.n_eff ** 2
    b_r[core] = (k0a / U ** 2) * (s * ns * U * jbp - n1 * mr * jb)
    b_phi[core] = (k0a / U ** 2) * (s * ns * mr * jb - n1 * U * jbp)
    b_z[core] = -s * pt.n_eff * jb

    if rl.size:
        km = float(besselk(m, W))
        kb = besselk(m, W * rl) / km
        kbp = besselk_prime(m, W * rl) / km
        mr = m / rl if m else np.zeros_like(rl)
        n2 = fiber.clad_index ** 2
        a_r[~core] = -(beta_a / W ** 2) * (s * mr * kb - W * kbp)
        a_phi[~core] = -(beta_a / W ** 2) * (mr * kb - s * W * kbp)
        a_z[~core] = kb
        b_r[~core] = -(k0a / W ** 2) * (s * ns * W * kbp - n2 * mr * kb)
        b_phi[~core] = -(k0a / W ** 2) * (s * ns * mr * kb - n2 * W * kbp)
        b_z[~core] = -s * pt.n_eff * kb
    return a_r, a_phi, a_z, b_r, b_phi, b_z


def coefficients_grid(fiber: FiberSpec, label: ModeLabel, points,
                      r: np.ndarray):
    """Stacked coefficient arrays of one mode over many dispersion points.

    Returns six arrays of shape ``(len(points), r.size)`` whose rows
    match ``RadialProfile(fiber, label, point).coefficients(r)``.  Dense
    sweeps use this to amortize the Bessel evaluations over the whole
    grid; the per-point route stays as the reference implementation.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive (axis excluded)")
    if label.family is ModeFamily.TE:
        rows = [_te_coefficients(fiber, p, r) for p in points]
        return tuple(np.stack(c) for c in zip(*rows))
    m = label.azimuthal
    cols = np.array([(p.u, p.w, p.s, p.n_eff, p.omega) for p in points],
                    dtype=float).T[:, :, None]
    U, W, s, n_eff, omega = cols
    k0a = omega * fiber.core_radius / SPEED_OF_LIGHT
    beta_a = n_eff * k0a
    ns = n_eff ** 2
    core = r <= 1.0
    rc, rl = r[core], r[~core]
    shape = (len(points), r.size)
    a_r = np.empty(shape)
    a_phi = np.empty(shape)
    a_z = np.empty(shape)
    b_r = np.empty(shape)
    b_phi = np.empty(shape)
    b_z = np.empty(shape)

    jm = besselj(m, U)
    jb = besselj(m, U * rc) / jm
    jbp = besselj_prime(m, U * rc) / jm
    mr = m / rc if m else np.zeros_like(rc)
    n1 = fiber.core_index ** 2
    a_r[:, core] = (beta_a / U ** 2) * (s * mr * jb - U * jbp)
    a_phi[:, core] = (beta_a / U ** 2) * (mr * jb - s * U * jbp)
    a_z[:, core] = jb
    b_r[:, core] = (k0a / U ** 2) * (s * ns * U * jbp - n1 * mr * jb)
    b_phi[:, core] = (k0a / U ** 2) * (s * ns * mr * jb - n1 * U * jbp)
    b_z[:, core] = -s * n_eff * jb

    if rl.size:
        km = besselk(m, W)
        kb = besselk(m, W * rl) / km
        kbp = besselk_prime(m, W * rl) / km
        mr = m / rl if m else np.zeros_like(rl)
        n2 = fiber.clad_index ** 2
        a_r[:, ~core] = -(beta_a / W ** 2) * (s * mr * kb - W * kbp)
        a_phi[:, ~core] = -(beta_a / W ** 2) * (mr * kb - s * W * kbp)
        a_z[:, ~core] = kb
        b_r[:, ~core] = -(k0a / W ** 2) * (s * ns * W * kbp - n2 * mr * kb)
        b_phi[:, ~core] = -(k0a / W ** 2) * (s * ns * mr * kb - n2 * W * kbp)
        b_z[:, ~core] = -s * n_eff * kb
    return a_r, a_phi, a_z, b_r, b_phi, b_z


def _te_coefficients(fiber: FiberSpec, pt: DispersionPoint, r: np.ndarray):
    U, W = pt.u, pt.w
    k0a = pt.omega * fiber.core_radius / SPEED_OF_LIGHT
    beta_a = pt.n_eff * k0a
    core = r <= 1.0
    rc, rl = r[core], r[~core]
    shape = r.shape
    zeros = np.zeros(shape)
    e_phi = np.empty(shape)
    h_z = np.empty(shape)
    j1 = float(besselj(1, U))
    e_phi[core] = besselj(1, U * rc) / j1
    h_z[core] = -(U / k0a) * besselj(0, U * rc) / j1
    if rl.size:
        k1 = float(besselk(1, W))
        e_phi[~core] = besselk(1, W * rl) / k1
        h_z[~core] = (W / k0a) * besselk(0, W * rl) / k1
    h_r = -(beta_a / k0a) * e_phi
    # Odd-parity assembly at m=0: E_phi = -i a_phi, H_r = -i b_r,
    # H_z = -b_z; the sign flips below restore (i e_phi, i h_r, h_z).
    return zeros, -e_phi, zeros.copy(), -h_r, zeros.copy(), -h_z


def _radial_quadrature(w_min: float):
    r_max = 1.0 + _TAIL_DECAY / w_min
    core_nodes, core_weights = kronrod_panels(1e-12, 1.0, 16)
    n_clad = max(16, int(math.ceil(r_max - 1.0)))
    clad_nodes, clad_weights = kronrod_panels(1.0, r_max, n_clad)
    return (np.concatenate([core_nodes, clad_nodes]),
            np.concatenate([core_weights, clad_weights]))


def poynting_flux(profile: RadialProfile) -> float:
    """Longitudinal power 2 integral (E x H* + c.c.)_z d^2r (core-radius units)."""
    nodes, weights = _radial_quadrature(profile.point.w)
    a_r, a_phi, _, b_r, b_phi, _ = profile.coefficients(nodes)
    angular = math.pi if profile.label.azimuthal >= 1 else 2.0 * math.pi
    integrand = (a_r * b_phi - a_phi * b_r) * nodes
    return float(2.0 * angular * np.sum(weights * integrand))


def guided_labels(fiber: FiberSpec, omega: float,
                  max_azimuthal: int) -> list[ModeLabel]:
    """All guided HE/EH/TE/TM labels with azimuthal order <= max_azimuthal."""
    out: list[ModeLabel] = []
    for family in (ModeFamily.TE, ModeFamily.TM):
        for n, _ in enumerate(_mode_table(fiber, family, 0, omega), start=1):
            out.append(ModeLabel(family, 0, n))
    for family in (ModeFamily.HE, ModeFamily.EH):
        for m in range(1, max_azimuthal + 1):
            for n, _ in enumerate(_mode_table(fiber, family, m, omega),
                                  start=1):
                out.append(ModeLabel(family, m, n))
    return out
