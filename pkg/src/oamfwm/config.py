"""Strict YAML run configuration.

The schema is a fixed key tree: unknown keys are rejected, physical
quantities require explicit unit suffixes, and every diagnostic carries
the config-file line and column of the offending value.  Nothing
physical is silently defaulted; only numerical tolerances and output
plumbing have defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import yaml

from .errors import ConfigInvalid
from .fiber_modes import FiberSpec
from .grating import GratingSpec, PhotonRole
from .jsa import PumpConfig
from .oam_basis import OamLabel
from .overlap import FwmChannel

_LENGTH_UNITS = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_FREQUENCY_UNITS = {"THz": 2e12 * math.pi, "GHz": 2e9 * math.pi,
                    "rad/s": 1.0}


@dataclass(frozen=True)
class GridSpec:
    """Symmetric detuning window for spectral sweeps."""

    halfwidth: float
    points: int


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances handed to the longitudinal quadrature."""

    rtol: float = 1e-9
    atol: float = 1e-13


@dataclass(frozen=True)
class OutputSpec:
    """Where and how artifacts are written."""

    directory: str = "out"
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run description."""

    fiber: FiberSpec
    pump: PumpConfig
    channels: tuple[FwmChannel, ...]
    grid: GridSpec
    gratings: tuple[GratingSpec, ...] = ()
    tolerances: QuadratureSpec = QuadratureSpec()
    outputs: OutputSpec = OutputSpec()

    def grating_for(self, photon: PhotonRole) -> GratingSpec | None:
        for grating in self.gratings:
            if grating.target_photon is photon:
                return grating
        return None


@dataclass(frozen=True)
class Diagnostic:
    """One validation failure, tied to a config location."""

    path: str
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.path} (line {self.line}, column {self.column}): " \
               f"{self.message}"


class _Collector:
    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []

    def fail(self, path: str, node, message: str) -> None:
        mark = getattr(node, "start_mark", None)
        line = mark.line + 1 if mark else 0
        column = mark.column + 1 if mark else 0
        self.diagnostics.append(Diagnostic(path, line, column, message))

    def raise_if_failed(self) -> None:
        if self.diagnostics:
            raise ConfigInvalid(
                "\n".join(str(d) for d in self.diagnostics))


def _scalar(node: yaml.ScalarNode):
    # quoted scalars stay strings; plain ones get YAML's usual typing
    if node.style is not None:
        return node.value
    if node.value == "":
        return None
    return yaml.safe_load(node.value)


def _mapping_items(ctx: _Collector, node, path: str) -> dict:
    if not isinstance(node, yaml.MappingNode):
        ctx.fail(path, node, "expected a mapping")
        return {}
    items: dict[str, yaml.Node] = {}
    for key_node, value_node in node.value:
        key = key_node.value
        if key in items:
            ctx.fail(f"{path}.{key}", key_node, "duplicate key")
            continue
        items[key] = value_node
    return items


def _sequence_items(ctx: _Collector, node, path: str) -> list:
    if not isinstance(node, yaml.SequenceNode):
        ctx.fail(path, node, "expected a list")
        return []
    return list(node.value)


class _Section:
    """One mapping node with strict key consumption."""

    def __init__(self, ctx: _Collector, node, path: str) -> None:
        self.ctx = ctx
        self.node = node
        self.path = path
        self.items = _mapping_items(ctx, node, path)
        self.seen: set[str] = set()

    def take(self, key: str, required: bool = True):
        self.seen.add(key)
        if key not in self.items:
            if required:
                self.ctx.fail(f"{self.path}.{key}", self.node,
                              "missing required key")
            return None
        return self.items[key]

    def finish(self) -> None:
        for key, node in self.items.items():
            if key not in self.seen:
                self.ctx.fail(f"{self.path}.{key}", node, "unknown key")


def _number(ctx: _Collector, node, path: str, *, integer: bool = False):
    if node is None:
        return None
    if not isinstance(node, yaml.ScalarNode):
        ctx.fail(path, node, "expected a number")
        return None
    value = _scalar(node)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        ctx.fail(path, node, f"expected a number, got {value!r}")
        return None
    if integer:
        if value != int(value):
            ctx.fail(path, node, "expected an integer")
            return None
        return int(value)
    return float(value)


def _unit_quantity(ctx: _Collector, node, path: str, units: dict,
                   kind: str):
    if node is None:
        return None
    if not isinstance(node, yaml.ScalarNode):
        ctx.fail(path, node, f"expected a {kind} with a unit suffix")
        return None
    value = _scalar(node)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        ctx.fail(path, node,
                 f"{kind} needs an explicit unit suffix, one of "
                 f"{sorted(units)}")
        return None
    parts = str(value).split()
    if len(parts) != 2 or parts[1] not in units:
        ctx.fail(path, node,
                 f"expected '<number> <unit>' with unit in "
                 f"{sorted(units)}, got {value!r}")
        return None
    try:
        magnitude = float(parts[0])
    except ValueError:
        ctx.fail(path, node, f"cannot parse {parts[0]!r} as a number")
        return None
    return magnitude * units[parts[1]]


def _length(ctx, node, path):
    return _unit_quantity(ctx, node, path, _LENGTH_UNITS, "length")


def _angular_frequency(ctx, node, path):
    return _unit_quantity(ctx, node, path, _FREQUENCY_UNITS, "frequency")


def _mode_label(ctx: _Collector, node, path: str) -> OamLabel | None:
    section = _Section(ctx, node, path)
    charge = _number(ctx, section.take("charge"), f"{path}.charge",
                     integer=True)
    handedness = _number(ctx, section.take("handedness"),
                         f"{path}.handedness", integer=True)
    section.finish()
    if charge is None or handedness is None:
        return None
    if handedness not in (-1, 1):
        ctx.fail(f"{path}.handedness", node, "handedness must be +1 or -1")
        return None
    try:
        return OamLabel(charge=charge, handedness=handedness)
    except Exception as exc:
        # covers the unstable counter-rotating |charge| = 1 slots, which
        # decompose into non-degenerate TE/TM modes instead of guiding
        ctx.fail(path, node, str(exc))
        return None


def _fiber(ctx: _Collector, node) -> FiberSpec | None:
    section = _Section(ctx, node, "fiber")
    radius = _length(ctx, section.take("core_radius"), "fiber.core_radius")
    n_core = _number(ctx, section.take("core_index"), "fiber.core_index")
    n_clad = _number(ctx, section.take("clad_index"), "fiber.clad_index")
    section.finish()
    if None in (radius, n_core, n_clad):
        return None
    try:
        return FiberSpec(core_index=n_core, clad_index=n_clad,
                         core_radius=radius)
    except ValueError as exc:
        ctx.fail("fiber", node, str(exc))
        return None


def _pump(ctx: _Collector, node) -> PumpConfig | None:
    section = _Section(ctx, node, "pump")
    lambda1 = _length(ctx, section.take("wavelength1"), "pump.wavelength1")
    lambda2 = _length(ctx, section.take("wavelength2"), "pump.wavelength2")
    length = _length(ctx, section.take("length"), "pump.length")
    section.finish()
    if None in (lambda1, lambda2, length):
        return None
    try:
        return PumpConfig(lambda1=lambda1, lambda2=lambda2, length=length)
    except ValueError as exc:
        ctx.fail("pump", node, str(exc))
        return None


def _channels(ctx: _Collector, node) -> tuple[FwmChannel, ...]:
    channels = []
    items = _sequence_items(ctx, node, "channels")
    if isinstance(node, yaml.SequenceNode) and not items:
        ctx.fail("channels", node, "at least one channel is required")
    for i, item in enumerate(items):
        path = f"channels[{i}]"
        section = _Section(ctx, item, path)
        signal_node = section.take("signal")
        idler_node = section.take("idler")
        section.finish()
        if signal_node is None or idler_node is None:
            continue
        signal = _mode_label(ctx, signal_node, f"{path}.signal")
        idler = _mode_label(ctx, idler_node, f"{path}.idler")
        if signal is not None and idler is not None:
            channels.append(FwmChannel(signal=signal, idler=idler))
    return tuple(channels)


def _resonance_omega(ctx: _Collector, node, path: str,
                     pump: PumpConfig | None) -> float | None:
    if isinstance(node, yaml.ScalarNode) and node.style is None \
            and node.value in ("pump1", "pump2"):
        if pump is None:
            return None
        return pump.omega1 if node.value == "pump1" else pump.omega2
    return _angular_frequency(ctx, node, path)


def _gratings(ctx: _Collector, node,
              pump: PumpConfig | None,
              fiber: FiberSpec | None) -> tuple[GratingSpec, ...]:
    gratings = []
    items = _sequence_items(ctx, node, "gratings")
    if len(items) > 2:
        ctx.fail("gratings", node, "at most two gratings are supported")
        items = items[:2]
    for i, item in enumerate(items):
        path = f"gratings[{i}]"
        section = _Section(ctx, item, path)
        photon_node = section.take("photon")
        source_node = section.take("source")
        converted_node = section.take("converted")
        perturbation = _number(ctx, section.take("perturbation"),
                               f"{path}.perturbation")
        resonance_node = section.take("resonance")
        period_node = section.take("period", required=False)
        section.finish()
        photon = None
        if photon_node is not None:
            text = _scalar(photon_node)
            if text in ("signal", "idler"):
                photon = PhotonRole(text)
            else:
                ctx.fail(f"{path}.photon", photon_node,
                         "photon must be 'signal' or 'idler'")
        source = (_mode_label(ctx, source_node, f"{path}.source")
                  if source_node is not None else None)
        converted = (_mode_label(ctx, converted_node, f"{path}.converted")
                     if converted_node is not None else None)
        resonance = (_resonance_omega(ctx, resonance_node,
                                      f"{path}.resonance", pump)
                     if resonance_node is not None else None)
        if None in (photon, source, converted, perturbation, resonance) \
                or fiber is None:
            continue
        if perturbation <= 0:
            ctx.fail(f"{path}.perturbation", item,
                     "perturbation must be positive")
            continue
        try:
            if period_node is not None:
                period = _length(ctx, period_node, f"{path}.period")
                if period is None:
                    continue
                charge = (converted.total_angular_index
                          - source.total_angular_index)
                grating = GratingSpec(
                    topological_charge=charge, period=period,
                    perturbation=perturbation, target_photon=photon,
                    source=source, converted=converted,
                    resonance_omega=resonance)
            else:
                grating = GratingSpec.resonant(
                    fiber, source, converted, resonance, perturbation,
                    photon)
        except Exception as exc:
            ctx.fail(path, item, str(exc))
            continue
        gratings.append(grating)
    roles = [g.target_photon for g in gratings]
    if len(roles) != len(set(roles)):
        ctx.fail("gratings", node,
                 "at most one grating per photon direction")
    return tuple(gratings)


def _grid(ctx: _Collector, node) -> GridSpec | None:
    section = _Section(ctx, node, "grid")
    halfwidth = _angular_frequency(ctx, section.take("halfwidth"),
                                   "grid.halfwidth")
    points = _number(ctx, section.take("points"), "grid.points",
                     integer=True)
    section.finish()
    if halfwidth is None or points is None:
        return None
    if halfwidth <= 0:
        ctx.fail("grid.halfwidth", node, "halfwidth must be positive")
        return None
    if points < 2:
        ctx.fail("grid.points", node, "grid needs at least 2 points")
        return None
    return GridSpec(halfwidth=halfwidth, points=points)


def _tolerances(ctx: _Collector, node) -> QuadratureSpec:
    section = _Section(ctx, node, "tolerances")
    rtol = _number(ctx, section.take("rtol", required=False),
                   "tolerances.rtol")
    atol = _number(ctx, section.take("atol", required=False),
                   "tolerances.atol")
    section.finish()
    defaults = QuadratureSpec()
    return QuadratureSpec(
        rtol=rtol if rtol is not None else defaults.rtol,
        atol=atol if atol is not None else defaults.atol)


def _outputs(ctx: _Collector, node) -> OutputSpec:
    section = _Section(ctx, node, "outputs")
    directory_node = section.take("directory", required=False)
    format_node = section.take("format", required=False)
    section.finish()
    defaults = OutputSpec()
    directory = defaults.directory
    if directory_node is not None:
        directory = str(_scalar(directory_node))
    fmt = defaults.format
    if format_node is not None:
        fmt = str(_scalar(format_node))
        if fmt not in ("csv", "json"):
            ctx.fail("outputs.format", format_node,
                     "format must be 'csv' or 'json'")
            fmt = defaults.format
    return OutputSpec(directory=directory, format=fmt)


def validate(text: str) -> RunConfig:
    """Parse and validate a YAML config, raising ConfigInvalid on errors.

    All diagnostics are collected before raising, each prefixed with the
    dotted field path and the line/column in the source text.
    """
    ctx = _Collector()
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"config is not valid YAML: {exc}") from exc
    if root is None:
        raise ConfigInvalid("config is empty")
    section = _Section(ctx, root, "config")
    fiber_node = section.take("fiber")
    pump_node = section.take("pump")
    channels_node = section.take("channels")
    grid_node = section.take("grid")
    gratings_node = section.take("gratings", required=False)
    tolerances_node = section.take("tolerances", required=False)
    outputs_node = section.take("outputs", required=False)
    section.finish()

    fiber = _fiber(ctx, fiber_node) if fiber_node is not None else None
    pump = _pump(ctx, pump_node) if pump_node is not None else None
    channels = (_channels(ctx, channels_node)
                if channels_node is not None else ())
    grid = _grid(ctx, grid_node) if grid_node is not None else None
    gratings = (_gratings(ctx, gratings_node, pump, fiber)
                if gratings_node is not None else ())
    tolerances = (_tolerances(ctx, tolerances_node)
                  if tolerances_node is not None else QuadratureSpec())
    outputs = (_outputs(ctx, outputs_node)
               if outputs_node is not None else OutputSpec())

    ctx.raise_if_failed()
    if fiber is None or pump is None or grid is None or not channels:
        raise ConfigInvalid("config incomplete after validation")
    return RunConfig(fiber=fiber, pump=pump, channels=channels, grid=grid,
                     gratings=gratings, tolerances=tolerances,
                     outputs=outputs)


def load(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return validate(handle.read())
