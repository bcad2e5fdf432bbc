"""Config-driven command line front end.

Every command reads one YAML config, computes its artifact set, and
writes CSV (or JSON) arrays plus a JSON metadata sidecar per file.
Outputs are deterministic: identical config and version give
bit-identical files regardless of the worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, load
from .coupled_modes import EnvelopeFamily, envelope_components
from .errors import ConfigInvalid, OamFwmError
from .fiber_modes import guided_labels, solve_mode
from .grating import PhotonRole, coupling_constant, coupling_spectrum, \
    exact_momentum_detuning
from .jsa import (bell_fidelity, dominant_peaks, jsa_full, jsa_no_grating,
                  pair_ratio, peak_positions)
from .oam_basis import OamLabel
from .overlap import OverlapFamily, overlap_table

_COMMANDS = ("modes", "overlap-tables", "coupling-map", "envelopes", "jsi",
             "pair-ratio", "fidelity", "peaks")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _label_text(label: OamLabel) -> str:
    return f"O{label.charge:+d}{'+' if label.handedness > 0 else '-'}"


def _mode_dict(label: OamLabel) -> dict:
    return {"charge": label.charge, "handedness": label.handedness}


def _config_echo(config: RunConfig) -> dict:
    return {
        "fiber": {
            "core_index": config.fiber.core_index,
            "clad_index": config.fiber.clad_index,
            "core_radius": config.fiber.core_radius,
        },
        "pump": {
            "wavelength1": config.pump.lambda1,
            "wavelength2": config.pump.lambda2,
            "length": config.pump.length,
        },
        "channels": [{"signal": _mode_dict(c.signal),
                      "idler": _mode_dict(c.idler)}
                     for c in config.channels],
        "gratings": [{
            "photon": g.target_photon.value,
            "topological_charge": g.topological_charge,
            "period": g.period,
            "perturbation": g.perturbation,
            "source": _mode_dict(g.source),
            "converted": _mode_dict(g.converted),
            "resonance_omega": g.resonance_omega,
        } for g in config.gratings],
        "grid": {"halfwidth": config.grid.halfwidth,
                 "points": config.grid.points},
        "tolerances": {"rtol": config.tolerances.rtol,
                       "atol": config.tolerances.atol},
        "outputs": {"directory": config.outputs.directory,
                    "format": config.outputs.format},
    }


class _Writer:
    """Serializes one run's artifacts into the output directory."""

    def __init__(self, directory: str, fmt: str, config: RunConfig,
                 command: str, workers: int) -> None:
        self.directory = directory
        self.format = fmt
        self.config = config
        self.command = command
        self.workers = workers
        os.makedirs(directory, exist_ok=True)
        self.written: list[str] = []

    def table(self, name: str, columns: list[str], rows: list[list],
              extra: dict | None = None) -> None:
        text_rows = [[_fmt(v) for v in row] for row in rows]
        if self.format == "csv":
            path = os.path.join(self.directory, f"{name}.csv")
            lines = [",".join(columns)]
            lines += [",".join(row) for row in text_rows]
            body = "\n".join(lines) + "\n"
        else:
            path = os.path.join(self.directory, f"{name}.json")
            body = json.dumps({"columns": columns, "rows": text_rows},
                              indent=1, sort_keys=True) + "\n"
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(body)
        sidecar = {
            "command": self.command,
            "version": __version__,
            "workers": self.workers,
            "columns": columns,
            "config": _config_echo(self.config),
        }
        if extra:
            sidecar["parameters"] = extra
        meta_path = path + ".meta.json"
        with open(meta_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(json.dumps(sidecar, indent=1, sort_keys=True)
                         + "\n")
        self.written.extend([path, meta_path])


def _detunings(config: RunConfig) -> np.ndarray:
    return np.linspace(-config.grid.halfwidth, config.grid.halfwidth,
                       config.grid.points)


def _cmd_modes(config: RunConfig, writer: _Writer, workers: int) -> None:
    rows = []
    for tag, omega in (("pump1", config.pump.omega1),
                       ("pump2", config.pump.omega2)):
        for label in guided_labels(config.fiber, omega, max_azimuthal=12):
            pt = solve_mode(config.fiber, label, omega)
            rows.append([tag, label.family.value, label.azimuthal,
                         label.radial, pt.n_eff, pt.beta,
                         pt.group_velocity])
    writer.table("modes",
                 ["frequency", "family", "azimuthal", "radial", "n_eff",
                  "beta", "group_velocity"], rows)


def _cmd_overlap_tables(config: RunConfig, writer: _Writer,
                        workers: int) -> None:
    orders = range(1, 5)
    for family in OverlapFamily:
        table = overlap_table(config.fiber, family, config.pump.omega1,
                              config.pump.omega2, config.pump.omega1,
                              config.pump.omega2, orders)
        columns = ["m_i"] + [f"m_s={m}" for m in orders]
        rows = [[m_i] + [table[i, j] for j in range(len(orders))]
                for i, m_i in enumerate(orders)]
        writer.table(f"overlap_table_{family.name}", columns, rows,
                     extra={"family": family.name,
                            "signs": family.value})


def _cmd_coupling_map(config: RunConfig, writer: _Writer,
                      workers: int) -> None:
    if not config.gratings:
        raise ConfigInvalid("coupling-map needs at least one grating")
    detuning = _detunings(config)
    for grating in config.gratings:
        if grating.target_photon is PhotonRole.SIGNAL:
            omegas = config.pump.omega1 + detuning
        else:
            omegas = config.pump.omega2 - detuning
        spectrum = coupling_spectrum(config.fiber, grating, grating.source,
                                     grating.converted, omegas)
        rows = [[detuning[i], omegas[i], spectrum.kappa[i].real,
                 abs(spectrum.kappa[i]), spectrum.detuning[i],
                 spectrum.k_source[i], spectrum.k_converted[i]]
                for i in range(detuning.size)]
        writer.table(
            f"coupling_map_{grating.target_photon.value}",
            ["detuning", "omega", "kappa_re", "kappa_abs",
             "momentum_detuning", "k_source", "k_converted"], rows,
            extra={"source": _label_text(grating.source),
                   "converted": _label_text(grating.converted),
                   "period": grating.period})


def _cmd_envelopes(config: RunConfig, writer: _Writer,
                   workers: int) -> None:
    if not config.gratings:
        raise ConfigInvalid("envelopes needs at least one grating")
    z = np.linspace(0.0, config.pump.length, config.grid.points)
    for grating in config.gratings:
        omega = grating.resonance_omega
        kappa = coupling_constant(config.fiber, grating, grating.source,
                                  grating.converted, omega)
        d_hat = exact_momentum_detuning(config.fiber, grating,
                                        grating.source, grating.converted,
                                        omega)
        if grating.target_photon is PhotonRole.SIGNAL:
            families = (EnvelopeFamily.SIGNAL_OUT_M,
                        EnvelopeFamily.SIGNAL_OUT_MP)
        else:
            families = (EnvelopeFamily.IDLER_OUT_M,
                        EnvelopeFamily.IDLER_OUT_MP)
        columns = ["z"]
        blocks = []
        for family in families:
            low, high = envelope_components(
                family, kappa, 0.0, d_hat, 1.0, 1.0, config.pump.length, z)
            stem = ("source" if family in (EnvelopeFamily.SIGNAL_OUT_M,
                                           EnvelopeFamily.IDLER_OUT_M)
                    else "converted")
            columns += [f"{stem}_low_re", f"{stem}_low_im",
                        f"{stem}_high_re", f"{stem}_high_im"]
            blocks += [low.real, low.imag, high.real, high.imag]
        rows = [[z[i]] + [b[i] for b in blocks] for i in range(z.size)]
        writer.table(
            f"envelopes_{grating.target_photon.value}", columns, rows,
            extra={"kappa_abs": abs(kappa), "momentum_detuning": d_hat,
                   "resonance_omega": omega})


def _jsi_rows(grid, detuning: np.ndarray):
    intensity = grid.intensity
    peak = float(intensity.max())
    scale = peak if peak > 0 else 1.0
    columns = ["detuning", "amplitude_re", "amplitude_im", "intensity",
               "intensity_normalized"]
    term_keys = sorted(grid.terms) if grid.terms else []
    for key in term_keys:
        columns += [f"term[{key}]_re", f"term[{key}]_im"]
    rows = []
    for i in range(detuning.size):
        row = [detuning[i], grid.amplitude[i].real, grid.amplitude[i].imag,
               intensity[i], intensity[i] / scale]
        for key in term_keys:
            row += [grid.terms[key][i].real, grid.terms[key][i].imag]
        rows.append(row)
    return columns, rows, peak


def _cmd_jsi(config: RunConfig, writer: _Writer, workers: int) -> None:
    detuning = _detunings(config)
    gratings = (config.grating_for(PhotonRole.SIGNAL),
                config.grating_for(PhotonRole.IDLER))
    for i, channel in enumerate(config.channels):
        if gratings == (None, None):
            grid = jsa_no_grating(config.fiber, channel, config.pump,
                                  detuning, workers=workers)
        else:
            grid = jsa_full(config.fiber, channel, config.pump, gratings,
                            detuning, quad_rtol=config.tolerances.rtol,
                            workers=workers)
        columns, rows, peak = _jsi_rows(grid, detuning)
        writer.table(
            f"jsi_{i}", columns, rows,
            extra={"signal": _label_text(channel.signal),
                   "idler": _label_text(channel.idler),
                   "intensity_max": peak,
                   "normalization": "self-max"})


def _cmd_pair_ratio(config: RunConfig, writer: _Writer,
                    workers: int) -> None:
    grating_s = config.grating_for(PhotonRole.SIGNAL)
    grating_i = config.grating_for(PhotonRole.IDLER)
    if grating_s is None or grating_i is None:
        raise ConfigInvalid("pair-ratio needs one signal and one idler "
                            "grating")
    rows = []
    for channel in config.channels:
        ratio = pair_ratio(config.fiber, channel, config.pump,
                           (grating_s, grating_i), workers=workers)
        rows.append([_label_text(channel.signal),
                     _label_text(channel.idler), ratio])
    writer.table("pair_ratio", ["signal", "idler", "ratio"], rows)


def _cmd_fidelity(config: RunConfig, writer: _Writer,
                  workers: int) -> None:
    orders = range(1, 5)
    columns = ["m_i"] + [f"m_s={m}" for m in orders]
    rows = []
    for m_i in orders:
        row = [m_i]
        for m_s in orders:
            row.append(bell_fidelity(config.fiber, config.pump, m_s, m_i))
        rows.append(row)
    writer.table("fidelity", columns, rows)


def _cmd_peaks(config: RunConfig, writer: _Writer, workers: int) -> None:
    grating_s = config.grating_for(PhotonRole.SIGNAL)
    grating_i = config.grating_for(PhotonRole.IDLER)
    if grating_s is None or grating_i is None:
        raise ConfigInvalid("peaks needs one signal and one idler grating")
    rows = []
    missing = {}
    for i, channel in enumerate(config.channels):
        peaks = peak_positions(config.fiber, channel, config.pump,
                               (grating_s, grating_i),
                               halfwidth=config.grid.halfwidth,
                               samples=config.grid.points)
        for position in peaks.positions:
            rows.append([_label_text(channel.signal),
                         _label_text(channel.idler), position])
        if peaks.missing:
            missing[f"channel[{i}]"] = [list(pair)
                                        for pair in peaks.missing]
    writer.table("peaks", ["signal", "idler", "detuning"], rows,
                 extra={"missing_sign_combinations": missing})


_RUNNERS = {
    "modes": _cmd_modes,
    "overlap-tables": _cmd_overlap_tables,
    "coupling-map": _cmd_coupling_map,
    "envelopes": _cmd_envelopes,
    "jsi": _cmd_jsi,
    "pair-ratio": _cmd_pair_ratio,
    "fidelity": _cmd_fidelity,
    "peaks": _cmd_peaks,
}


def run(config: RunConfig, command: str, *, out: str | None = None,
        fmt: str | None = None, workers: int = 1) -> list[str]:
    """Execute one command against a validated config.

    Returns the list of files written.  Raises ConfigInvalid for
    semantic config problems and ComputeError subclasses for numerical
    failures.
    """
    if command not in _RUNNERS:
        raise ConfigInvalid(f"unknown command {command!r}")
    directory = out if out is not None else config.outputs.directory
    chosen_fmt = fmt if fmt is not None else config.outputs.format
    writer = _Writer(directory, chosen_fmt, config, command, workers)
    _RUNNERS[command](config, writer, workers)
    return writer.written


def _failing_module(exc: BaseException) -> str:
    """Deepest package module in the exception's traceback."""
    name = "oamfwm"
    tb = exc.__traceback__
    while tb is not None:
        module = tb.tb_frame.f_globals.get("__name__", "")
        if module.startswith("oamfwm."):
            name = module.rsplit(".", 1)[-1]
        tb = tb.tb_next
    return name


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oamfwm",
        description="Photon-pair spectra of helically corrugated "
                    "step-index fibers")
    parser.add_argument("command", choices=_COMMANDS)
    parser.add_argument("--config", required=True, metavar="PATH")
    parser.add_argument("--out", default=None, metavar="DIR")
    parser.add_argument("--workers", type=int,
                        default=os.cpu_count() or 1)
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; no command uses randomness")
    args = parser.parse_args(argv)

    try:
        config = load(args.config)
    except (ConfigInvalid, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        written = run(config, args.command, out=args.out, fmt=args.format,
                      workers=max(1, args.workers))
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OamFwmError as exc:
        print(f"compute error [{type(exc).__name__} from "
              f"{_failing_module(exc)}]: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
