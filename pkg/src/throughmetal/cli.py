"""Command-line entry point: ``throughmetal <command> [options]``.

Commands read and write the plain-text formats of :mod:`throughmetal.formats`
and take their defaults from the shipped presets, overridable with
``--config``. Exit status is 0 on success, 2 on configuration or input
errors and 3 when demodulation finds no packet at all.
"""

from __future__ import annotations

import argparse
from dataclasses import replace
import io
import os
import sys

import numpy as np

from . import __version__, config, formats
from . import harness as H
from .channel import Geometry, apply_channel, calibrate, separation
from .demod import DemodConfig, demodulate_stream
from .errors import ConfigError, ThroughMetalError
from .frontend import receive
from .modem import amplifier_output, drive_current, packet_stream

EXIT_CONFIG = 2
EXIT_NO_PACKETS = 3


class _Version(argparse.Action):
    def __init__(self, option_strings, dest, **kw):
        super().__init__(option_strings, dest, nargs=0, help="print version and preset hashes")

    def __call__(self, parser, namespace, values, option_string=None):
        print(f"throughmetal {__version__}")
        for name, digest in config.preset_hashes().items():
            print(f"preset {name} sha256={digest}")
        parser.exit()


def _globals(suppress):
    p = argparse.ArgumentParser(add_help=False)
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="INI file layered over the shipped presets")
    p.add_argument("--seed", type=int, default=d, help="master random seed")
    p.add_argument("--out", default=d, help="output file (default: stdout)")
    return p


def _geometry_args(p):
    p.add_argument("--horizontal", type=float, help="horizontal offset, m")
    p.add_argument("--vertical", type=float, help="vertical offset incl. wall, m")
    p.add_argument("--coplanar", type=float, help="coplanar distance in air, m")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="throughmetal", parents=[_globals(False)],
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action=_Version)
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_globals(True)]

    p = sub.add_parser("plan", parents=common, help="carrier-frequency limit of a wall")
    p.add_argument("--material", default="aluminum")
    p.add_argument("--thickness", type=float, help="override wall thickness, m")
    p.add_argument("--vt", type=float, help="transmit voltage")
    p.add_argument("--vr", type=float, help="minimum receive voltage")

    p = sub.add_parser("modulate", parents=common, help="synthesize a packet stream")
    p.add_argument("--symbol-rate", type=int, required=True)
    p.add_argument("--sample-rate", type=int, required=True)
    p.add_argument("--packets", type=int, default=10)
    p.add_argument("--line-code", choices=("RZ", "NRZ"))
    p.add_argument("--supply", type=float, help="drive through the amplifier at this voltage")

    p = sub.add_parser("channel", parents=common, help="pass a waveform through the channel")
    p.add_argument("--in", dest="infile", required=True, help="waveform CSV")
    p.add_argument("--preset", default="aluminum", help="channel preset name")
    _geometry_args(p)
    p.add_argument("--noise", type=float, help="override noise_rms, V")
    p.add_argument("--capture", action="store_true",
                   help="also run the receive amplifier and ADC; write a capture CSV")

    p = sub.add_parser("demod", parents=common, help="demodulate a capture and report BER")
    p.add_argument("--in", dest="infile", required=True, help="capture CSV")
    p.add_argument("--symbol-rate", type=int, required=True)
    p.add_argument("--line-code", choices=("RZ", "NRZ"), help="decision mode")
    p.add_argument("--keep-gap-packets", action="store_true",
                   help="count packets that span a sample-loss gap")

    p = sub.add_parser("sweep", parents=common, help="run the [experiment] Monte Carlo sweep")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("spectrum", parents=common, help="periodogram of a waveform")
    p.add_argument("--in", dest="infile", required=True, help="waveform CSV")
    p.add_argument("--nfft", type=int)
    p.add_argument("--band", type=float, default=500.0, help="report power below this, Hz")

    p = sub.add_parser("calibrate", parents=common, help="fit a channel preset to points")
    p.add_argument("--points", help="frequency_hz,vpp_volts CSV (default: shipped points)")
    p.add_argument("--preset", default="aluminum")
    _geometry_args(p)
    p.add_argument("--input-vpp", type=float, default=10.0)
    return parser


def _emit(args, text):
    if args.out:
        formats.write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _geometry(args, ch):
    if args.coplanar is not None:
        return Geometry.coplanar(args.coplanar)
    h = 0.0 if args.horizontal is None else args.horizontal
    v = ch.reference_separation if args.vertical is None else args.vertical
    return Geometry(h, v)


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _seed(args, cfg):
    return args.seed if args.seed is not None else cfg.get("experiment", {}).get("seed", 0)


def cmd_plan(args, cfg):
    mat = H.material_from(cfg, args.material)
    if args.thickness is not None:
        mat = replace(mat, thickness=args.thickness)
    b = H.budget_from(cfg)
    b = replace(b, v_transmit=args.vt if args.vt is not None else b.v_transmit,
                v_receive_min=args.vr if args.vr is not None else b.v_receive_min)
    _emit(args, H.plan(mat, b).text() + "\n")


def cmd_modulate(args, cfg):
    m = H.modem_from(cfg, args.symbol_rate, args.sample_rate)
    if args.line_code:
        m = replace(m, line_code=args.line_code)
    w = packet_stream(args.packets, m, H.payload_from(cfg))
    if args.supply is not None:
        w = amplifier_output(w, args.supply, drive_current(args.supply, H.drive_table_from(cfg)))
    _emit(args, formats.waveform_to_text(w))


def cmd_channel(args, cfg):
    ch = H.channel_from(cfg, args.preset)
    noise_seed, loss_seed = H.trial_seeds(_seed(args, cfg), 0)
    ch = replace(ch, seed=noise_seed)
    if args.noise is not None:
        ch = replace(ch, noise_rms=args.noise)
    w = formats.waveform_from_text(_read(args.infile))
    rx = apply_channel(w, ch, _geometry(args, ch))
    if args.capture:
        rate = int(w.sample_rate)
        cap = receive(rx, H.amp_from(cfg), H.adc_from(cfg, rate), loss_seed)
        _emit(args, formats.capture_to_text(cap))
    else:
        _emit(args, formats.waveform_to_text(rx))


def cmd_demod(args, cfg):
    cap = formats.capture_from_text(_read(args.infile))
    m = H.modem_from(cfg, args.symbol_rate, int(cap.sample_rate))
    kw = dict(cfg.get("demod", {}))
    if args.line_code:
        kw["line_code"] = args.line_code
    dcfg = DemodConfig.from_modem(m, **kw)
    gaps = None if args.keep_gap_packets else cap.gaps
    r = demodulate_stream(cap.volts(), dcfg, H.payload_from(cfg), gaps)
    row = dict(packets_found=r.packets_found, packets_skipped=r.packets_skipped,
               bits_compared=r.bits_compared, bit_errors=r.bit_errors, ber=r.ber)
    _emit(args, formats.rows_to_csv([row], list(row)))
    print(r.summary(), file=sys.stderr)
    return 0 if r.packets_found or r.packets_skipped else EXIT_NO_PACKETS


def cmd_sweep(args, cfg):
    ex = H.experiment_from(cfg)
    if args.seed is not None:
        ex = replace(ex, seed=args.seed)
    if args.trials is not None:
        ex = replace(ex, trials=args.trials)
    rows = H.run_experiment(ex, workers=args.workers)
    note = ("one row per sweep point; mean_ber and ber_std over trials with a defined BER; "
            "in_band_fraction = noiseless received power below band_limit_hz")
    _emit(args, formats.rows_to_csv(H.rows_as_dicts(rows), H.COLUMNS, note))
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"row rs={r.symbol_rate} rm={r.sample_rate}: {r.error}", file=sys.stderr)


def cmd_spectrum(args, cfg):
    w = formats.waveform_from_text(_read(args.infile))
    f, p = H.estimate_spectrum(w, args.nfft)
    rows = [dict(frequency_hz=float(a), power=float(b)) for a, b in zip(f, p)]
    _emit(args, formats.rows_to_csv(rows, ["frequency_hz", "power"]))
    frac = H.in_band_fraction(w, args.band, args.nfft)
    print(f"power below {args.band:g} Hz: {frac:.4f}", file=sys.stderr)


def cmd_calibrate(args, cfg):
    ch = H.channel_from(cfg, args.preset)
    if args.points:
        pts = formats.read_points(args.points)
    else:
        pts = np.loadtxt(io.StringIO(config.preset_text("aluminum_points.csv")),
                         delimiter=",", skiprows=1)
    g = _geometry(args, ch)
    fit = calibrate(pts, ch, g, input_vpp=args.input_vpp)
    m = fit.model
    text = (f"# fitted at separation {separation(g):.4g} m; rms residual {fit.residual:.4g} Vpp\n"
            f"[channel.{args.preset}]\n"
            f"coupling_gain_ref = {m.coupling_gain_ref:.6g}\n"
            f"pole_frequency = {m.pole_frequency:.6g}\n")
    _emit(args, text)


COMMANDS = dict(plan=cmd_plan, modulate=cmd_modulate, channel=cmd_channel, demod=cmd_demod,
                sweep=cmd_sweep, spectrum=cmd_spectrum, calibrate=cmd_calibrate)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config.load(args.config)
        return COMMANDS[args.command](args, cfg) or 0
    except (ThroughMetalError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the exit-time flush
        sys.stdout = open(os.devnull, "w")
        return 0


if __name__ == "__main__":
    sys.exit(main())
