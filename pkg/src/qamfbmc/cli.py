"""Command-line front end: ``qamfbmc {ber-sweep,psd,filter-report,validate}``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, resolve_config
from .sim import run_ber_sweep, run_filter_report, run_psd

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

BER_COLUMNS = ("sweep_value", "ber", "wilson_lo", "wilson_hi", "errors", "bits", "seed", "config_hash")
CSV_VERSION = 1


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _sidecar(out: str | None, meta: dict) -> None:
    if out is None:
        return
    path = Path(str(out) + ".meta.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_fmt)
        fh.write("\n")


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def cmd_ber_sweep(cfg, args) -> int:
    t0 = time.perf_counter()
    results = run_ber_sweep(cfg, jobs=args.jobs)
    text = _table(BER_COLUMNS, (
        (r.sweep_value, r.ber, r.wilson_lo, r.wilson_hi, r.errors, r.bits, r.seed, r.config_hash)
        for r in results
    ))
    _emit(text, args.out)
    _sidecar(args.out, {
        "command": "ber-sweep",
        "csv_version": CSV_VERSION,
        "version": __version__,
        "config": cfg.as_dict(),
        "config_hash": cfg.config_hash(),
        "jobs": args.jobs,
        "wall_time_s": time.perf_counter() - t0,
        "point_wall_time_s": {_fmt(r.sweep_value): r.wall_time for r in results},
    })
    return EXIT_OK


def cmd_psd(cfg, args) -> int:
    t0 = time.perf_counter()
    res = run_psd(cfg)
    header = ["freq", "density_db"] + (["density_db_pn"] if res.density_db_pn is not None else [])
    cols = [res.freqs, res.density_db] + ([res.density_db_pn] if res.density_db_pn is not None else [])
    _emit(_table(header, zip(*cols)), args.out)
    oob = {f"{o:g}": float(v) for o, v in zip(res.offsets, res.oob_db)}
    oob_pn = None if res.oob_db_pn is None else {f"{o:g}": float(v) for o, v in zip(res.offsets, res.oob_db_pn)}
    meta = {
        "command": "psd",
        "version": __version__,
        "config": cfg.as_dict(),
        "config_hash": cfg.config_hash(),
        "band": list(res.band),
        "oob_db": oob,
        "oob_db_pn": oob_pn,
        "wall_time_s": time.perf_counter() - t0,
    }
    _sidecar(args.out, meta)
    if args.out is not None:
        summary = ", ".join(f"{k} spacings: {v:.1f} dB" for k, v in oob.items())
        print(f"OOB without phase noise: {summary}", file=sys.stderr)
        if oob_pn:
            summary = ", ".join(f"{k} spacings: {v:.1f} dB" for k, v in oob_pn.items())
            print(f"OOB with {cfg.phase_noise}: {summary}", file=sys.stderr)
    return EXIT_OK


def cmd_filter_report(cfg, args) -> int:
    if cfg.waveform != "qam_fbmc":
        raise ConfigError("waveform", "filter-report needs waveform = qam_fbmc")
    rep = run_filter_report(cfg)
    with np.errstate(divide="ignore"):
        rows = [
            (m, 10 * np.log10(rep.desired[m]), 10 * np.log10(rep.intra[m]),
             10 * np.log10(rep.cross[m]), rep.sir_db[m])
            for m in range(cfg.M)
        ]
    _emit(_table(("subcarrier", "desired_db", "intra_db", "cross_db", "sir_db"), rows), args.out)
    _sidecar(args.out, {
        "command": "filter-report",
        "version": __version__,
        "config": cfg.as_dict(),
        "config_hash": cfg.config_hash(),
        "min_sir_db": rep.min_sir_db,
        "mean_interference": rep.mean_interference,
    })
    return EXIT_OK


def cmd_validate(cfg, args) -> int:
    print(f"ok: {args.config or '<defaults>'} (config_hash {cfg.config_hash()})")
    return EXIT_OK


COMMANDS = {
    "ber-sweep": cmd_ber_sweep,
    "psd": cmd_psd,
    "filter-report": cmd_filter_report,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment config file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="K=V",
                        help="override a config key (section.key or key); repeatable")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")
    common.add_argument("--profile", choices=("desk", "paper"), help="size profile applied before the config file")
    common.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes for Monte-Carlo trials")

    parser = argparse.ArgumentParser(prog="qamfbmc", description="QAM-FBMC / CP-OFDM link-level simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ber-sweep", parents=[common], help="BER versus Eb/N0, CSI error or phase noise")
    sub.add_parser("psd", parents=[common], help="transmit PSD with and without phase noise")
    sub.add_parser("filter-report", parents=[common], help="per-subcarrier self-interference of the filter bank")
    sub.add_parser("validate", parents=[common], help="check a config file and print its hash")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs", "must be >= 1")
        cfg = resolve_config(args.config, args.overrides, profile=args.profile, seed=args.seed)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
