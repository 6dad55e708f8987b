"""Command-line entry point: ``corrinfo <subcommand> ...``.

Settings resolve as command-line flags, then the JSON ``--config`` file
(keys are the long option names with ``_`` for ``-``), then built-in
defaults.  Every run logs its full parameter set to stderr as one JSON line.

Exit codes: 0 ok, 1 usage, 2 data error, 3 compliance failure (``--strict``).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .compliance import run_checks
from .grid import Volume, forward_transform, radial_bins
from .info import DEFAULT_BAND, DEFAULT_CLAMP_EPS, GIC_CAVEAT, InfoParams, integrated_information, weighted_information
from .io import (
    fetch_emdb,
    read_curves,
    read_mrc,
    render_decomposition,
    render_plot,
    write_curves,
    write_mrc,
)
from .io.emdb import FetchError
from .io.mrc import MrcError
from .locality import WindowSpec, lcid_map, lid_map
from .metrics import ThresholdParams, fsc, half_bit_threshold, resolution_crossing
from .modelx import run_experiment
from .packet import Packet, ccc_fourier, ccc_real, estimate_bandwidth, estimate_support, average_packets, pic_fourier, pic_real
from .prep import fourier_resample
from .transducer import MeasurementSeries, accumulate_fri, envelope, relative_tie, series_band_report, tie

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_COMPLIANCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def log_params(command: str, params: dict) -> None:
    print("corrinfo params " + json.dumps({"command": command, **params}, sort_keys=True, default=str), file=sys.stderr)


def read_volume(path: str, step: float | None = None) -> Volume:
    p = Path(path)
    if p.suffix.lower() == ".npy":
        return Volume(np.load(p), step if step is not None else 1.0)
    v = read_mrc(p)
    if step is not None:
        v = Volume(v.data, step)
    return v


def _info_params(args, ndim: int) -> InfoParams:
    return InfoParams(
        d=ndim if ndim in (2, 3) else 3,
        kappa=args.kappa,
        d_over_l=args.d_over_l,
        clamp_eps=args.clamp_eps,
        k_override=args.k_override,
        weighting=args.weighting,
    )


def _pair(args) -> tuple[Volume, Volume]:
    a, b = read_volume(args.a, args.step), read_volume(args.b, args.step)
    if a.dims != b.dims:
        raise ValueError(f"dims mismatch: {a.dims} vs {b.dims}")
    return a, b


def _emit_curves(args, curves: dict, v: Volume, params: dict, threshold=None, crossing=None, ylabel="value"):
    if args.output:
        write_curves(curves, args.output, dims=v.dims, step=v.step, params=params)
    else:
        name, c = next(iter(curves.items()))
        print("shell,freq_abs,freq_frac_nyquist,value,flags")
        for i in range(c.n_shells):
            print(f"{i},{c.freq[i]!r},{c.freq_frac[i]!r},{c.values[i]!r},{c.flags[i]}")
    if args.plot:
        shown = {k: c for k, c in curves.items() if k != "half_bit"}
        render_plot(shown, args.plot, threshold=threshold, crossing=crossing, ylabel=ylabel)


def cmd_fsc(args) -> int:
    a, b = _pair(args)
    bins = radial_bins(a.dims, a.step)
    tp = ThresholdParams(args.symmetry, args.fill_linear)
    curve = fsc(forward_transform(a), forward_transform(b), bins)
    thr = half_bit_threshold(bins, tp)
    crossing = resolution_crossing(curve, thr)
    params = {
        "shell_width": bins.shell_width, "symmetry": args.symmetry,
        "fill_linear": args.fill_linear, "step": a.step, "dims": a.dims,
    }
    log_params("fsc", params)
    _emit_curves(args, {"fsc": curve, "half_bit": thr}, a, params, thr, crossing, "FSC")
    print(json.dumps(crossing.as_dict()), file=sys.stderr if not args.output else sys.stdout)
    return EXIT_OK


def _fsi_curve(args):
    a, b = _pair(args)
    bins = radial_bins(a.dims, a.step)
    p = _info_params(args, a.ndim)
    info = weighted_information(fsc(forward_transform(a), forward_transform(b), bins), p)
    params = {"shell_width": bins.shell_width, "step": a.step, "dims": a.dims, **p.as_dict()}
    return a, info, params


def cmd_fsi(args) -> int:
    a, info, params = _fsi_curve(args)
    log_params("fsi", params)
    _emit_curves(args, {"fsi_r": info}, a, params, ylabel="information (bits)")
    return EXIT_OK


def cmd_gic(args) -> int:
    a, info, params = _fsi_curve(args)
    lo, hi = args.band
    params.update(f_lo=lo, f_hi=hi)
    log_params("gic", params)
    print(json.dumps({"gic_bits": integrated_information(info, lo, hi), "band": [lo, hi], "caveat": GIC_CAVEAT}))
    return EXIT_OK


def _map_cmd(args, fn, name) -> int:
    a, b = _pair(args)
    w = WindowSpec(args.window, args.stride, args.mask_sigma)
    p = _info_params(args, a.ndim)
    lo, hi = args.band
    m = fn(a, b, w, p, lo, hi)
    log_params(name, {**m.params, "step": a.step, "dims": a.dims, "mask_sigma_frac": w.mask_sigma_frac})
    write_mrc(m, args.output)
    vals = m.values[m.evaluated]
    print(json.dumps({
        "output": str(args.output), "evaluated_voxels": int(vals.size),
        "min": float(vals.min()), "max": float(vals.max()),
        "saturated_voxels": int(m.saturated.sum()),
    }))
    return EXIT_OK


def cmd_lid(args) -> int:
    return _map_cmd(args, lid_map, "lid")


def cmd_lcid(args) -> int:
    return _map_cmd(args, lcid_map, "lcid")


def load_series(path: str) -> MeasurementSeries:
    """Manifest: ``{"step": 1.0, "pairs": [["a1.mrc", "b1.mrc"], ...]}`` (paths relative to the file)."""
    p = Path(path)
    doc = json.loads(p.read_text())
    if not isinstance(doc, dict) or "pairs" not in doc:
        raise ValueError(f"{path}: manifest needs a 'pairs' list")
    step = float(doc.get("step", 1.0))
    pairs = []
    for a, b in doc["pairs"]:
        va = read_volume(str(p.parent / a), step)
        vb = read_volume(str(p.parent / b), step)
        pairs.append((va.data, vb.data))
    return MeasurementSeries(tuple(pairs), step)


def cmd_tie(args) -> int:
    s_out = load_series(args.out_series)
    s_in = load_series(args.in_series)
    p = _info_params(args, 2)
    f_out, f_in = accumulate_fri(s_out, p), accumulate_fri(s_in, p)
    q = relative_tie(f_out, f_in, args.floor) if args.relative else tie(f_out, f_in, args.floor)
    curves = {"tie": q, "fri_out": f_out, "fri_in": f_in,
              "envelope_out": envelope(f_out, args.envelope_window)}
    params = {"floor": args.floor, "relative": args.relative, "step": s_out.step,
              "envelope_window": args.envelope_window, **p.as_dict()}
    log_params("tie", params)
    for name, s in (("output", s_out), ("input", s_in)):
        rep = series_band_report(s)
        if not rep.passed:
            print(f"corrinfo: warning: {name} series: {rep.finding}", file=sys.stderr)
    v = Volume(s_out.pairs[0][0], s_out.step)
    _emit_curves(args, curves, v, params, ylabel="TIE")
    return EXIT_OK


def read_packet(path: str, step: float) -> Packet:
    p = Path(path)
    if p.suffix.lower() == ".csv":
        x = np.loadtxt(p, delimiter=",", ndmin=1, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError(f"{path}: packet CSV must have a single column")
    else:
        raw = p.read_bytes()
        if len(raw) % 4:
            raise ValueError(f"{path}: raw float32 stream length {len(raw)} is not a multiple of 4")
        x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    return Packet(x, step)


def cmd_pic(args) -> int:
    x1, x2 = read_packet(args.p1, args.sample_step), read_packet(args.p2, args.sample_step)
    avg = average_packets([x1, x2])
    bw = args.bandwidth if args.bandwidth is not None else estimate_bandwidth(avg)
    length = args.length if args.length is not None else estimate_support(avg)
    params = {"sample_step": args.sample_step, "bandwidth": bw, "length": length,
              "centered": args.centered, "clamp_eps": args.clamp_eps, "n": len(x1)}
    log_params("pic", params)
    out = {
        "ccc_real": ccc_real(x1, x2, args.centered),
        "ccc_fourier": ccc_fourier(x1, x2, args.centered),
        "pic_real_bits": pic_real(x1, x2, bw, args.centered, args.clamp_eps) if bw > 0 else None,
        "pic_fourier_bits": pic_fourier(x1, x2, length, args.centered, args.clamp_eps),
        "bandwidth": bw,
        "length": length,
    }
    print(json.dumps(out))
    return EXIT_OK


def cmd_model_experiment(args) -> int:
    dims = tuple(args.dims) if len(args.dims) > 1 else (args.dims[0],) * 3
    t0 = time.perf_counter()
    s, pair, d, summary = run_experiment(dims, args.seed, args.noise_to_signal, args.blobs)
    bins = radial_bins(dims, 1.0)
    params = {"seed": args.seed, "dims": dims, "noise_to_signal": args.noise_to_signal,
              "blobs": args.blobs, "shell_width": bins.shell_width, "noise_seed": args.seed + 1_000_003}
    log_params("model-experiment", params)
    curves = d.curves()
    write_curves(curves, args.output, dims=dims, step=1.0, params=params)
    if args.plot:
        render_decomposition(curves, args.plot)
    rel = np.max(np.abs(d.term_sum - d.t_ab) / np.maximum(np.abs(d.t_ab), 1e-300))
    print(json.dumps({**summary.as_dict(), "additivity_rel_error": float(rel),
                      "seconds": round(time.perf_counter() - t0, 3)}))
    return EXIT_OK


def cmd_check(args) -> int:
    v = read_volume(args.volume, args.step)
    reports = run_checks(v, band_frac=args.band_frac, band_tol=args.tol, corner_tol=args.tol,
                         claimed_resolution=args.claimed_resolution)
    log_params("check", {"band_frac": args.band_frac, "tol": args.tol, "step": v.step,
                         "dims": v.dims, "claimed_resolution": args.claimed_resolution,
                         "shell_width": radial_bins(v.dims, v.step).shell_width})
    doc = [r.as_dict() for r in reports]
    text = json.dumps(doc, indent=1)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)
    failed = [r for r in reports if r.applicable and not r.passed]
    return EXIT_COMPLIANCE if (args.strict and failed) else EXIT_OK


def cmd_resample(args) -> int:
    v = read_volume(args.volume, args.step)
    out = fourier_resample(v, args.to_step)
    log_params("resample", {"src_step": v.step, "dst_step": out.step, "src_dims": v.dims, "dst_dims": out.dims})
    write_mrc(out, args.output)
    print(json.dumps({"output": str(args.output), "dims": list(out.dims), "step": out.step}))
    return EXIT_OK


def cmd_fetch_emdb(args) -> int:
    log_params("fetch-emdb", {"id": args.entry_id, "cache_dir": args.cache_dir})
    print(fetch_emdb(args.entry_id, args.cache_dir))
    return EXIT_OK


def cmd_plot(args) -> int:
    cf = read_curves(args.curves)
    curves = dict(cf.curves)
    thr = curves.pop(args.threshold) if args.threshold else None
    crossing = None
    if thr is not None and len(curves) == 1:
        crossing = resolution_crossing(next(iter(curves.values())), thr)
    log_params("plot", {"curves": list(curves), "threshold": args.threshold, **cf.params})
    if args.panels:
        render_decomposition(curves, args.output)
    else:
        render_plot(curves, args.output, threshold=thr, crossing=crossing, ylabel=args.ylabel)
    print(args.output)
    return EXIT_OK


def _add_volume_pair(sp):
    sp.add_argument("a", help="first half map (.mrc/.map or .npy)")
    sp.add_argument("b", help="second half map")
    sp.add_argument("--step", type=float, help="override the voxel step (Å)")


def _add_info(sp):
    sp.add_argument("--kappa", type=float, help="filling degree; default (D/L)^d")
    sp.add_argument("--d-over-l", type=float, default=1.0)
    sp.add_argument("--clamp-eps", type=float, default=DEFAULT_CLAMP_EPS)
    sp.add_argument("--k-override", type=float)
    sp.add_argument("--weighting", choices=("radial", "counts"), default="radial")


def _add_curve_out(sp):
    sp.add_argument("-o", "--output", help="curve file (.csv or .json); stdout CSV when omitted")
    sp.add_argument("--plot", help="also render an SVG")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corrinfo", description="Correlation-based information metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("fsc", help="FSC/FRC curve with half-bit threshold")
    _add_volume_pair(sp)
    sp.add_argument("--symmetry", type=int, default=1)
    sp.add_argument("--fill-linear", type=float, default=1.0)
    _add_curve_out(sp)
    sp.set_defaults(func=cmd_fsc)

    for name, fn, help_ in (("fsi", cmd_fsi, "radially weighted information curve"),
                            ("gic", cmd_gic, "integrated information over a band")):
        sp = sub.add_parser(name, help=help_)
        _add_volume_pair(sp)
        _add_info(sp)
        sp.add_argument("--band", type=float, nargs=2, default=list(DEFAULT_BAND), metavar=("LO", "HI"))
        if name == "fsi":
            _add_curve_out(sp)
        sp.set_defaults(func=fn)

    for name, fn in (("lid", cmd_lid), ("lcid", cmd_lcid)):
        sp = sub.add_parser(name, help=f"{name.upper()} map written as MRC")
        _add_volume_pair(sp)
        _add_info(sp)
        sp.add_argument("--window", type=int, default=18)
        sp.add_argument("--stride", type=int, default=6)
        sp.add_argument("--mask-sigma", type=float, default=0.6)
        sp.add_argument("--band", type=float, nargs=2, default=list(DEFAULT_BAND), metavar=("LO", "HI"))
        sp.add_argument("-o", "--output", required=True)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("tie", help="transducer information efficiency from series manifests")
    sp.add_argument("out_series", help="JSON manifest of output image pairs")
    sp.add_argument("in_series", help="JSON manifest of input (or second detector) pairs")
    sp.add_argument("--relative", action="store_true")
    sp.add_argument("--floor", type=float, default=0.01)
    sp.add_argument("--envelope-window", type=int, default=5)
    _add_info(sp)
    _add_curve_out(sp)
    sp.set_defaults(func=cmd_tie)

    sp = sub.add_parser("pic", help="packet information content of two 1D packets")
    sp.add_argument("p1", help="CSV (one column) or raw little-endian float32")
    sp.add_argument("p2")
    sp.add_argument("--sample-step", type=float, default=1.0)
    sp.add_argument("--bandwidth", type=float)
    sp.add_argument("--length", type=float)
    sp.add_argument("--centered", action="store_true")
    sp.add_argument("--clamp-eps", type=float, default=DEFAULT_CLAMP_EPS)
    sp.set_defaults(func=cmd_pic)

    sp = sub.add_parser("model-experiment", help="signal/noise cross-term experiment")
    sp.add_argument("--dims", type=int, nargs="+", default=[64])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--noise-to-signal", type=float, default=1.0)
    sp.add_argument("--blobs", type=int, default=24)
    sp.add_argument("-o", "--output", required=True, help="CSV of all five curves")
    sp.add_argument("--plot", help="four-panel SVG")
    sp.set_defaults(func=cmd_model_experiment)

    sp = sub.add_parser("check", help="sampling and apodization compliance")
    sp.add_argument("volume")
    sp.add_argument("--step", type=float)
    sp.add_argument("--band-frac", type=float, default=2.0 / 3.0)
    sp.add_argument("--tol", type=float, default=1e-2)
    sp.add_argument("--claimed-resolution", type=float)
    sp.add_argument("--strict", action="store_true", help="exit 3 when a check fails")
    sp.add_argument("-o", "--output", help="write the JSON reports here too")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("resample", help="Fourier resampling to a new voxel step")
    sp.add_argument("volume")
    sp.add_argument("--step", type=float, help="override the source step")
    sp.add_argument("--to-step", type=float, required=True)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_resample)

    sp = sub.add_parser("fetch-emdb", help="download an EMDB primary map")
    sp.add_argument("entry_id")
    sp.add_argument("--cache-dir")
    sp.set_defaults(func=cmd_fetch_emdb)

    sp = sub.add_parser("plot", help="render a curve file as SVG")
    sp.add_argument("curves")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--threshold", help="name of the curve to draw as threshold")
    sp.add_argument("--panels", action="store_true", help="four-panel decomposition layout")
    sp.add_argument("--ylabel", default="value")
    sp.set_defaults(func=cmd_plot)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre, _ = parser.parse_known_args(argv)
    if not pre.config:
        return
    cfg = json.loads(Path(pre.config).read_text())
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    sp = _subparser(parser, pre.command)
    known = {a.dest for a in sp._actions}
    section = cfg.get(pre.command, {}) if isinstance(cfg.get(pre.command), dict) else {}
    flat = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    merged = {k.replace("-", "_"): v for k, v in {**flat, **section}.items()}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise UsageError(f"unknown config keys for {pre.command}: {unknown}")
    # defaults only: explicit flags still win
    sp.set_defaults(**merged)
    for a in sp._actions:
        if a.dest in merged and a.required:
            a.required = False


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            apply_config(parser, argv)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"corrinfo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, MrcError, FetchError, OSError, KeyError) as exc:
        print(f"corrinfo: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
