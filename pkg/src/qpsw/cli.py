"""Command-line interface.

Every subcommand writes its results under ``--out-dir``.  JSON outputs carry
the seed and a hash of the resolved configuration (arguments plus the
contents of every input file), and contain nothing time- or path-dependent,
so reruns are byte-identical.

Exit codes: 0 success, 1 computational failure, 2 input or usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import params as prm
from . import plotting
from .embedding import (
    EUCLIDEAN,
    MAX,
    EmbeddingParams,
    PointCloud,
    distance_matrix,
    feasible_times,
    hausdorff_distance,
    maxmin_sample,
    read_distance_matrix,
    sliding_window,
    write_distance_matrix,
)
from .errors import ComputationError, EmptySignalError
from .model import Signal, SpectralModel, kronecker_orbit, load_model, load_signal, synthesize, write_signal_csv, write_wav
from .persistence.diagram import PersistenceDiagram, dump_diagrams, load_diagrams
from .persistence.rips import rips_persistence
from .spectral import find_peaks, peaks_to_json, signed_peaks, spectrum

log = logging.getLogger("qpsw")

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2
PLOT_KINDS = ("signal", "spectrum", "diagram", "sweep", "orbit")


class UsageError(ValueError):
    pass


# --- helpers ----------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


_UNHASHED = {"out_dir", "out", "verbose", "func"}


def config_hash(args: argparse.Namespace) -> str:
    """Hash of the resolved settings and input file contents, not their paths."""
    settings = {k: v for k, v in vars(args).items() if k not in _UNHASHED}
    inputs = {}
    for key in ("input", "inputs", "params_file", "bounds_file", "peaks_file"):
        val = settings.pop(key, None)
        if val is None:
            continue
        paths = val if isinstance(val, list) else [val]
        inputs[key] = [_file_digest(p) for p in paths]
    blob = json.dumps(_jsonable({"settings": settings, "inputs": inputs}), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _write_json(path: Path, payload: dict, args) -> None:
    body = dict(payload)
    body["config_hash"] = args._hash
    body["seed"] = args.seed
    path.write_text(json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n")
    log.info("wrote %s", path)


def _write_text(path: Path, text: str) -> None:
    path.write_text(text)
    log.info("wrote %s", path)


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except ComputationError as exc:
        raise type(exc)(f"stage '{name}': {exc}") from exc
    except EmptySignalError:
        raise
    except ValueError as exc:
        raise ValueError(f"stage '{name}': {exc}") from exc


def _parse_dims(text: str) -> list[int]:
    try:
        dims = sorted({int(v) for v in text.split(",") if v.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}") from None
    if not dims or dims[0] < 0:
        raise argparse.ArgumentTypeError("dimensions must be non-negative")
    return dims


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _parse_range(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive) or a comma list."""
    if ":" in text:
        try:
            a, b, n = text.split(":")
            return np.linspace(float(a), float(b), int(n))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad range {text!r}; expected start:stop:count") from None
    return np.asarray(_parse_floats(text))


def _parse_threshold(text: str) -> float:
    return math.inf if text.lower() in ("inf", "none") else float(text)


# --- sources ----------------------------------------------------------------


def _load_source(path, args) -> tuple[Signal, SpectralModel | None]:
    """The input as a signal, plus the model when the input is a model file."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"input file not found: {path}")
    if path.stat().st_size == 0:
        raise EmptySignalError()
    if path.suffix.lower() == ".json":
        model = load_model(path)
        if args.n is None or args.rate is None:
            raise UsageError("model input needs --n and --rate to build the sample grid")
        return synthesize(model, args.n, args.rate, args.t0), model
    return load_signal(path), None


def _peaks(sig: Signal, args):
    spec = spectrum(sig, window="hann" if args.hann else None)
    height = args.min_height * (float(spec.modulus.max()) if args.relative_height else 1.0)
    if args.min_sep_hz is not None:
        sep = 2 * math.pi * args.min_sep_hz
    elif args.min_sep is not None:
        sep = args.min_sep
    else:
        sep = args.min_sep_bins * spec.bin_width
    peaks = find_peaks(spec, height, sep)
    if not peaks:
        raise ValueError("no spectral content detected")
    return spec, peaks


def _domain_length(sig: Signal) -> float:
    return len(sig) / sig.sample_rate


def _choose_params(sig: Signal, model: SpectralModel | None, args):
    """d, tau, gamma, the signed frequencies and the positive-line magnitudes."""
    spec, peaks = _peaks(sig, args)
    symmetric = not spec.signed
    if args.exact_frequencies and model is not None:
        freqs = sorted(model.frequencies.tolist())
        mags = sorted((abs(t.coefficient) for t in model.terms if t.frequency > 0 or not symmetric), reverse=True)
    else:
        lines = signed_peaks(peaks) if symmetric else peaks
        freqs = sorted(p.frequency for p in lines)
        mags = sorted((p.amplitude for p in peaks), reverse=True)
    d = args.d if args.d is not None else prm.choose_d(peaks, symmetric=symmetric, alpha_minus_one=args.alpha_minus_one)
    if args.tau is not None:
        tau = args.tau
        gval = prm.gamma(tau, freqs, d) if len(freqs) > 1 else 0.0
    elif len(freqs) < 2:
        raise ValueError("need two spectral lines to choose tau; pass --tau")
    else:
        tau_max = args.tau_max if args.tau_max is not None else prm.default_tau_max(_domain_length(sig), d)
        if args.grid_points is not None:
            cfg = prm.DelaySearchConfig(tau_max, args.grid_points, args.refine_tol)
        else:
            cfg = prm.DelaySearchConfig.for_frequencies(freqs, d, tau_max, args.refine_tol)
        tau, gval = prm.minimize_gamma(freqs, d, cfg)
    return spec, peaks, d, float(tau), float(gval), freqs, mags


def _embed(sig: Signal, model: SpectralModel | None, d: int, tau: float) -> PointCloud:
    ep = EmbeddingParams(d, tau)
    if model is not None:
        return sliding_window(model, ep, sig.times)
    return sliding_window(sig, ep, feasible_times(sig, ep))


# --- subcommands --------------------------------------------------------------


def cmd_synth(args) -> int:
    model = load_model(args.input) if Path(args.input).stat().st_size else SpectralModel()
    if args.n is None or args.rate is None:
        raise UsageError("synth needs --n and --rate")
    sig = synthesize(model, args.n, args.rate, args.t0)
    out = Path(args.out) if args.out else args.out_dir / "signal.csv"
    if out.suffix.lower() == ".wav":
        write_wav(sig, out)
    else:
        write_signal_csv(sig, out)
    log.info("wrote %s", out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    sig, _ = _load_source(args.input, args)
    spec, peaks = _peaks(sig, args)
    _write_text(args.out_dir / "spectrum.csv", spec.to_csv())
    _write_json(args.out_dir / "peaks.json", {"peaks": peaks_to_json(peaks), "signed": spec.signed}, args)
    return EXIT_OK


def cmd_params(args) -> int:
    sig, model = _load_source(args.input, args)
    _, peaks, d, tau, gval, freqs, mags = _choose_params(sig, model, args)
    payload = {"d": d, "tau": tau, "gamma": gval, "frequencies": freqs, "magnitudes": mags}
    _write_json(args.out_dir / "params.json", payload, args)
    return EXIT_OK


def cmd_embed(args) -> int:
    sig, model = _load_source(args.input, args)
    if args.d is None or args.tau is None:
        raise UsageError("embed needs --d and --tau")
    cloud = _embed(sig, model, args.d, args.tau)
    meta = {"d": args.d, "tau": args.tau, "points": len(cloud)}
    if args.landmarks and args.landmarks < len(cloud):
        idx = maxmin_sample(cloud, args.landmarks, args.seed)
        sub = cloud.subset(idx)
        meta["landmark_indices"] = idx.tolist()
        meta["hausdorff"] = hausdorff_distance(sub, cloud)
        cloud = sub
    _write_text(args.out_dir / "cloud.csv", cloud.to_csv())
    write_distance_matrix(distance_matrix(cloud, args.metric), args.out_dir / "distances.bin", args.metric)
    _write_json(args.out_dir / "embed.json", meta, args)
    return EXIT_OK


def _distances_from(path: Path, metric: str) -> np.ndarray:
    if path.stat().st_size == 0:
        raise EmptySignalError()
    if path.suffix.lower() == ".bin":
        return read_distance_matrix(path)[0]
    cloud = PointCloud.from_csv(path.read_text())
    return distance_matrix(cloud, metric)


def cmd_persist(args) -> int:
    dist = _distances_from(Path(args.input), args.metric)
    diagrams = rips_persistence(dist, max(args.dims), args.threshold)
    text = dump_diagrams(diagrams, config_hash=args._hash, seed=args.seed, threshold=_jsonable(args.threshold))
    _write_text(args.out_dir / "diagrams.json", text + "\n")
    return EXIT_OK


def _bound_payload(freqs, mags, d, tau, tail, hausdorff, floor, mode) -> tuple[dict, list]:
    report = bnd.vandermonde_report(freqs, tau, d)
    sigma = report.sigma_min
    if floor:
        sigma = bnd.sigma_min_floor(d, report.delta_omega)
    levels = [bnd.lower_bound(mags, n, sigma, d, tail, hausdorff, mode) for n in range(1, len(mags) + 1)]
    payload = {
        "vandermonde": report.to_dict(),
        "sigma_source": "floor" if floor else "computed",
        "bounds": [lv.to_dict() for lv in levels],
    }
    return payload, levels


def cmd_bounds(args) -> int:
    if args.params_file:
        obj = json.loads(Path(args.params_file).read_text())
        d = args.d if args.d is not None else int(obj["d"])
        tau = args.tau if args.tau is not None else float(obj["tau"])
        freqs = args.frequencies or obj["frequencies"]
        mags = args.magnitudes or obj["magnitudes"]
    else:
        if args.d is None or args.tau is None or not args.frequencies or not args.magnitudes:
            raise UsageError("bounds needs --params or all of --d --tau --frequencies --magnitudes")
        d, tau, freqs, mags = args.d, args.tau, args.frequencies, args.magnitudes
    mags = sorted(mags, reverse=True)
    payload, _ = _bound_payload(freqs, mags, d, tau, args.tail, args.hausdorff, args.floor, args.mode)
    _write_json(args.out_dir / "bounds.json", payload, args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    sig, model = _load_source(args.input, args)
    if args.d is None:
        raise UsageError("sweep needs --d")
    rows = _run_sweep(sig, model, args.d, args.taus, args)
    _write_text(args.out_dir / "sweep.csv", prm.sweep_to_csv(rows))
    return EXIT_OK


def _run_sweep(sig, model, d, taus, args):
    source = model if model is not None else sig
    taus = np.asarray(taus, dtype=float)
    if model is not None:
        times = sig.times
    else:
        times = feasible_times(sig, EmbeddingParams(d, float(taus.max())))
    return prm.persistence_vs_tau_sweep(
        source, d, taus, times, args.landmarks, args.seed, args.top_q, [j for j in args.dims if j >= 1] or [1],
        args.threshold,
    )


def cmd_pipeline(args) -> int:
    out = args.out_dir
    with stage("input"):
        sig, model = _load_source(args.input, args)
    with stage("parameters"):
        spec, peaks, d, tau, gval, freqs, mags = _choose_params(sig, model, args)
    with stage("embedding"):
        cloud = _embed(sig, model, d, tau)
        m = min(args.landmarks, len(cloud))
        idx = maxmin_sample(cloud, m, args.seed)
        sub = cloud.subset(idx)
        hd = hausdorff_distance(sub, cloud)
    with stage("persistence"):
        diagrams = rips_persistence(distance_matrix(sub), max(args.dims), args.threshold)
    with stage("bounds"):
        hausdorff = hd if args.hausdorff is None else args.hausdorff
        bound_json, levels = _bound_payload(freqs, mags, d, tau, args.tail, hausdorff, args.floor, args.mode)
        above = {}
        for lv in levels:
            above[str(lv.level_n)] = {
                str(dg.dimension): dg.count_above(lv.bound_value) for dg in diagrams if dg.dimension >= 1
            }
        bound_json["features_above_bound"] = above

    _write_text(out / "spectrum.csv", spec.to_csv())
    _write_json(out / "peaks.json", {"peaks": peaks_to_json(peaks), "signed": spec.signed}, args)
    _write_json(
        out / "params.json", {"d": d, "tau": tau, "gamma": gval, "frequencies": freqs, "magnitudes": mags}, args
    )
    emb = {"points": len(cloud), "landmarks": m, "landmark_indices": idx.tolist(), "hausdorff": hd}
    _write_json(out / "embed.json", emb, args)
    text = dump_diagrams(diagrams, config_hash=args._hash, seed=args.seed, threshold=_jsonable(args.threshold))
    _write_text(out / "diagrams.json", text + "\n")
    _write_json(out / "bounds.json", bound_json, args)

    with stage("figures"):
        _write_text(out / "signal.svg", plotting.signal_svg(sig.times, sig.samples))
        _write_text(out / "spectrum.svg", plotting.spectrum_svg(spec.frequency, spec.modulus, peaks))
        shown = [dg for dg in diagrams if dg.dimension >= 1]
        _write_text(out / "diagram.svg", plotting.diagram_svg(shown, [lv.bound_value for lv in levels]))
        if args.sweep:
            taus = np.linspace(args.sweep_min, args.sweep_max or 2 * tau, args.sweep)
            rows = _run_sweep(sig, model, d, taus, args)
            _write_text(out / "sweep.csv", prm.sweep_to_csv(rows))
            _write_text(out / "sweep.svg", plotting.sweep_svg(rows))
    return EXIT_OK


def cmd_plot(args) -> int:
    kind = args.kind
    files = [Path(p) for p in args.inputs]
    if kind == "orbit":
        if args.beta is None:
            raise UsageError("orbit plot needs --beta")
        times = args.times if args.times is not None else np.arange(-10000, 10001, dtype=float)
        svg = plotting.orbit_svg(kronecker_orbit(args.beta, times))
    elif not files:
        raise UsageError(f"{kind} plot needs an input file")
    elif kind == "signal":
        sig, _ = _load_source(files[0], args)
        svg = plotting.signal_svg(sig.times, sig.samples)
    elif kind == "spectrum":
        data = np.loadtxt(files[0], delimiter=",", skiprows=1, ndmin=2)
        peaks = []
        if len(files) > 1:
            from .spectral import peaks_from_json

            peaks = peaks_from_json(files[1].read_text())
        svg = plotting.spectrum_svg(data[:, 0], data[:, 2], peaks)
    elif kind == "diagram":
        diagrams = [dg for dg in load_diagrams(files[0].read_text()) if dg.dimension >= 1 or args.show_h0]
        levels = list(args.levels or [])
        if len(files) > 1:
            levels += [b["bound_value"] for b in json.loads(files[1].read_text())["bounds"]]
        svg = plotting.diagram_svg(diagrams, levels)
    else:
        rows = prm.sweep_from_csv(files[0].read_text())
        svg = plotting.sweep_svg(rows)
    out = Path(args.out) if args.out else args.out_dir / f"{kind}.svg"
    _write_text(out, svg)
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="seed for the first maxmin landmark")
    g.add_argument("--out-dir", type=Path, default=Path("."), help="directory for outputs")
    g.add_argument("--landmarks", type=int, default=400, help="maxmin landmark count")
    g.add_argument("--dims", type=_parse_dims, default=[1, 2], help="homology dimensions, e.g. 1,2")
    g.add_argument("--threshold", type=_parse_threshold, default=math.inf, help="Rips cutoff (default: enclosing radius)")
    g.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _sampling(p):
    g = p.add_argument_group("sampling (model inputs)")
    g.add_argument("--n", type=int, help="number of samples")
    g.add_argument("--rate", type=float, help="samples per unit time")
    g.add_argument("--t0", type=float, default=0.0, help="time of the first sample")


def _peak_opts(p):
    g = p.add_argument_group("peak detection")
    g.add_argument("--min-height", type=float, default=0.04)
    g.add_argument("--relative-height", action="store_true", help="scale --min-height by the largest modulus")
    g.add_argument("--min-sep", type=float, help="peak separation in rad per unit time")
    g.add_argument("--min-sep-hz", type=float, help="peak separation in Hz")
    g.add_argument("--min-sep-bins", type=float, default=10.0, help="separation in DFT bins when no other is given")
    g.add_argument("--hann", action="store_true", help="taper with a Hann window")


def _delay_opts(p):
    g = p.add_argument_group("parameter selection")
    g.add_argument("--d", type=int, help="fix the window size")
    g.add_argument("--tau", type=float, help="fix the delay")
    g.add_argument("--alpha-minus-one", action="store_true", help="use d = alpha - 1")
    g.add_argument("--tau-max", type=float, help="upper end of the delay search")
    g.add_argument("--grid-points", type=int, help="delay grid size")
    g.add_argument("--refine-tol", type=float, default=1e-6)
    g.add_argument("--exact-frequencies", action="store_true", help="use model frequencies instead of peaks")


def _bound_opts(p):
    g = p.add_argument_group("bounds")
    g.add_argument("--tail", type=float, default=0.0, help="sup-norm truncation error")
    g.add_argument("--floor", action="store_true", help="use the certified sigma_min floor")
    g.add_argument("--mode", choices=(bnd.DISTINCT, bnd.LITERAL), default=bnd.DISTINCT)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qpsw", description="Quasiperiodicity via sliding windows and persistence.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="sample a model to CSV or WAV")
    p.add_argument("input", help="model JSON")
    p.add_argument("--out", help="output file (.csv or .wav)")
    _sampling(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("spectrum", parents=[common], help="DFT moduli and peaks")
    p.add_argument("input")
    _sampling(p)
    _peak_opts(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("params", parents=[common], help="choose d and tau")
    p.add_argument("input")
    _sampling(p)
    _peak_opts(p)
    _delay_opts(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("embed", parents=[common], help="sliding-window point cloud")
    p.add_argument("input")
    _sampling(p)
    p.add_argument("--d", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--metric", choices=(EUCLIDEAN, MAX), default=EUCLIDEAN)
    p.set_defaults(func=cmd_embed, landmarks=None)

    p = sub.add_parser("persist", parents=[common], help="Rips persistence diagrams")
    p.add_argument("input", help="point cloud CSV or distance matrix .bin")
    p.add_argument("--metric", choices=(EUCLIDEAN, MAX), default=EUCLIDEAN)
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("bounds", parents=[common], help="Vandermonde report and persistence lower bounds")
    p.add_argument("--params", dest="params_file", help="params.json from the params command")
    p.add_argument("--d", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--frequencies", type=_parse_floats)
    p.add_argument("--magnitudes", type=_parse_floats)
    p.add_argument("--hausdorff", type=float, default=0.0)
    _bound_opts(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", parents=[common], help="top persistence against tau")
    p.add_argument("input")
    _sampling(p)
    p.add_argument("--d", type=int)
    p.add_argument("--taus", type=_parse_range, required=True, help="start:stop:count or a comma list")
    p.add_argument("--top-q", type=int, default=3)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline", parents=[common], help="spectrum to bounds, with figures")
    p.add_argument("input")
    _sampling(p)
    _peak_opts(p)
    _delay_opts(p)
    _bound_opts(p)
    p.add_argument("--hausdorff", type=float, help="override the measured landmark Hausdorff distance")
    p.add_argument("--sweep", type=int, default=0, help="also sweep this many delays")
    p.add_argument("--sweep-min", type=float, default=0.1)
    p.add_argument("--sweep-max", type=float)
    p.add_argument("--top-q", type=int, default=3)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("plot", parents=[common], help="render an SVG figure")
    p.add_argument("kind", choices=PLOT_KINDS)
    p.add_argument("inputs", nargs="*")
    p.add_argument("--out", help="output SVG path")
    p.add_argument("--levels", type=_parse_floats, help="bound levels for diagram plots")
    p.add_argument("--show-h0", action="store_true")
    p.add_argument("--beta", type=_parse_floats, help="orbit direction")
    p.add_argument("--times", type=_parse_range, help="orbit times")
    _sampling(p)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        args.out_dir = args.out_dir.resolve()
        args.out_dir.mkdir(parents=True, exist_ok=True)
        args._hash = config_hash(args)
        return args.func(args)
    except EmptySignalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
